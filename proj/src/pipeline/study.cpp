#include <algorithm>
#include <cctype>
#include <sstream>

#include "fexp/error.hpp"
#include "fexp/io.hpp"
#include "fexp/pipeline.hpp"

namespace fexp {

namespace {

std::string trim(std::string_view s)
{
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(std::string_view line)
{
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_bool(std::string value, std::size_t line_no, const char* column)
{
  std::transform(value.begin(), value.end(), value.begin(), [](unsigned char c) { return std::tolower(c); });
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  fail(ErrorKind::Schema, "line " + std::to_string(line_no) + ": " + column + " must be a boolean, got '" + value + "'");
}

std::optional<double> ratio(std::size_t correct, std::size_t total)
{
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

std::vector<ResponseRecord> parse_responses(std::string_view csv)
{
  static const std::vector<std::string> header = {"participant", "trial", "action_correct", "solution_correct"};
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::vector<ResponseRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (!seen_header) {
      if (cells != header)
        fail(ErrorKind::Schema, "response file header must be participant,trial,action_correct,solution_correct");
      seen_header = true;
      continue;
    }
    if (cells.size() != header.size())
      fail(ErrorKind::Schema, "line " + std::to_string(line_no) + ": expected 4 fields, got " +
                                  std::to_string(cells.size()));
    ResponseRecord r;
    r.participant = cells[0];
    r.trial = cells[1];
    if (r.participant.empty()) fail(ErrorKind::Schema, "line " + std::to_string(line_no) + ": empty participant");
    r.action_correct = parse_bool(cells[2], line_no, "action_correct");
    r.solution_correct = parse_bool(cells[3], line_no, "solution_correct");
    out.push_back(std::move(r));
  }
  if (!seen_header) fail(ErrorKind::Schema, "response file is empty");
  return out;
}

std::vector<ResponseRecord> load_responses(const std::filesystem::path& path)
{
  try {
    return parse_responses(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

StudyMetrics study_metrics(std::span<const ResponseRecord> records)
{
  if (records.empty()) fail(ErrorKind::Usage, "no response records");
  struct Counts {
    std::size_t trials = 0, action = 0, solution = 0;
  };
  std::map<std::string, Counts> counts;
  Counts pooled;
  for (const auto& r : records) {
    for (Counts* c : {&counts[r.participant], &pooled}) {
      ++c->trials;
      c->action += r.action_correct;
      c->solution += r.solution_correct;
    }
  }
  auto ratios = [](const Counts& c) { return StudyRatios{c.trials, ratio(c.solution, c.trials), ratio(c.action, c.trials)}; };
  StudyMetrics m;
  for (const auto& [p, c] : counts) m.per_participant[p] = ratios(c);
  m.pooled = ratios(pooled);
  return m;
}

nlohmann::ordered_json to_json(const StudyMetrics& metrics, const std::string& config_digest)
{
  auto entry = [](const StudyRatios& r) {
    nlohmann::ordered_json j;
    j["trials"] = r.trials;
    j["solution_pct"] = r.solution ? nlohmann::ordered_json(*r.solution) : nlohmann::ordered_json(nullptr);
    j["action_pct"] = r.action ? nlohmann::ordered_json(*r.action) : nlohmann::ordered_json(nullptr);
    return j;
  };
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "study_metrics";
  j["config_digest"] = config_digest;
  j["pooled"] = entry(metrics.pooled);
  auto& per = j["participants"] = nlohmann::ordered_json::object();
  for (const auto& [p, r] : metrics.per_participant) per[p] = entry(r);
  return j;
}

}  // namespace fexp
