#include <cstdio>
#include <sstream>

#include "fexp/error.hpp"
#include "fexp/pipeline.hpp"

namespace fexp {

std::vector<Prediction> predict_folds(const FoldPlan& plan, std::span<const Checkpoint> models,
                                      std::span<const LabeledExample> examples)
{
  if (models.size() != plan.folds.size())
    fail(ErrorKind::Usage, "expected " + std::to_string(plan.folds.size()) + " fold models, got " +
                               std::to_string(models.size()));
  std::vector<Prediction> out;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& model = models[f];
    if (model.params.parameter_count() == 0) fail(ErrorKind::Usage, "fold " + std::to_string(f) + " is untrained");
    for (auto i : split(plan.folds[f], examples).test) {
      const auto& ex = examples[i];
      Prediction p;
      p.id = ex.id();
      p.fold = static_cast<int>(f);
      p.target = ex.target;
      p.predicted = model.explain(ex.features);
      p.true_class = ex.cls;
      p.predicted_class = predict_class(p.predicted, model.style);
      out.push_back(std::move(p));
    }
  }
  return out;
}

EvaluationReport evaluate(std::vector<Prediction> predictions)
{
  EvaluationReport r;
  r.total = predictions.size();
  for (const auto& p : predictions) {
    const auto t = static_cast<std::size_t>(p.true_class);
    if (p.predicted_class) {
      ++r.matrix[t][static_cast<std::size_t>(*p.predicted_class)];
    } else {
      ++r.malformed_by_class[t];
      ++r.malformed_count;
    }
    if (p.predicted == p.target) ++r.exact_matches;
  }
  std::size_t trace = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    trace += r.matrix[c][c];
    std::size_t row = r.malformed_by_class[c], col = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      row += r.matrix[c][k];
      col += r.matrix[k][c];
    }
    auto& m = r.per_class[c];
    m.support = row;
    if (row) m.recall = static_cast<double>(r.matrix[c][c]) / static_cast<double>(row);
    if (col) m.precision = static_cast<double>(r.matrix[c][c]) / static_cast<double>(col);
  }
  if (r.total) {
    r.accuracy = static_cast<double>(trace) / static_cast<double>(r.total);
    r.exact_match_accuracy = static_cast<double>(r.exact_matches) / static_cast<double>(r.total);
  }
  r.predictions = std::move(predictions);
  return r;
}

namespace {

std::optional<ExplanationClass> sibling(ExplanationClass c)
{
  switch (c) {
    case ExplanationClass::TooFar: return ExplanationClass::CloseTogether;
    case ExplanationClass::CloseTogether: return ExplanationClass::TooFar;
    case ExplanationClass::NotPresent: return ExplanationClass::Occluded;
    case ExplanationClass::Occluded: return ExplanationClass::NotPresent;
    default: return std::nullopt;
  }
}

}  // namespace

ConfusionStructure confusion_structure(const EvaluationReport& report)
{
  ConfusionStructure s;
  for (const auto& p : report.predictions) {
    if (p.true_class == ExplanationClass::Correct) continue;
    ++s.failing_examples;
    if (p.predicted_class == p.true_class) continue;
    ++s.failing_errors;
    const auto sib = sibling(p.true_class);
    if (!sib) continue;
    ++s.typed_errors;
    if (p.predicted_class == sib) ++s.sibling_errors;
  }
  if (s.typed_errors) s.sibling_share = static_cast<double>(s.sibling_errors) / static_cast<double>(s.typed_errors);
  return s;
}

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& v)
{
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json to_json(const EvaluationReport& report, const std::string& config_digest)
{
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "evaluation";
  j["config_digest"] = config_digest;
  std::vector<std::string> classes;
  for (std::size_t c = 0; c < kNumClasses; ++c) classes.emplace_back(to_string(static_cast<ExplanationClass>(c)));
  j["classes"] = classes;
  j["total"] = report.total;
  j["accuracy"] = report.accuracy;
  j["exact_match_accuracy"] = report.exact_match_accuracy;
  j["malformed_count"] = report.malformed_count;
  auto& matrix = j["matrix"] = nlohmann::ordered_json::array();
  for (const auto& row : report.matrix) matrix.push_back(row);
  auto& per_class = j["per_class"] = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& m = report.per_class[c];
    per_class[classes[c]] = {{"precision", optional_number(m.precision)},
                             {"recall", optional_number(m.recall)},
                             {"support", m.support},
                             {"malformed", report.malformed_by_class[c]}};
  }
  const auto cs = confusion_structure(report);
  j["confusion_structure"] = {{"failing_examples", cs.failing_examples},
                              {"failing_errors", cs.failing_errors},
                              {"typed_errors", cs.typed_errors},
                              {"sibling_errors", cs.sibling_errors},
                              {"sibling_share", optional_number(cs.sibling_share)}};
  auto& preds = j["predictions"] = nlohmann::ordered_json::array();
  for (const auto& p : report.predictions) {
    preds.push_back({{"id", p.id},
                     {"fold", p.fold},
                     {"target", p.target},
                     {"predicted", p.predicted},
                     {"class", to_string(p.true_class)},
                     {"predicted_class", p.predicted_class ? nlohmann::ordered_json(to_string(*p.predicted_class))
                                                           : nlohmann::ordered_json("malformed")}});
  }
  return j;
}

std::string render_text(const EvaluationReport& report)
{
  static constexpr std::array<const char*, kNumClasses> abbrev = {"far", "close", "absent", "occl", "lost", "motor",
                                                                  "ok"};
  std::ostringstream out;
  char buf[160];
  out << "true \\ pred";
  for (auto a : abbrev) {
    std::snprintf(buf, sizeof buf, "%8s", a);
    out << buf;
  }
  out << "  malformed\n";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::snprintf(buf, sizeof buf, "%-11s", abbrev[c]);
    out << buf;
    for (auto v : report.matrix[c]) {
      std::snprintf(buf, sizeof buf, "%8zu", v);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%11zu\n", report.malformed_by_class[c]);
    out << buf;
  }
  out << '\n';
  std::snprintf(buf, sizeof buf, "%-16s%10s%10s%10s\n", "class", "precision", "recall", "support");
  out << buf;
  auto fmt = [](const std::optional<double>& v) {
    char b[32];
    if (v)
      std::snprintf(b, sizeof b, "%.3f", *v);
    else
      std::snprintf(b, sizeof b, "-");
    return std::string(b);
  };
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& m = report.per_class[c];
    std::snprintf(buf, sizeof buf, "%-16s%10s%10s%10zu\n", std::string(to_string(static_cast<ExplanationClass>(c))).c_str(),
                  fmt(m.precision).c_str(), fmt(m.recall).c_str(), m.support);
    out << buf;
  }
  out << '\n';
  std::snprintf(buf, sizeof buf, "accuracy              %.4f  (%zu examples, %zu malformed)\n", report.accuracy,
                report.total, report.malformed_count);
  out << buf;
  std::snprintf(buf, sizeof buf, "exact-match accuracy  %.4f\n", report.exact_match_accuracy);
  out << buf;
  return out.str();
}

}  // namespace fexp
