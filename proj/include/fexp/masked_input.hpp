#pragma once

#include <cstddef>
#include <vector>

namespace fexp {

/// Model-ready input. Masked raw slots hold the sentinel 0 and must only be
/// read through `mask`.
struct MaskedInput {
  std::vector<int> entities;  // encoder token ids, never empty
  int object = 0;             // row of the object embedding table
  std::vector<double> values;
  std::vector<bool> mask;     // true = real value, false = Empty

  std::size_t size() const { return values.size(); }
};

}  // namespace fexp
