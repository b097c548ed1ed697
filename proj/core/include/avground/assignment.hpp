#pragma once

#include <vector>

namespace avground {

/// Maximum-total-weight one-to-one assignment for a rows x cols weight
/// matrix. Every index of the smaller side is matched. Returns, per row,
/// the matched column (or -1 when rows outnumber columns). Small instances
/// are solved by exhaustive search, larger ones by the Hungarian method.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights);

namespace detail {
std::vector<int> assignment_exhaustive(const std::vector<std::vector<double>>& weights);
std::vector<int> assignment_hungarian(const std::vector<std::vector<double>>& weights);
}  // namespace detail

}  // namespace avground
