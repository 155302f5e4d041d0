#pragma once

#include <cstddef>
#include <vector>

namespace persuasion {

/// Number of points k/m-spaced on the simplex with `parts` coordinates, i.e.
/// C(m + parts - 1, parts - 1). Saturates at SIZE_MAX.
std::size_t lattice_size(std::size_t m, std::size_t parts);

/// Steps `counts` (nonnegative integers summing to m) to the next composition
/// in reverse-lexicographic order, starting from (m, 0, ..., 0). Returns false
/// after the last one, (0, ..., 0, m).
bool next_composition(std::vector<int>& counts);

/// All compositions of m into `parts` parts, in next_composition order.
std::vector<std::vector<int>> all_compositions(int m, std::size_t parts);

/// Grid denominator for a step size: round(1 / step), at least 1.
int lattice_denominator(double step);

}  // namespace persuasion
