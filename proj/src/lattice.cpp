#include "persuasion/lattice.hpp"

#include <cmath>
#include <limits>

#include "persuasion/errors.hpp"

namespace persuasion {

std::size_t lattice_size(std::size_t m, std::size_t parts) {
  if (parts == 0) return 0;
  // C(m + parts - 1, parts - 1) built up multiplicatively; exact at every step.
  const std::size_t k = parts - 1;
  long double acc = 1.0L;
  std::size_t exact = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    acc = acc * static_cast<long double>(m + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 4))
      return std::numeric_limits<std::size_t>::max();
    exact = exact * (m + i) / i;
  }
  return exact;
}

bool next_composition(std::vector<int>& counts) {
  const std::size_t k = counts.size();
  if (k < 2) return false;
  // Find the rightmost nonzero entry before the last slot, move one unit right,
  // and sweep whatever sat in the last slot back next to it.
  std::size_t i = k - 1;
  while (i > 0 && counts[i - 1] == 0) --i;
  if (i == 0) return false;
  --i;
  if (i == k - 1) return false;
  const int tail = counts[k - 1];
  counts[k - 1] = 0;
  counts[i] -= 1;
  counts[i + 1] += 1 + tail;
  return true;
}

std::vector<std::vector<int>> all_compositions(int m, std::size_t parts) {
  std::vector<std::vector<int>> out;
  if (parts == 0) return out;
  std::vector<int> c(parts, 0);
  c[0] = m;
  do {
    out.push_back(c);
  } while (next_composition(c));
  return out;
}

int lattice_denominator(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidConfig("lattice step must be positive");
  const long r = std::lround(1.0 / step);
  return static_cast<int>(std::max(1L, r));
}

}  // namespace persuasion
