#pragma once

#include <vector>

#include "crtmap/path.hpp"

namespace crtmap::testutil {

// Hand-built cell sequence; boundaries at integer times, endpoint values 0.
inline CellSequence make_cells(long long first_cell,
                               const std::vector<double>& inf_l,
                               const std::vector<double>& inf_r) {
  CellSequence cs;
  cs.epsilon = 1.0;
  cs.first_cell = first_cell;
  std::size_t n = inf_l.size();
  cs.inf_L = inf_l;
  cs.inf_R = inf_r;
  cs.boundary.resize(n + 1);
  cs.end_L.assign(n + 1, 0.0);
  cs.end_R.assign(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i)
    cs.boundary[i] = static_cast<double>(first_cell - 1 + static_cast<long long>(i));
  return cs;
}

// Strictly-decreasing filler for the side not under test; produces no long
// edges on that side.
inline std::vector<double> decreasing(std::size_t n, double start = 1000.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start - static_cast<double>(i);
  return v;
}

}  // namespace crtmap::testutil
