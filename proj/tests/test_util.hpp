#pragma once

// Shared generators for the randomized suites.

#include <utility>
#include <vector>

#include "salign/analytic.hpp"
#include "salign/rng.hpp"

namespace salign::testutil {

inline std::vector<std::pair<double, double>> random_interval_layout(Rng& rng) {
  const int n_pieces = rng.uniform_int(1, 3);
  std::vector<std::pair<double, double>> layout;
  double x = rng.uniform(-2.0, -1.0);
  for (int k = 0; k < n_pieces; ++k) {
    x += rng.uniform(0.05, 0.5);  // strictly positive gap
    const double len = rng.uniform(0.3, 1.2);
    layout.push_back({x, x + len});
    x += len;
  }
  return layout;
}

// Random masses over a fixed layout; densities stay in a bounded band, so the
// bounded-density assumption holds with C = density_bound().
inline PiecewiseDensity random_density_on(const std::vector<std::pair<double, double>>& layout,
                                          Rng& rng) {
  std::vector<double> masses(layout.size());
  double total = 0.0;
  for (auto& m : masses) {
    m = rng.uniform(0.5, 2.0);
    total += m;
  }
  for (auto& m : masses) m /= total;
  return PiecewiseDensity::from_masses(layout, masses);
}

}  // namespace salign::testutil
