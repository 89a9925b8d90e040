#pragma once

#include <random>
#include <vector>

#include "gmlab/profile.hpp"

namespace oracle {

// Sum of 1-4 random steps on [0, 4] with heights in (0, h_max].
inline gm::InitialDistribution random_steps(std::mt19937_64& rng, gm::Real h_max = 3) {
  std::uniform_real_distribution<double> pos(0, 4), height(0.01, static_cast<double>(h_max));
  std::uniform_int_distribution<int> count(1, 4);
  std::vector<gm::InitialDistribution::Piece> pieces;
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    double a = pos(rng), b = pos(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 0.05) b = a + 0.05;
    pieces.push_back({a, b, height(rng), 0, 0});
  }
  return gm::InitialDistribution(std::move(pieces));
}

}  // namespace oracle
