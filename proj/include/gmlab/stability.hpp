#pragma once

#include <vector>

#include "gmlab/common.hpp"
#include "gmlab/model.hpp"

namespace gm {

enum class Stability { Stable, Unstable };

/// Laplace transform of the kernel, int beta(a) exp(-lambda a - H(a)) da, closed form.
Real kernel_transform(const ModelSpec& spec, Real lambda);

/// G(lambda) = f'(kappa_which) * kernel_transform(lambda); requires lambda > -mu_lower.
Real characteristic_value(const ModelSpec& spec, int which, Real lambda);

/// The positive real root of G = 1 at kappa1.
Real unstable_root(const ModelSpec& spec);

/// Real-axis criterion G(0) < 1. Throws Domain when |G(0) - 1| < 1e-12.
Stability classify_stability(const ModelSpec& spec, int which);

struct StabilityRow {
  int which;
  Real kappa;
  Real slope;
  Stability stability;
  Real root;  // NaN unless unstable
};

std::vector<StabilityRow> stability_table(const ModelSpec& spec);

}  // namespace gm
