#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "gmlab/common.hpp"
#include "gmlab/model.hpp"

namespace gm {

/// Parsed model ingredients. Nothing is validated beyond the syntax, so that a
/// failing model can still be reported check by check.
struct ModelConfig {
  MortalityRate mu;
  BirthRate beta;
  BirthFunction f;
  Real norm_tolerance = kClosedFormNormTolerance;
  /// Fixed-order rendering of every parsed value; the spec hash is taken over it.
  std::string canonical;

  ModelSpec build() const { return ModelSpec(mu, beta, f, norm_tolerance); }
  AssumptionReport checks() const { return check_assumptions(mu, beta, f, norm_tolerance); }
};

/// INI text with sections [mortality], [birth_rate], [birth_function] and an optional [model].
ModelConfig parse_model_config(const std::string& text);
ModelConfig load_model_config(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

}  // namespace gm
