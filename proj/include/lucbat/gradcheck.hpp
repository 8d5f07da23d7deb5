#pragma once

#include <cstdint>

#include "lucbat/semloss.hpp"

namespace lucbat::semloss {

struct GradCheckConfig {
  std::uint64_t seed = 1;
  int d_model = 4;
  int d_hidden = 3;
  int vocab = 7;
  int pair_length = 6;  // maximum tokens per six-eight pair
  int stanzas = 1;
  double step = 1e-5;
  double tolerance = 1e-4;
  SemanticTerm term = SemanticTerm::Sum;
};

struct Instance {
  LossBlock block;
  AttentionParams attn;
  LstmParams lstm;
};

/// Seeded random problem. Pair lengths are drawn from
/// [ceil(pair_length / 2), pair_length]; the block's logits have one row
/// per token of all pairs.
Instance random_instance(const GradCheckConfig& config);

struct GradCheckReport {
  size_t parameters = 0;       // attention + LSTM entries checked
  size_t logits_checked = 0;
  double max_relative_error = 0.0;
  size_t worst_parameter = 0;  // flat index, logits entries follow the parameters
  double ce = 0.0;
  double mse = 0.0;
  bool passed = false;
};

/// |a - b| / max(|a|, |b|, 1e-6): relative for gradients of ordinary size
/// and absolute once both sides fall below 1e-6.
double relative_error(double analytic, double numeric);

/// Compares custom_loss gradients (parameters and logits) with central
/// differences of custom_loss_value.
GradCheckReport gradient_check(const GradCheckConfig& config);

}  // namespace lucbat::semloss
