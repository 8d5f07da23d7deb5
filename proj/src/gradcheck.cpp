#include "lucbat/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lucbat::semloss {
namespace {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}

  // [lo, hi) from the top 53 bits of the engine output.
  double operator()(double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 rng_;
};

Matrix random_matrix(Uniform& u, Eigen::Index rows, Eigen::Index cols, double scale) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(-scale, scale);
  return m;
}

}  // namespace

Instance random_instance(const GradCheckConfig& c) {
  if (c.d_model < 1 || c.d_hidden < 1 || c.vocab < 1 || c.pair_length < 1 ||
      c.stanzas < 1) {
    throw Error(ErrorCode::InvalidArgument, "gradient check dimensions must be positive");
  }
  Uniform u(c.seed);
  Instance inst;
  inst.attn.query = random_matrix(u, c.d_model, c.d_model, 0.5);
  inst.attn.key = random_matrix(u, c.d_model, c.d_model, 0.5);
  inst.attn.value = random_matrix(u, c.d_model, c.d_model, 0.5);
  for (int g = 0; g < 4; ++g) {
    inst.lstm.input[g] = random_matrix(u, c.d_hidden, c.d_model, 0.5);
    inst.lstm.recurrent[g] = random_matrix(u, c.d_hidden, c.d_hidden, 0.5);
    inst.lstm.bias[g] = random_matrix(u, c.d_hidden, 1, 0.5);
  }
  int tokens = 0;
  const int min_len = (c.pair_length + 1) / 2;
  for (int s = 0; s < c.stanzas; ++s) {
    StanzaEmbeddings stanza;
    for (int k = 0; k < 2; ++k) {
      const int len = u.integer(min_len, c.pair_length);
      stanza.pairs.push_back(random_matrix(u, len, c.d_model, 1.0));
      tokens += len;
    }
    inst.block.stanzas.push_back(std::move(stanza));
  }
  inst.block.logits = random_matrix(u, std::max(tokens, 2), c.vocab, 2.0);
  for (Eigen::Index i = 0; i + 1 < inst.block.logits.rows(); ++i) {
    inst.block.next_token_ids.push_back(u.integer(0, c.vocab - 1));
  }
  return inst;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport gradient_check(const GradCheckConfig& config) {
  Instance inst = random_instance(config);
  const LossBreakdown loss = custom_loss(inst.block, inst.attn, inst.lstm, config.term);

  GradCheckReport report;
  report.ce = loss.ce;
  report.mse = loss.mse;

  const Vector analytic = loss.gradients();
  const Vector base = flatten(inst.attn, inst.lstm);
  report.parameters = static_cast<size_t>(base.size());

  auto note = [&](double a, double n, size_t index) {
    const double err = relative_error(a, n);
    if (err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_parameter = index;
    }
  };

  AttentionParams attn = inst.attn;
  LstmParams lstm = inst.lstm;
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    Vector probe = base;
    probe(k) = base(k) + config.step;
    unflatten(probe, attn, lstm);
    const double up = custom_loss_value(inst.block, attn, lstm, config.term);
    probe(k) = base(k) - config.step;
    unflatten(probe, attn, lstm);
    const double down = custom_loss_value(inst.block, attn, lstm, config.term);
    note(analytic(k), (up - down) / (2.0 * config.step), static_cast<size_t>(k));
  }

  LossBlock block = inst.block;
  for (Eigen::Index j = 0; j < block.logits.cols(); ++j) {
    for (Eigen::Index i = 0; i < block.logits.rows(); ++i) {
      const double orig = block.logits(i, j);
      block.logits(i, j) = orig + config.step;
      const double up = ce_loss(block.logits, block.next_token_ids);
      block.logits(i, j) = orig - config.step;
      const double down = ce_loss(block.logits, block.next_token_ids);
      block.logits(i, j) = orig;
      note(loss.logits_grad(i, j), (up - down) / (2.0 * config.step),
           report.parameters + report.logits_checked);
      ++report.logits_checked;
    }
  }

  report.passed = report.max_relative_error <= config.tolerance;
  return report;
}

}  // namespace lucbat::semloss
