#include <doctest.h>

#include <cmath>
#include <random>

#include "lucbat/gradcheck.hpp"
#include "lucbat/semloss.hpp"

using namespace lucbat;
using namespace lucbat::semloss;

namespace {

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
  return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Attention written out one scalar at a time.
Matrix naive_attention(const Matrix& x, const AttentionParams& p) {
  const Matrix q = x * p.query, k = x * p.key, v = x * p.value;
  const int m = static_cast<int>(x.rows());
  const double scale = std::sqrt(static_cast<double>(x.cols()));
  Matrix out = Matrix::Zero(m, v.cols());
  for (int i = 0; i < m; ++i) {
    std::vector<double> w(m);
    double z = 0.0;
    for (int j = 0; j < m; ++j) {
      w[j] = std::exp(q.row(i).dot(k.row(j)) / scale);
      z += w[j];
    }
    for (int j = 0; j < m; ++j) out.row(i) += (w[j] / z) * v.row(j);
  }
  return out;
}

Vector naive_lstm_last(const Matrix& x, const LstmParams& p) {
  const int h = p.d_hidden();
  Vector hs = Vector::Zero(h), cs = Vector::Zero(h);
  for (int t = 0; t < x.rows(); ++t) {
    Vector xt = x.row(t).transpose();
    Vector nh(h), nc(h);
    for (int r = 0; r < h; ++r) {
      auto pre = [&](Gate g) {
        return p.input[g].row(r).dot(xt) + p.recurrent[g].row(r).dot(hs) + p.bias[g](r);
      };
      const double f = sigmoid(pre(kForget)), i = sigmoid(pre(kInput)),
                   o = sigmoid(pre(kOutput)), g = std::tanh(pre(kCell));
      nc(r) = f * cs(r) + i * g;
      nh(r) = o * std::tanh(nc(r));
    }
    hs = nh;
    cs = nc;
  }
  return hs;
}

double naive_ce(const Matrix& logits, const std::vector<int>& ids) {
  double total = 0.0;
  for (size_t i = 0; i < ids.size(); ++i) {
    double z = 0.0;
    for (int v = 0; v < logits.cols(); ++v) z += std::exp(logits(i, v));
    total += -std::log(std::exp(logits(i, ids[i])) / z);
  }
  return total / ids.size();
}

ErrorCode ce_error(const Matrix& logits, const std::vector<int>& ids) {
  try {
    ce_loss(logits, ids);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

LstmParams random_lstm(std::mt19937_64& rng, int d_in, int d_hidden) {
  LstmParams p = LstmParams::zeros(d_in, d_hidden);
  for (int g = 0; g < 4; ++g) {
    p.input[g] = random_matrix(rng, d_hidden, d_in, 0.5);
    p.recurrent[g] = random_matrix(rng, d_hidden, d_hidden, 0.5);
    p.bias[g] = random_matrix(rng, d_hidden, 1, 0.5).col(0);
  }
  return p;
}

AttentionParams random_attention(std::mt19937_64& rng, int d) {
  return {random_matrix(rng, d, d, 0.5), random_matrix(rng, d, d, 0.5),
          random_matrix(rng, d, d, 0.5)};
}

}  // namespace

TEST_CASE("attention over a single token is x Wv") {
  std::mt19937_64 rng(1);
  auto p = random_attention(rng, 4);
  Matrix x = random_matrix(rng, 1, 4);
  CHECK((self_attention(x, p) - x * p.value).norm() < 1e-12);
}

TEST_CASE("zero query and key give the mean of the values") {
  std::mt19937_64 rng(2);
  auto p = AttentionParams::zeros(3);
  p.value = Matrix::Identity(3, 3);
  Matrix x = random_matrix(rng, 5, 3);
  Matrix out = self_attention(x, p);
  Eigen::RowVectorXd mean = x.colwise().mean();
  for (int i = 0; i < 5; ++i) CHECK((out.row(i) - mean).norm() < 1e-12);
}

TEST_CASE("attention matches a scalar oracle and is row-stochastic") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 5, m = 1 + trial % 7;
    auto p = random_attention(rng, d);
    Matrix x = random_matrix(rng, m, d);
    CHECK((self_attention(x, p) - naive_attention(x, p)).norm() < 1e-10);
    for (double s : {1.0, 10.0, 1000.0}) {
      AttentionParams scaled = p;
      scaled.query *= s;
      Matrix w = attention_weights(x, scaled);
      CHECK(w.minCoeff() >= 0.0);
      for (int i = 0; i < m; ++i) CHECK(std::abs(w.row(i).sum() - 1.0) < 1e-12);
      CHECK(w.allFinite());
    }
  }
}

TEST_CASE("zero LSTM parameters keep zero states") {
  std::mt19937_64 rng(4);
  auto states = lstm_forward(random_matrix(rng, 6, 3), LstmParams::zeros(3, 2));
  REQUIRE(states.hidden.size() == 6);
  for (const auto& h : states.hidden) CHECK(h.norm() == 0.0);
  for (const auto& c : states.cell) CHECK(c.norm() == 0.0);
}

TEST_CASE("hand-computed single LSTM step") {
  auto p = LstmParams::zeros(2, 2);
  p.input[kCell] = Matrix::Identity(2, 2);  // g = tanh(x)
  Matrix x(1, 2);
  x << 1.0, -2.0;
  auto s = lstm_forward(x, p);
  // All gates sit at sigmoid(0) = 0.5, c = 0.5 * tanh(x), h = 0.5 * tanh(c).
  for (int r = 0; r < 2; ++r) {
    const double c = 0.5 * std::tanh(x(0, r));
    CHECK(s.cell[0](r) == doctest::Approx(c).epsilon(1e-14));
    CHECK(s.hidden[0](r) == doctest::Approx(0.5 * std::tanh(c)).epsilon(1e-14));
  }
}

TEST_CASE("LSTM state bounds and saturated gates") {
  std::mt19937_64 rng(6);
  auto p = random_lstm(rng, 3, 4);
  auto s = lstm_forward(random_matrix(rng, 10, 3, 3.0), p);
  for (size_t t = 0; t < s.hidden.size(); ++t) {
    CHECK(s.hidden[t].cwiseAbs().maxCoeff() < 1.0);
    CHECK(s.cell[t].cwiseAbs().maxCoeff() <= static_cast<double>(t + 1));
  }
  // Forget gate open, input gate shut: the cell never changes.
  auto frozen = random_lstm(rng, 3, 4);
  frozen.bias[kForget] = Vector::Constant(4, 50.0);
  frozen.bias[kInput] = Vector::Constant(4, -50.0);
  for (int g : {kForget, kInput}) {
    frozen.input[g].setZero();
    frozen.recurrent[g].setZero();
  }
  Vector c0 = random_matrix(rng, 4, 1).col(0);
  Vector h0 = Vector::Zero(4);
  auto fs = lstm_forward(random_matrix(rng, 5, 3), frozen, h0, c0);
  for (const auto& c : fs.cell) CHECK((c - c0).norm() < 1e-12);
}

TEST_CASE("contextual vector is the last LSTM state over attention") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto attn = random_attention(rng, 4);
    auto lstm = random_lstm(rng, 4, 3);
    Matrix x = random_matrix(rng, 2 + trial, 4);
    Vector oracle = naive_lstm_last(naive_attention(x, attn), lstm);
    CHECK((contextual_vector(x, attn, lstm) - oracle).norm() < 1e-10);
  }
}

TEST_CASE("cross-entropy reference values") {
  const int v = 8;
  Matrix uniform = Matrix::Zero(5, v);
  std::vector<int> ids = {0, 3, 7, 1};
  CHECK(ce_loss(uniform, ids) == doctest::Approx(std::log(8.0)).epsilon(1e-12));

  // A +20 margin gives ln(1 + (V-1) e^-20): below 1e-8 only for V <= 5.
  Matrix confident = Matrix::Zero(5, v);
  for (size_t i = 0; i < ids.size(); ++i) confident(i, ids[i]) = 20.0;
  CHECK(ce_loss(confident, ids) ==
        doctest::Approx(std::log1p(7.0 * std::exp(-20.0))).epsilon(1e-12));
  Matrix small = Matrix::Zero(5, 4);
  std::vector<int> small_ids = {0, 3, 2, 1};
  for (size_t i = 0; i < small_ids.size(); ++i) small(i, small_ids[i]) = 20.0;
  CHECK(ce_loss(small, small_ids) < 1e-8);

  Matrix huge = Matrix::Constant(3, 4, 1000.0);
  std::vector<int> two = {1, 2};
  CHECK(ce_loss(huge, two) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("cross-entropy matches a naive oracle") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 9, v = 2 + trial % 13;
    Matrix logits = random_matrix(rng, m, v, 3.0);
    std::vector<int> ids(m - 1);
    for (auto& id : ids) id = static_cast<int>(rng() % v);
    CHECK(std::abs(ce_loss(logits, ids) - naive_ce(logits, ids)) < 1e-10);
  }
}

TEST_CASE("cross-entropy errors") {
  std::vector<int> none;
  CHECK(ce_error(Matrix::Zero(1, 4), none) == ErrorCode::DegenerateSequence);
  std::vector<int> short_ids = {1};
  CHECK(ce_error(Matrix::Zero(4, 4), short_ids) == ErrorCode::ShapeMismatch);
  std::vector<int> bad = {1, 4};
  CHECK(ce_error(Matrix::Zero(3, 4), bad) == ErrorCode::IdOutOfRange);
  std::vector<int> negative = {-1, 0};
  CHECK(ce_error(Matrix::Zero(3, 4), negative) == ErrorCode::IdOutOfRange);
}

TEST_CASE("semantic term values") {
  std::mt19937_64 rng(9);
  auto attn = random_attention(rng, 3);
  auto lstm = random_lstm(rng, 3, 2);
  Matrix pair = random_matrix(rng, 4, 3);

  LossBlock block;
  block.logits = Matrix::Zero(3, 5);
  block.next_token_ids = {0, 1};
  block.stanzas.push_back({{pair, pair}});
  auto same = custom_loss(block, attn, lstm);
  CHECK(same.mse == 0.0);
  CHECK(same.total == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  // With zero weights and a cell bias, h = sigmoid(0) * tanh(c) is fixed per
  // pair length, so E_prev and E_next can be set by hand.
  auto fixed = LstmParams::zeros(3, 2);
  fixed.bias[kForget] = Vector::Constant(2, -50.0);  // forget gate closed
  fixed.bias[kInput] = Vector::Constant(2, 50.0);
  fixed.bias[kOutput] = Vector::Constant(2, 50.0);
  fixed.bias[kCell] = Vector::Constant(2, std::atanh(0.5));
  // c = 0.5 at every step for both pairs, so the distance is zero.
  block.stanzas[0] = {{pair, random_matrix(rng, 6, 3)}};
  CHECK(custom_loss(block, attn, fixed).mse < 1e-20);
  // Flip one pair by giving its embeddings a column that drives the cell.
  fixed.input[kCell] = Matrix::Zero(2, 3);
  fixed.input[kCell].col(0).setConstant(100.0);
  Matrix pos = Matrix::Zero(2, 3), neg = Matrix::Zero(2, 3);
  pos(1, 0) = 1.0;
  neg(1, 0) = -1.0;
  auto zero_attn = AttentionParams::zeros(3);
  zero_attn.value = Matrix::Identity(3, 3);
  block.stanzas[0] = {{pos, neg}};
  // Attention averages the rows: +-0.5 -> cell = tanh(+-50 + atanh 0.5) = +-1.
  auto r = custom_loss(block, zero_attn, fixed);
  const double h = std::tanh(1.0);
  CHECK(r.mse == doctest::Approx(2 * (2 * h) * (2 * h)).epsilon(1e-10));
  auto mean = custom_loss(block, zero_attn, fixed, SemanticTerm::Mean);
  CHECK(mean.mse == doctest::Approx(r.mse / 2).epsilon(1e-12));
}

TEST_CASE("stanzas need exactly two pairs") {
  LossBlock block;
  block.logits = Matrix::Zero(3, 5);
  block.next_token_ids = {0, 1};
  block.stanzas.push_back({{Matrix::Zero(2, 3)}});
  try {
    custom_loss(block, AttentionParams::zeros(3), LstmParams::zeros(3, 2));
    FAIL("expected MissingPair");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingPair);
  }
}

TEST_CASE("value-only pass agrees with the full pass") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GradCheckConfig cfg;
    cfg.seed = seed;
    cfg.stanzas = 2;
    auto inst = random_instance(cfg);
    auto full = custom_loss(inst.block, inst.attn, inst.lstm);
    CHECK(full.total == doctest::Approx(custom_loss_value(inst.block, inst.attn, inst.lstm))
                            .epsilon(1e-14));
    CHECK(full.total == doctest::Approx(full.ce + full.mse).epsilon(1e-14));
  }
}

TEST_CASE("flatten round trip") {
  std::mt19937_64 rng(10);
  auto attn = random_attention(rng, 4);
  auto lstm = random_lstm(rng, 4, 3);
  Vector flat = flatten(attn, lstm);
  CHECK(static_cast<size_t>(flat.size()) == parameter_count(4, 3));
  CHECK(parameter_count(4, 3) == 3 * 16 + 4 * (12 + 9 + 3));
  auto a2 = AttentionParams::zeros(4);
  auto l2 = LstmParams::zeros(4, 3);
  unflatten(flat, a2, l2);
  CHECK((flatten(a2, l2) - flat).norm() == 0.0);
  CHECK(flat(0) == attn.query(0, 0));
  CHECK(flat(1) == attn.query(1, 0));  // column-major
}

TEST_CASE("relative error") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-9, 0.0) == doctest::Approx(1e-3));
}

TEST_CASE("analytic gradients match finite differences") {
  int passed = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GradCheckConfig cfg;
    cfg.seed = seed;
    cfg.d_model = 5;
    cfg.d_hidden = 4;
    cfg.vocab = 9;
    cfg.stanzas = 1 + seed % 3;
    cfg.term = seed % 2 ? SemanticTerm::Sum : SemanticTerm::Mean;
    auto r = gradient_check(cfg);
    CAPTURE(seed);
    CAPTURE(r.max_relative_error);
    CHECK(r.parameters == parameter_count(5, 4));
    CHECK(r.logits_checked > 0);
    if (r.passed) ++passed;
  }
  CHECK(passed == 20);
}
