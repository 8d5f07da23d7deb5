#include "lucbat/semloss.hpp"

#include <cmath>
#include <string>

namespace lucbat::semloss {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

void check_attention(const Matrix& x, const AttentionParams& p) {
  const auto d = p.query.rows();
  require(d > 0, "attention d_model must be positive");
  require(p.query.cols() == d && p.key.rows() == d && p.key.cols() == d &&
              p.value.rows() == d && p.value.cols() == d,
          "attention projections must be square d_model x d_model");
  require(x.rows() > 0, "attention input sequence is empty");
  require(x.cols() == d, "attention input has " + std::to_string(x.cols()) +
                             " columns, d_model is " + std::to_string(d));
}

void check_lstm(const LstmParams& p) {
  const auto h = p.input[0].rows();
  const auto in = p.input[0].cols();
  require(h > 0 && in > 0, "LSTM dimensions must be positive");
  for (int g = 0; g < 4; ++g) {
    require(p.input[g].rows() == h && p.input[g].cols() == in,
            "LSTM input weights disagree across gates");
    require(p.recurrent[g].rows() == h && p.recurrent[g].cols() == h,
            "LSTM recurrent weights must be d_hidden x d_hidden");
    require(p.bias[g].size() == h, "LSTM bias has wrong length");
  }
}

// Row-wise stabilized softmax.
Matrix softmax_rows(const Matrix& s) {
  Matrix out(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    out.row(i) = (s.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

struct AttentionCache {
  Matrix q, k, v, weights, out;
};

AttentionCache attention_forward(const Matrix& x, const AttentionParams& p) {
  check_attention(x, p);
  AttentionCache c;
  c.q = x * p.query;
  c.k = x * p.key;
  c.v = x * p.value;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.d_model()));
  c.weights = softmax_rows((c.q * c.k.transpose()) * scale);
  c.out = c.weights * c.v;
  return c;
}

void attention_backward(const Matrix& x, const AttentionParams& p,
                        const AttentionCache& c, const Matrix& d_out,
                        AttentionParams& grad) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.d_model()));
  const Matrix d_weights = d_out * c.v.transpose();
  const Matrix d_v = c.weights.transpose() * d_out;
  // Softmax Jacobian, row by row: dS = A .* (dA - rowsum(dA .* A)).
  Matrix d_scores(c.weights.rows(), c.weights.cols());
  for (Eigen::Index i = 0; i < c.weights.rows(); ++i) {
    const double dot = d_weights.row(i).dot(c.weights.row(i));
    d_scores.row(i) =
        (c.weights.row(i).array() * (d_weights.row(i).array() - dot)).matrix();
  }
  d_scores *= scale;
  const Matrix d_q = d_scores * c.k;
  const Matrix d_k = d_scores.transpose() * c.q;
  grad.query += x.transpose() * d_q;
  grad.key += x.transpose() * d_k;
  grad.value += x.transpose() * d_v;
}

struct LstmTrace {
  std::vector<Vector> h;  // h_0 .. h_T
  std::vector<Vector> c;  // c_0 .. c_T
  std::vector<std::array<Vector, 4>> gates;  // activations for t = 1..T
};

LstmTrace lstm_trace(const Matrix& x, const LstmParams& p, const Vector& h0,
                     const Vector& c0) {
  check_lstm(p);
  const auto dh = p.d_hidden();
  require(x.cols() == p.d_in(), "LSTM input has " + std::to_string(x.cols()) +
                                    " columns, expected " + std::to_string(p.d_in()));
  require(h0.size() == 0 || h0.size() == dh, "h0 has wrong length");
  require(c0.size() == 0 || c0.size() == dh, "c0 has wrong length");

  LstmTrace tr;
  tr.h.push_back(h0.size() == 0 ? Vector::Zero(dh) : h0);
  tr.c.push_back(c0.size() == 0 ? Vector::Zero(dh) : c0);
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const Vector xt = x.row(t).transpose();
    const Vector& h_prev = tr.h.back();
    std::array<Vector, 4> a;
    for (int g = 0; g < 4; ++g) {
      Vector z = p.input[g] * xt + p.recurrent[g] * h_prev + p.bias[g];
      a[g] = g == kCell ? Vector(z.array().tanh()) : Vector(z.unaryExpr(&sigmoid));
    }
    Vector c = a[kForget].cwiseProduct(tr.c.back()) + a[kInput].cwiseProduct(a[kCell]);
    Vector h = a[kOutput].cwiseProduct(Vector(c.array().tanh()));
    tr.c.push_back(std::move(c));
    tr.h.push_back(std::move(h));
    tr.gates.push_back(std::move(a));
  }
  return tr;
}

// Backpropagates dL/dh_T through the recursion. Returns dL/dx (T x d_in).
Matrix lstm_backward(const Matrix& x, const LstmParams& p, const LstmTrace& tr,
                     const Vector& d_h_last, LstmParams& grad) {
  const Eigen::Index steps = x.rows();
  Matrix d_x = Matrix::Zero(x.rows(), x.cols());
  Vector d_h = d_h_last;
  Vector d_c = Vector::Zero(p.d_hidden());
  for (Eigen::Index t = steps; t-- > 0;) {
    const auto& a = tr.gates[static_cast<size_t>(t)];
    const Vector& c = tr.c[static_cast<size_t>(t + 1)];
    const Vector& c_prev = tr.c[static_cast<size_t>(t)];
    const Vector& h_prev = tr.h[static_cast<size_t>(t)];
    const Vector tanh_c = c.array().tanh();

    d_c += d_h.cwiseProduct(a[kOutput]).cwiseProduct(
        Vector((1.0 - tanh_c.array().square())));

    std::array<Vector, 4> d_z;
    d_z[kOutput] = d_h.cwiseProduct(tanh_c).cwiseProduct(
        Vector(a[kOutput].array() * (1.0 - a[kOutput].array())));
    d_z[kForget] = d_c.cwiseProduct(c_prev).cwiseProduct(
        Vector(a[kForget].array() * (1.0 - a[kForget].array())));
    d_z[kInput] = d_c.cwiseProduct(a[kCell]).cwiseProduct(
        Vector(a[kInput].array() * (1.0 - a[kInput].array())));
    d_z[kCell] = d_c.cwiseProduct(a[kInput]).cwiseProduct(
        Vector(1.0 - a[kCell].array().square()));

    const Vector xt = x.row(t).transpose();
    Vector d_h_prev = Vector::Zero(p.d_hidden());
    for (int g = 0; g < 4; ++g) {
      grad.input[g] += d_z[g] * xt.transpose();
      grad.recurrent[g] += d_z[g] * h_prev.transpose();
      grad.bias[g] += d_z[g];
      d_x.row(t) += (p.input[g].transpose() * d_z[g]).transpose();
      d_h_prev += p.recurrent[g].transpose() * d_z[g];
    }
    d_c = d_c.cwiseProduct(a[kForget]);
    d_h = d_h_prev;
  }
  return d_x;
}

void check_ce(const Matrix& logits, std::span<const int> ids) {
  if (logits.rows() < 2) {
    throw Error(ErrorCode::DegenerateSequence,
                "need at least 2 tokens, got " + std::to_string(logits.rows()));
  }
  require(logits.cols() > 0, "vocabulary is empty");
  require(static_cast<Eigen::Index>(ids.size()) == logits.rows() - 1,
          "expected " + std::to_string(logits.rows() - 1) + " next-token ids, got " +
              std::to_string(ids.size()));
  for (int id : ids) {
    if (id < 0 || id >= logits.cols()) {
      throw Error(ErrorCode::IdOutOfRange,
                  "token id " + std::to_string(id) + " outside [0, " +
                      std::to_string(logits.cols()) + ")");
    }
  }
}

void check_block(const LossBlock& block) {
  for (size_t s = 0; s < block.stanzas.size(); ++s) {
    if (block.stanzas[s].pairs.size() != 2) {
      throw Error(ErrorCode::MissingPair,
                  "stanza " + std::to_string(s) + " has " +
                      std::to_string(block.stanzas[s].pairs.size()) +
                      " verse pairs, expected 2");
    }
  }
}

double semantic_scale(SemanticTerm term, const LstmParams& lstm) {
  return term == SemanticTerm::Mean ? 1.0 / lstm.d_hidden() : 1.0;
}

void append(Vector& flat, Eigen::Index& at, const Matrix& m) {
  flat.segment(at, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
  at += m.size();
}

void extract(const Vector& flat, Eigen::Index& at, Matrix& m) {
  m = Eigen::Map<const Matrix>(flat.data() + at, m.rows(), m.cols());
  at += m.size();
}

}  // namespace

AttentionParams AttentionParams::zeros(int d_model) {
  return {Matrix::Zero(d_model, d_model), Matrix::Zero(d_model, d_model),
          Matrix::Zero(d_model, d_model)};
}

LstmParams LstmParams::zeros(int d_in, int d_hidden) {
  LstmParams p;
  for (int g = 0; g < 4; ++g) {
    p.input[g] = Matrix::Zero(d_hidden, d_in);
    p.recurrent[g] = Matrix::Zero(d_hidden, d_hidden);
    p.bias[g] = Vector::Zero(d_hidden);
  }
  return p;
}

Matrix attention_weights(const Matrix& x, const AttentionParams& params) {
  return attention_forward(x, params).weights;
}

Matrix self_attention(const Matrix& x, const AttentionParams& params) {
  return attention_forward(x, params).out;
}

LstmStates lstm_forward(const Matrix& x, const LstmParams& params,
                        const Vector& h0, const Vector& c0) {
  LstmTrace tr = lstm_trace(x, params, h0, c0);
  LstmStates out;
  out.hidden.assign(tr.h.begin() + 1, tr.h.end());
  out.cell.assign(tr.c.begin() + 1, tr.c.end());
  return out;
}

Vector contextual_vector(const Matrix& token_embeddings,
                         const AttentionParams& attn, const LstmParams& lstm) {
  Matrix attended = self_attention(token_embeddings, attn);
  return lstm_trace(attended, lstm, {}, {}).h.back();
}

double ce_loss(const Matrix& logits, std::span<const int> next_token_ids) {
  check_ce(logits, next_token_ids);
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, next_token_ids[static_cast<size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows() - 1);
}

Matrix ce_loss_gradient(const Matrix& logits, std::span<const int> next_token_ids) {
  check_ce(logits, next_token_ids);
  const double inv = 1.0 / static_cast<double>(logits.rows() - 1);
  Matrix grad = Matrix::Zero(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i + 1 < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd p = (logits.row(i).array() - m).exp().matrix();
    p /= p.sum();
    p(next_token_ids[static_cast<size_t>(i)]) -= 1.0;
    grad.row(i) = p * inv;
  }
  return grad;
}

Vector LossBreakdown::gradients() const { return flatten(attn_grad, lstm_grad); }

LossBreakdown custom_loss(const LossBlock& block, const AttentionParams& attn,
                          const LstmParams& lstm, SemanticTerm term) {
  check_block(block);
  check_lstm(lstm);
  require(lstm.d_in() == attn.d_model(),
          "LSTM input width must equal attention d_model");

  LossBreakdown out;
  out.ce = ce_loss(block.logits, block.next_token_ids);
  out.logits_grad = ce_loss_gradient(block.logits, block.next_token_ids);
  out.attn_grad = AttentionParams::zeros(attn.d_model());
  out.lstm_grad = LstmParams::zeros(lstm.d_in(), lstm.d_hidden());

  const double scale = semantic_scale(term, lstm);
  for (const auto& stanza : block.stanzas) {
    std::array<AttentionCache, 2> attended;
    std::array<LstmTrace, 2> traces;
    for (size_t k = 0; k < 2; ++k) {
      attended[k] = attention_forward(stanza.pairs[k], attn);
      traces[k] = lstm_trace(attended[k].out, lstm, {}, {});
    }
    const Vector& prev = traces[0].h.back();
    const Vector& next = traces[1].h.back();
    const Vector diff = prev - next;
    out.mse += scale * diff.squaredNorm();
    out.context.emplace_back(prev, next);

    const std::array<Vector, 2> d_context = {2.0 * scale * diff, -2.0 * scale * diff};
    for (size_t k = 0; k < 2; ++k) {
      Matrix d_attended = lstm_backward(attended[k].out, lstm, traces[k],
                                        d_context[k], out.lstm_grad);
      attention_backward(stanza.pairs[k], attn, attended[k], d_attended,
                         out.attn_grad);
    }
  }
  out.total = out.ce + out.mse;
  return out;
}

double custom_loss_value(const LossBlock& block, const AttentionParams& attn,
                         const LstmParams& lstm, SemanticTerm term) {
  check_block(block);
  check_lstm(lstm);
  require(lstm.d_in() == attn.d_model(),
          "LSTM input width must equal attention d_model");
  double mse = 0.0;
  const double scale = semantic_scale(term, lstm);
  for (const auto& stanza : block.stanzas) {
    const Vector diff = contextual_vector(stanza.pairs[0], attn, lstm) -
                        contextual_vector(stanza.pairs[1], attn, lstm);
    mse += scale * diff.squaredNorm();
  }
  return ce_loss(block.logits, block.next_token_ids) + mse;
}

size_t parameter_count(int d_model, int d_hidden) {
  const auto dm = static_cast<size_t>(d_model);
  const auto dh = static_cast<size_t>(d_hidden);
  return 3 * dm * dm + 4 * (dh * dm + dh * dh + dh);
}

Vector flatten(const AttentionParams& attn, const LstmParams& lstm) {
  Vector flat(static_cast<Eigen::Index>(parameter_count(attn.d_model(), lstm.d_hidden())));
  require(lstm.d_in() == attn.d_model(), "LSTM input width must equal d_model");
  Eigen::Index at = 0;
  append(flat, at, attn.query);
  append(flat, at, attn.key);
  append(flat, at, attn.value);
  for (int g = 0; g < 4; ++g) {
    append(flat, at, lstm.input[g]);
    append(flat, at, lstm.recurrent[g]);
    append(flat, at, lstm.bias[g]);
  }
  return flat;
}

void unflatten(const Vector& flat, AttentionParams& attn, LstmParams& lstm) {
  require(static_cast<size_t>(flat.size()) ==
              parameter_count(attn.d_model(), lstm.d_hidden()),
          "flat parameter vector has wrong length");
  Eigen::Index at = 0;
  extract(flat, at, attn.query);
  extract(flat, at, attn.key);
  extract(flat, at, attn.value);
  for (int g = 0; g < 4; ++g) {
    extract(flat, at, lstm.input[g]);
    extract(flat, at, lstm.recurrent[g]);
    Matrix b = lstm.bias[g];
    extract(flat, at, b);
    lstm.bias[g] = b;
  }
}

}  // namespace lucbat::semloss
