#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lucbat/error.hpp"

// Semantic loss head: self-attention + LSTM contextual vectors, token
// cross-entropy, and the stanza-consistency penalty between the contextual
// vectors of a stanza's two six-eight pairs. Everything is double precision.
namespace lucbat::semloss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Single-head scaled dot-product attention. Sequences are row-major:
// one token per row, so Q = X * query.
struct AttentionParams {
  Matrix query;
  Matrix key;
  Matrix value;

  static AttentionParams zeros(int d_model);
  int d_model() const { return static_cast<int>(query.rows()); }
};

enum Gate { kForget = 0, kInput = 1, kOutput = 2, kCell = 3 };

// Per gate g: pre-activation = input[g] * x_t + recurrent[g] * h_{t-1} + bias[g].
struct LstmParams {
  std::array<Matrix, 4> input;      // d_hidden x d_in
  std::array<Matrix, 4> recurrent;  // d_hidden x d_hidden
  std::array<Vector, 4> bias;       // d_hidden

  static LstmParams zeros(int d_in, int d_hidden);
  int d_in() const { return static_cast<int>(input[0].cols()); }
  int d_hidden() const { return static_cast<int>(input[0].rows()); }
};

struct LstmStates {
  std::vector<Vector> hidden;  // h_1 .. h_T
  std::vector<Vector> cell;    // c_1 .. c_T
};

/// Row-stochastic attention weights softmax(Q K^T / sqrt(d_model)).
Matrix attention_weights(const Matrix& x, const AttentionParams& params);

/// softmax(Q K^T / sqrt(d_model)) * V, unmasked.
Matrix self_attention(const Matrix& x, const AttentionParams& params);

/// Runs the LSTM over the rows of `x`. Empty h0/c0 mean zero state.
LstmStates lstm_forward(const Matrix& x, const LstmParams& params,
                        const Vector& h0 = {}, const Vector& c0 = {});

/// Final hidden state of lstm_forward(self_attention(x)) from zero state.
Vector contextual_vector(const Matrix& token_embeddings,
                         const AttentionParams& attn, const LstmParams& lstm);

/// Mean over rows i < M-1 of -log softmax(logits.row(i))[next_token_ids[i]].
/// Ids are 0-based. Throws DegenerateSequence when M < 2, ShapeMismatch
/// when next_token_ids.size() != M - 1, IdOutOfRange for a bad id.
double ce_loss(const Matrix& logits, std::span<const int> next_token_ids);

/// Gradient of ce_loss with respect to the logits (last row is zero).
Matrix ce_loss_gradient(const Matrix& logits, std::span<const int> next_token_ids);

// One stanza: the token embeddings of each of its six-eight pairs.
// Exactly two pairs are required.
struct StanzaEmbeddings {
  std::vector<Matrix> pairs;
};

struct LossBlock {
  Matrix logits;                  // M x V
  std::vector<int> next_token_ids;  // M - 1 ids
  std::vector<StanzaEmbeddings> stanzas;
};

// How each stanza's squared distance is reduced over the hidden dimension.
enum class SemanticTerm { Sum, Mean };

struct LossBreakdown {
  double ce = 0.0;
  double mse = 0.0;
  double total = 0.0;
  AttentionParams attn_grad;
  LstmParams lstm_grad;
  Matrix logits_grad;
  // Contextual vectors per stanza: (E_prev, E_next).
  std::vector<std::pair<Vector, Vector>> context;

  /// attn_grad followed by lstm_grad in flatten() order.
  Vector gradients() const;
};

/// ce_loss over the block plus, per stanza, the squared distance between
/// the contextual vectors of its two pairs. Gradients are reverse-mode
/// through both terms, the LSTM recursion and the attention layer.
/// Throws MissingPair when a stanza does not have exactly two pairs.
LossBreakdown custom_loss(const LossBlock& block, const AttentionParams& attn,
                          const LstmParams& lstm,
                          SemanticTerm term = SemanticTerm::Sum);

/// Forward pass only; same value as custom_loss(...).total.
double custom_loss_value(const LossBlock& block, const AttentionParams& attn,
                         const LstmParams& lstm,
                         SemanticTerm term = SemanticTerm::Sum);

/// Parameter order: attention query, key, value; then for each gate
/// (forget, input, output, cell) input weights, recurrent weights, bias.
/// Matrices are flattened column-major.
Vector flatten(const AttentionParams& attn, const LstmParams& lstm);
void unflatten(const Vector& flat, AttentionParams& attn, LstmParams& lstm);
size_t parameter_count(int d_model, int d_hidden);

}  // namespace lucbat::semloss
