#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "apiseq/matrix.hpp"
#include "apiseq/random.hpp"

namespace apiseq::seq2seq {

/// A trainable tensor with its gradient accumulator and AdamW moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  bool frozen = false;
  bool decay = true;      // weight decay applies (matrices, not biases or norms)
  int encoder_layer = -1; // lowest layers are frozen first during fine-tuning
  bool encoder_embedding = false;
};

struct Var {
  int id = -1;
};

/// Row offsets of packed sequences: segment i spans rows [off[i], off[i+1]).
using Segments = std::vector<int>;

/// Reverse-mode automatic differentiation over row-major double matrices.
/// Nodes live for the tape's lifetime; backward() walks them in reverse
/// creation order and finally adds leaf gradients into Parameter::grad.
class Tape {
 public:
  /// `rng` drives dropout masks; dropout is the identity when not training.
  explicit Tape(bool training = false, Rng* rng = nullptr) : training_(training), rng_(rng) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool training() const { return training_; }

  Var constant(Matrix value);
  Var param(Parameter& p);

  const Matrix& value(Var v) const;
  double scalar(Var v) const { return value(v)(0, 0); }

  /// Seeds d(loss)/d(loss) = 1 and propagates to every parameter leaf.
  void backward(Var loss);

  Var matmul(Var a, Var b);     // a · b
  Var matmul_nt(Var a, Var b);  // a · bᵀ
  Var add(Var a, Var b);
  Var add_bias(Var x, Var bias);  // bias is 1×n, broadcast over rows
  Var mul(Var a, Var b);          // element-wise
  Var scale(Var a, double s);
  Var add_const(Var a, const Matrix& c);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var gather_rows(Var table, const std::vector<int>& ids);
  Var dropout(Var x, double p);
  Var concat_cols(Var a, Var b);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_rows(Var x, int begin, int count);
  Var mean_rows(Var x);
  Var softmax_rows(Var x);
  Var sum(Var x);

  /// Scaled dot-product attention over packed segments with `heads` heads
  /// (columns split evenly). With `causal`, query i of a segment only sees
  /// keys 0..i of the same segment (requires equal segment lengths).
  Var attention(Var q, Var k, Var v, const Segments& q_seg, const Segments& k_seg, int heads,
                bool causal);

  /// Additive attention for one sequence pair: scores e[t][j] = w · tanh(qp[t] + kp[j]),
  /// softmax over j, output row t = Σ_j α[t][j] · values[j].
  Var additive_attention(Var qp, Var kp, Var w, Var values);

  /// GRU over the rows of x from initial state h0 (1×H). wx: in×3H, wh: H×3H,
  /// gate order r, z, n. Returns T×H hidden states.
  Var gru(Var x, Var h0, Var wx, Var wh, Var bx, Var bh);

  /// Mean label-smoothed cross-entropy over rows whose target is >= 0.
  Var cross_entropy(Var logits, const std::vector<int>& targets, double smoothing);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix own;
    Parameter* param = nullptr;
    Matrix grad;
    bool needs_grad = false;
    std::function<void()> back;
  };

  Var push(Matrix value, bool needs_grad);
  bool needs(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
  const Matrix& grad_of(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].grad; }
  template <typename Expr>
  void accum(Var v, const Expr& g);

  std::deque<Node> nodes_;
  bool training_;
  Rng* rng_;
};

}  // namespace apiseq::seq2seq
