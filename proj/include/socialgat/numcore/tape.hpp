#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "socialgat/numcore/rng.hpp"
#include "socialgat/numcore/tensor.hpp"

namespace socialgat::num {

/// A trainable (or frozen) tensor that outlives any single tape. Gradients
/// from every tape it is bound to accumulate into `grad` until zero_grad().
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool decays = true)
      : name(std::move(name)), value(std::move(value)), grad(Tensor::zeros_like(this->value)),
        decays(decays) {}

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
  /// Receives the L2 penalty; false for biases.
  bool decays = true;
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
  std::uint32_t tape = 0;
};

enum class OpKind : std::uint8_t {
  kLeaf,
  kParam,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kMatMul,
  kMatVec,
  kVecMat,
  kAffine,
  kConcat,
  kSlice,
  kRow,
  kStack,
  kReshape,
  kSum,
  kDot,
  kSoftmax,
  kLeakyRelu,
  kSigmoid,
  kTanh,
  kDropout,
  kCrossEntropy,
  kSumSquares,
  kLstmCell,
};

const char* op_name(OpKind kind);

/// Records a computation as an ordered list of nodes and replays it in reverse
/// to obtain gradients. Inputs always precede their consumers, so node order
/// is a topological order by construction.
///
/// One tape per forward pass; tapes are cheap and not shared across threads.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Reject NaN/Inf in every op output. On by default in debug builds.
  void set_check_finite(bool on) noexcept { check_finite_ = on; }

  Var constant(Tensor value) { return leaf(std::move(value), false); }
  Var leaf(Tensor value, bool requires_grad);
  /// Binds a Parameter; backward() adds into param.grad when it is trainable.
  Var param(Parameter& p);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  /// vector + scalar broadcast.
  Var add_scalar(Var vec, Var scalar);
  Var matmul(Var a, Var b);
  Var matvec(Var m, Var x);
  /// x^T M for x [m], M [m x n] -> [n].
  Var vecmat(Var x, Var m);
  /// W x + b.
  Var affine(Var w, Var x, Var b);
  Var concat(Var a, Var b);
  Var concat(std::span<const Var> parts);
  Var slice(Var x, std::size_t begin, std::size_t length);
  Var row(Var m, std::size_t r);
  Var stack(std::span<const Var> rows);
  Var reshape(Var x, Shape shape);
  Var sum(Var x);
  Var dot(Var a, Var b);
  Var softmax(Var x);
  Var leaky_relu(Var x, double alpha);
  Var relu(Var x) { return leaky_relu(x, 0.0); }
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var dropout(Var x, double p, bool training, Rng& rng);
  Var cross_entropy(Var logits, std::size_t label);
  Var sum_squares(Var x);
  /// Packed gates [i f g o] (pre-activation, 4H) and previous cell state (H)
  /// -> [h ; c] (2H): c = s(f) c_prev + s(i) tanh(g), h = s(o) tanh(c).
  Var lstm_cell(Var gates, Var c_prev);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }
  OpKind kind(Var v) const;
  /// Smallest |input| over every leaky_relu / relu recorded so far (+inf
  /// when there is none). Finite differences are unreliable below it.
  double kink_margin() const;

  /// Reverse sweep from a scalar loss. Gradients accumulate (+=) across
  /// fan-out; afterwards grad(v) is available for every node that requires
  /// grad, and bound trainable Parameters have received their contribution.
  void backward(Var loss);
  /// Gradient of the last backward() loss w.r.t. v (zeros if v did not
  /// contribute).
  Tensor grad(Var v) const;

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::uint32_t in0 = 0, in1 = 0, in2 = 0;
    std::uint8_t arity = 0;
    std::vector<std::uint32_t> many;  // concat / stack inputs
    bool requires_grad = false;
    Tensor value{Shape::vector(0)};
    Tensor saved{Shape::vector(0)};
    double scalar = 0.0;
    std::size_t aux = 0;
    Parameter* param = nullptr;
  };

  const Node& node(Var v) const;
  Var push(Node n);
  void accumulate(std::uint32_t id, const Tensor& g);
  Tensor& grad_slot(std::uint32_t id);

  std::uint32_t serial_;
  bool check_finite_;
  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<bool> has_grad_;
};

}  // namespace socialgat::num
