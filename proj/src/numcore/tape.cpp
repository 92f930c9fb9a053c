#include "socialgat/numcore/tape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "socialgat/errors.hpp"

namespace socialgat::num {
namespace {

std::atomic<std::uint32_t> g_next_serial{1};

double sigmoid_of(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.shape().rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     " operand, got shape " + t.shape().str());
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                     b.shape().str());
  }
}

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kParam: return "param";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kMatVec: return "matvec";
    case OpKind::kVecMat: return "vecmat";
    case OpKind::kAffine: return "affine";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kRow: return "row";
    case OpKind::kStack: return "stack";
    case OpKind::kReshape: return "reshape";
    case OpKind::kSum: return "sum";
    case OpKind::kDot: return "dot";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLeakyRelu: return "leaky_relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kDropout: return "dropout";
    case OpKind::kCrossEntropy: return "cross_entropy";
    case OpKind::kSumSquares: return "sum_squares";
    case OpKind::kLstmCell: return "lstm_cell";
  }
  return "?";
}

Tape::Tape()
    : serial_(g_next_serial.fetch_add(1)),
#ifdef NDEBUG
      check_finite_(false)
#else
      check_finite_(true)
#endif
{
  nodes_.reserve(256);
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != serial_ || v.id >= nodes_.size()) {
    throw CorruptTapeError("variable " + std::to_string(v.id) +
                           " does not belong to this tape (size " +
                           std::to_string(nodes_.size()) + ")");
  }
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }
bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }
OpKind Tape::kind(Var v) const { return node(v).kind; }

Var Tape::push(Node n) {
  if (check_finite_ && !n.value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op_name(n.kind));
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1), serial_};
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.kind = OpKind::kParam;
  n.value = p.value;
  n.requires_grad = p.trainable;
  n.param = &p;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same(na.value, nb.value, "add");
  Node n;
  n.kind = OpKind::kAdd;
  n.in0 = a.id, n.in1 = b.id, n.arity = 2;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.value;
  n.value.axpy(1.0, nb.value);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same(na.value, nb.value, "sub");
  Node n;
  n.kind = OpKind::kSub;
  n.in0 = a.id, n.in1 = b.id, n.arity = 2;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.value;
  n.value.axpy(-1.0, nb.value);
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same(na.value, nb.value, "mul");
  Node n;
  n.kind = OpKind::kMul;
  n.in0 = a.id, n.in1 = b.id, n.arity = 2;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = na.value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= nb.value[i];
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  const Node& na = node(a);
  Node n;
  n.kind = OpKind::kScale;
  n.in0 = a.id, n.arity = 1;
  n.scalar = c;
  n.requires_grad = na.requires_grad;
  n.value = na.value;
  for (double& x : n.value.data()) x *= c;
  return push(std::move(n));
}

Var Tape::add_scalar(Var vec, Var scalar) {
  const Node& nv = node(vec);
  const Node& ns = node(scalar);
  if (ns.value.size() != 1) throw ShapeError("add_scalar: second operand must be a scalar");
  Node n;
  n.kind = OpKind::kAddScalar;
  n.in0 = vec.id, n.in1 = scalar.id, n.arity = 2;
  n.requires_grad = nv.requires_grad || ns.requires_grad;
  n.value = nv.value;
  const double s = ns.value[0];
  for (double& x : n.value.data()) x += s;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_rank(na.value, 2, "matmul");
  require_rank(nb.value, 2, "matmul");
  const std::size_t m = na.value.shape()[0], k = na.value.shape()[1], c = nb.value.shape()[1];
  if (nb.value.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions differ, " + na.value.shape().str() + " x " +
                     nb.value.shape().str());
  }
  Node n;
  n.kind = OpKind::kMatMul;
  n.in0 = a.id, n.in1 = b.id, n.arity = 2;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  n.value = Tensor(Shape::matrix(m, c));
  const double* A = na.value.data().data();
  const double* B = nb.value.data().data();
  double* C = n.value.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < c; ++j) C[i * c + j] += aip * B[p * c + j];
    }
  }
  return push(std::move(n));
}

Var Tape::matvec(Var m, Var x) {
  const Node& nm = node(m);
  const Node& nx = node(x);
  require_rank(nm.value, 2, "matvec");
  require_rank(nx.value, 1, "matvec");
  const std::size_t rows = nm.value.shape()[0], cols = nm.value.shape()[1];
  if (nx.value.size() != cols) {
    throw ShapeError("matvec: dimension mismatch, " + nm.value.shape().str() + " x " +
                     nx.value.shape().str());
  }
  Node n;
  n.kind = OpKind::kMatVec;
  n.in0 = m.id, n.in1 = x.id, n.arity = 2;
  n.requires_grad = nm.requires_grad || nx.requires_grad;
  n.value = Tensor(Shape::vector(rows));
  const double* M = nm.value.data().data();
  const double* X = nx.value.data().data();
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += M[i * cols + j] * X[j];
    n.value[i] = acc;
  }
  return push(std::move(n));
}

Var Tape::vecmat(Var x, Var m) {
  const Node& nx = node(x);
  const Node& nm = node(m);
  require_rank(nm.value, 2, "vecmat");
  require_rank(nx.value, 1, "vecmat");
  const std::size_t rows = nm.value.shape()[0], cols = nm.value.shape()[1];
  if (nx.value.size() != rows) {
    throw ShapeError("vecmat: dimension mismatch, " + nx.value.shape().str() + " x " +
                     nm.value.shape().str());
  }
  Node n;
  n.kind = OpKind::kVecMat;
  n.in0 = x.id, n.in1 = m.id, n.arity = 2;
  n.requires_grad = nm.requires_grad || nx.requires_grad;
  n.value = Tensor(Shape::vector(cols));
  const double* M = nm.value.data().data();
  const double* X = nx.value.data().data();
  double* Y = n.value.data().data();
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = X[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) Y[j] += xi * M[i * cols + j];
  }
  return push(std::move(n));
}

Var Tape::affine(Var w, Var x, Var b) {
  const Node& nw = node(w);
  const Node& nx = node(x);
  const Node& nb = node(b);
  require_rank(nw.value, 2, "affine");
  require_rank(nx.value, 1, "affine");
  const std::size_t rows = nw.value.shape()[0], cols = nw.value.shape()[1];
  if (nx.value.size() != cols || nb.value.size() != rows) {
    throw ShapeError("affine: dimension mismatch, W " + nw.value.shape().str() + ", x " +
                     nx.value.shape().str() + ", b " + nb.value.shape().str());
  }
  Node n;
  n.kind = OpKind::kAffine;
  n.in0 = w.id, n.in1 = x.id, n.in2 = b.id, n.arity = 3;
  n.requires_grad = nw.requires_grad || nx.requires_grad || nb.requires_grad;
  n.value = Tensor(Shape::vector(rows));
  const double* W = nw.value.data().data();
  const double* X = nx.value.data().data();
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = nb.value[i];
    for (std::size_t j = 0; j < cols; ++j) acc += W[i * cols + j] * X[j];
    n.value[i] = acc;
  }
  return push(std::move(n));
}

Var Tape::concat(Var a, Var b) {
  const Var parts[2] = {a, b};
  return concat(parts);
}

Var Tape::concat(std::span<const Var> parts) {
  Node n;
  n.kind = OpKind::kConcat;
  std::size_t total = 0;
  for (Var p : parts) {
    const Node& np = node(p);
    require_rank(np.value, 1, "concat");
    total += np.value.size();
    n.requires_grad = n.requires_grad || np.requires_grad;
    n.many.push_back(p.id);
  }
  std::vector<double> out;
  out.reserve(total);
  for (Var p : parts) {
    const auto d = node(p).value.data();
    out.insert(out.end(), d.begin(), d.end());
  }
  n.value = Tensor::vector(std::move(out));
  return push(std::move(n));
}

Var Tape::slice(Var x, std::size_t begin, std::size_t length) {
  const Node& nx = node(x);
  require_rank(nx.value, 1, "slice");
  if (begin + length > nx.value.size()) {
    throw IndexError("slice [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                     ") out of range for length " + std::to_string(nx.value.size()));
  }
  Node n;
  n.kind = OpKind::kSlice;
  n.in0 = x.id, n.arity = 1;
  n.aux = begin;
  n.requires_grad = nx.requires_grad;
  const auto d = nx.value.data();
  n.value = Tensor::vector(std::vector<double>(d.begin() + begin, d.begin() + begin + length));
  return push(std::move(n));
}

Var Tape::row(Var m, std::size_t r) {
  const Node& nm = node(m);
  require_rank(nm.value, 2, "row");
  const std::size_t rows = nm.value.shape()[0], cols = nm.value.shape()[1];
  if (r >= rows) throw IndexError("row " + std::to_string(r) + " of " + nm.value.shape().str());
  Node n;
  n.kind = OpKind::kRow;
  n.in0 = m.id, n.arity = 1;
  n.aux = r;
  n.requires_grad = nm.requires_grad;
  const auto d = nm.value.data();
  n.value = Tensor::vector(std::vector<double>(d.begin() + r * cols, d.begin() + (r + 1) * cols));
  return push(std::move(n));
}

Var Tape::stack(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack: no rows");
  Node n;
  n.kind = OpKind::kStack;
  const std::size_t cols = node(rows[0]).value.size();
  std::vector<double> out;
  out.reserve(cols * rows.size());
  for (Var r : rows) {
    const Node& nr = node(r);
    require_rank(nr.value, 1, "stack");
    if (nr.value.size() != cols) throw ShapeError("stack: rows of unequal length");
    n.requires_grad = n.requires_grad || nr.requires_grad;
    n.many.push_back(r.id);
    out.insert(out.end(), nr.value.data().begin(), nr.value.data().end());
  }
  n.value = Tensor::matrix(rows.size(), cols, std::move(out));
  return push(std::move(n));
}

Var Tape::reshape(Var x, Shape shape) {
  const Node& nx = node(x);
  Node n;
  n.kind = OpKind::kReshape;
  n.in0 = x.id, n.arity = 1;
  n.requires_grad = nx.requires_grad;
  n.value = nx.value.reshaped(shape);
  return push(std::move(n));
}

Var Tape::sum(Var x) {
  const Node& nx = node(x);
  Node n;
  n.kind = OpKind::kSum;
  n.in0 = x.id, n.arity = 1;
  n.requires_grad = nx.requires_grad;
  double acc = 0.0;
  for (double v : nx.value.data()) acc += v;
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

Var Tape::dot(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require_same(na.value, nb.value, "dot");
  Node n;
  n.kind = OpKind::kDot;
  n.in0 = a.id, n.in1 = b.id, n.arity = 2;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  double acc = 0.0;
  for (std::size_t i = 0; i < na.value.size(); ++i) acc += na.value[i] * nb.value[i];
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

Var Tape::softmax(Var x) {
  const Node& nx = node(x);
  require_rank(nx.value, 1, "softmax");
  if (nx.value.size() == 0) throw ShapeError("softmax of an empty vector");
  Node n;
  n.kind = OpKind::kSoftmax;
  n.in0 = x.id, n.arity = 1;
  n.requires_grad = nx.requires_grad;
  n.value = nx.value;
  const auto d = n.value.data();
  const double mx = *std::max_element(d.begin(), d.end());
  double z = 0.0;
  for (double& v : d) z += (v = std::exp(v - mx));
  for (double& v : d) v /= z;
  return push(std::move(n));
}

Var Tape::leaky_relu(Var x, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ParameterError("leaky_relu alpha must lie in [0, 1), got " + std::to_string(alpha));
  }
  const Node& nx = node(x);
  Node n;
  n.kind = OpKind::kLeakyRelu;
  n.in0 = x.id, n.arity = 1;
  n.scalar = alpha;
  n.requires_grad = nx.requires_grad;
  n.value = nx.value;
  for (double& v : n.value.data()) v = v > 0.0 ? v : alpha * v;
  return push(std::move(n));
}

double Tape::kink_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Node& n : nodes_) {
    if (n.kind != OpKind::kLeakyRelu) continue;
    for (double v : nodes_[n.in0].value.data()) m = std::min(m, std::abs(v));
  }
  return m;
}

Var Tape::sigmoid(Var x) {
  const Node& nx = node(x);
  Node n;
  n.kind = OpKind::kSigmoid;
  n.in0 = x.id, n.arity = 1;
  n.requires_grad = nx.requires_grad;
  n.value = nx.value;
  for (double& v : n.value.data()) v = sigmoid_of(v);
  return push(std::move(n));
}

Var Tape::tanh(Var x) {
  const Node& nx = node(x);
  Node n;
  n.kind = OpKind::kTanh;
  n.in0 = x.id, n.arity = 1;
  n.requires_grad = nx.requires_grad;
  n.value = nx.value;
  for (double& v : n.value.data()) v = std::tanh(v);
  return push(std::move(n));
}

Var Tape::dropout(Var x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ParameterError("dropout rate must lie in [0, 1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) return x;
  const Node& nx = node(x);
  Node n;
  n.kind = OpKind::kDropout;
  n.in0 = x.id, n.arity = 1;
  n.requires_grad = nx.requires_grad;
  n.saved = Tensor(nx.value.shape());
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < n.saved.size(); ++i) {
    n.saved[i] = rng.uniform() < p ? 0.0 : keep_scale;
  }
  n.value = nx.value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= n.saved[i];
  return push(std::move(n));
}

Var Tape::cross_entropy(Var logits, std::size_t label) {
  const Node& nl = node(logits);
  require_rank(nl.value, 1, "cross_entropy");
  if (label >= nl.value.size()) {
    throw IndexError("cross_entropy label " + std::to_string(label) + " out of range for " +
                     std::to_string(nl.value.size()) + " classes");
  }
  Node n;
  n.kind = OpKind::kCrossEntropy;
  n.in0 = logits.id, n.arity = 1;
  n.aux = label;
  n.requires_grad = nl.requires_grad;
  const auto d = nl.value.data();
  const double mx = *std::max_element(d.begin(), d.end());
  double z = 0.0;
  for (double v : d) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  n.saved = nl.value;
  for (double& v : n.saved.data()) v = std::exp(v - log_z);
  n.value = Tensor::scalar(log_z - d[label]);
  return push(std::move(n));
}

Var Tape::sum_squares(Var x) {
  const Node& nx = node(x);
  Node n;
  n.kind = OpKind::kSumSquares;
  n.in0 = x.id, n.arity = 1;
  n.requires_grad = nx.requires_grad;
  double acc = 0.0;
  for (double v : nx.value.data()) acc += v * v;
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

Var Tape::lstm_cell(Var gates, Var c_prev) {
  const Node& ng = node(gates);
  const Node& nc = node(c_prev);
  require_rank(ng.value, 1, "lstm_cell");
  require_rank(nc.value, 1, "lstm_cell");
  const std::size_t h = nc.value.size();
  if (ng.value.size() != 4 * h) {
    throw ShapeError("lstm_cell: gates " + ng.value.shape().str() + " vs cell " +
                     nc.value.shape().str());
  }
  Node n;
  n.kind = OpKind::kLstmCell;
  n.in0 = gates.id, n.in1 = c_prev.id, n.arity = 2;
  n.requires_grad = ng.requires_grad || nc.requires_grad;
  // saved = [i f g o tanh(c)] after activation
  n.saved = Tensor(Shape::vector(5 * h));
  n.value = Tensor(Shape::vector(2 * h));
  for (std::size_t k = 0; k < h; ++k) {
    const double i = sigmoid_of(ng.value[k]);
    const double f = sigmoid_of(ng.value[h + k]);
    const double g = std::tanh(ng.value[2 * h + k]);
    const double o = sigmoid_of(ng.value[3 * h + k]);
    const double c = f * nc.value[k] + i * g;
    const double tc = std::tanh(c);
    n.saved[k] = i;
    n.saved[h + k] = f;
    n.saved[2 * h + k] = g;
    n.saved[3 * h + k] = o;
    n.saved[4 * h + k] = tc;
    n.value[k] = o * tc;
    n.value[h + k] = c;
  }
  return push(std::move(n));
}

Tensor& Tape::grad_slot(std::uint32_t id) {
  if (!has_grad_[id]) {
    grads_[id] = Tensor::zeros_like(nodes_[id].value);
    has_grad_[id] = true;
  }
  return grads_[id];
}

void Tape::accumulate(std::uint32_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  grad_slot(id).axpy(1.0, g);
}

void Tape::backward(Var loss) {
  const Node& nl = node(loss);
  if (nl.value.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " + nl.value.shape().str());
  }
  grads_.assign(nodes_.size(), Tensor(Shape::vector(0)));
  has_grad_.assign(nodes_.size(), false);
  if (!nl.requires_grad) return;
  grad_slot(loss.id).fill(1.0);

  for (std::size_t idx = loss.id + 1; idx-- > 0;) {
    const auto id = static_cast<std::uint32_t>(idx);
    if (!has_grad_[id]) continue;
    const Node& n = nodes_[id];
    if (!n.requires_grad) continue;
    const std::uint32_t ins[3] = {n.in0, n.in1, n.in2};
    for (std::uint8_t k = 0; k < n.arity; ++k) {
      if (ins[k] >= id) throw CorruptTapeError("node " + std::to_string(id) + " (" +
                                               op_name(n.kind) + ") references input " +
                                               std::to_string(ins[k]) + " that does not precede it");
    }
    for (std::uint32_t in : n.many) {
      if (in >= id) throw CorruptTapeError("node " + std::to_string(id) + " references input " +
                                           std::to_string(in) + " that does not precede it");
    }
    const Tensor& g = grads_[id];

    switch (n.kind) {
      case OpKind::kLeaf:
        break;
      case OpKind::kParam:
        if (n.param != nullptr && n.param->trainable) n.param->grad.axpy(1.0, g);
        break;
      case OpKind::kAdd:
        accumulate(n.in0, g);
        accumulate(n.in1, g);
        break;
      case OpKind::kSub: {
        accumulate(n.in0, g);
        if (nodes_[n.in1].requires_grad) grad_slot(n.in1).axpy(-1.0, g);
        break;
      }
      case OpKind::kMul: {
        const Tensor& a = nodes_[n.in0].value;
        const Tensor& b = nodes_[n.in1].value;
        if (nodes_[n.in0].requires_grad) {
          Tensor& ga = grad_slot(n.in0);
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
        }
        if (nodes_[n.in1].requires_grad) {
          Tensor& gb = grad_slot(n.in1);
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
        }
        break;
      }
      case OpKind::kScale:
        if (nodes_[n.in0].requires_grad) grad_slot(n.in0).axpy(n.scalar, g);
        break;
      case OpKind::kAddScalar: {
        accumulate(n.in0, g);
        if (nodes_[n.in1].requires_grad) {
          double s = 0.0;
          for (double v : g.data()) s += v;
          grad_slot(n.in1)[0] += s;
        }
        break;
      }
      case OpKind::kMatMul: {
        const Tensor& a = nodes_[n.in0].value;
        const Tensor& b = nodes_[n.in1].value;
        const std::size_t m = a.shape()[0], k = a.shape()[1], c = b.shape()[1];
        if (nodes_[n.in0].requires_grad) {
          Tensor& ga = grad_slot(n.in0);  // g B^T
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < c; ++j) acc += g[i * c + j] * b[p * c + j];
              ga[i * k + p] += acc;
            }
        }
        if (nodes_[n.in1].requires_grad) {
          Tensor& gb = grad_slot(n.in1);  // A^T g
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = a[i * k + p];
              if (aip == 0.0) continue;
              for (std::size_t j = 0; j < c; ++j) gb[p * c + j] += aip * g[i * c + j];
            }
        }
        break;
      }
      case OpKind::kMatVec:
      case OpKind::kAffine: {
        const Tensor& m = nodes_[n.in0].value;
        const Tensor& x = nodes_[n.in1].value;
        const std::size_t rows = m.shape()[0], cols = m.shape()[1];
        if (nodes_[n.in0].requires_grad) {
          Tensor& gm = grad_slot(n.in0);
          for (std::size_t i = 0; i < rows; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            double* row = gm.data().data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
          }
        }
        if (nodes_[n.in1].requires_grad) {
          Tensor& gx = grad_slot(n.in1);
          for (std::size_t i = 0; i < rows; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            const double* row = m.data().data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) gx[j] += gi * row[j];
          }
        }
        if (n.kind == OpKind::kAffine) accumulate(n.in2, g);
        break;
      }
      case OpKind::kVecMat: {
        const Tensor& x = nodes_[n.in0].value;
        const Tensor& m = nodes_[n.in1].value;
        const std::size_t rows = m.shape()[0], cols = m.shape()[1];
        if (nodes_[n.in0].requires_grad) {
          Tensor& gx = grad_slot(n.in0);
          for (std::size_t i = 0; i < rows; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < cols; ++j) acc += m[i * cols + j] * g[j];
            gx[i] += acc;
          }
        }
        if (nodes_[n.in1].requires_grad) {
          Tensor& gm = grad_slot(n.in1);
          for (std::size_t i = 0; i < rows; ++i) {
            const double xi = x[i];
            if (xi == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) gm[i * cols + j] += xi * g[j];
          }
        }
        break;
      }
      case OpKind::kConcat: {
        std::size_t offset = 0;
        for (std::uint32_t in : n.many) {
          const std::size_t len = nodes_[in].value.size();
          if (nodes_[in].requires_grad) {
            Tensor& gi = grad_slot(in);
            for (std::size_t j = 0; j < len; ++j) gi[j] += g[offset + j];
          }
          offset += len;
        }
        break;
      }
      case OpKind::kStack: {
        const std::size_t cols = n.value.shape()[1];
        for (std::size_t r = 0; r < n.many.size(); ++r) {
          const std::uint32_t in = n.many[r];
          if (!nodes_[in].requires_grad) continue;
          Tensor& gi = grad_slot(in);
          for (std::size_t j = 0; j < cols; ++j) gi[j] += g[r * cols + j];
        }
        break;
      }
      case OpKind::kSlice:
      case OpKind::kRow: {
        if (!nodes_[n.in0].requires_grad) break;
        Tensor& gi = grad_slot(n.in0);
        const std::size_t offset =
            n.kind == OpKind::kSlice ? n.aux : n.aux * nodes_[n.in0].value.shape()[1];
        for (std::size_t j = 0; j < g.size(); ++j) gi[offset + j] += g[j];
        break;
      }
      case OpKind::kReshape: {
        if (!nodes_[n.in0].requires_grad) break;
        Tensor& gi = grad_slot(n.in0);
        for (std::size_t j = 0; j < g.size(); ++j) gi[j] += g[j];
        break;
      }
      case OpKind::kSum: {
        if (!nodes_[n.in0].requires_grad) break;
        Tensor& gi = grad_slot(n.in0);
        for (double& v : gi.data()) v += g[0];
        break;
      }
      case OpKind::kDot: {
        const Tensor& a = nodes_[n.in0].value;
        const Tensor& b = nodes_[n.in1].value;
        if (nodes_[n.in0].requires_grad) grad_slot(n.in0).axpy(g[0], b);
        if (nodes_[n.in1].requires_grad) grad_slot(n.in1).axpy(g[0], a);
        break;
      }
      case OpKind::kSoftmax: {
        if (!nodes_[n.in0].requires_grad) break;
        const Tensor& y = n.value;
        double inner = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) inner += g[j] * y[j];
        Tensor& gi = grad_slot(n.in0);
        for (std::size_t j = 0; j < y.size(); ++j) gi[j] += y[j] * (g[j] - inner);
        break;
      }
      case OpKind::kLeakyRelu: {
        if (!nodes_[n.in0].requires_grad) break;
        const Tensor& x = nodes_[n.in0].value;
        Tensor& gi = grad_slot(n.in0);
        // kink at 0 takes the negative-side slope
        for (std::size_t j = 0; j < x.size(); ++j) gi[j] += g[j] * (x[j] > 0.0 ? 1.0 : n.scalar);
        break;
      }
      case OpKind::kSigmoid: {
        if (!nodes_[n.in0].requires_grad) break;
        Tensor& gi = grad_slot(n.in0);
        for (std::size_t j = 0; j < g.size(); ++j) {
          const double s = n.value[j];
          gi[j] += g[j] * s * (1.0 - s);
        }
        break;
      }
      case OpKind::kTanh: {
        if (!nodes_[n.in0].requires_grad) break;
        Tensor& gi = grad_slot(n.in0);
        for (std::size_t j = 0; j < g.size(); ++j) {
          const double t = n.value[j];
          gi[j] += g[j] * (1.0 - t * t);
        }
        break;
      }
      case OpKind::kDropout: {
        if (!nodes_[n.in0].requires_grad) break;
        Tensor& gi = grad_slot(n.in0);
        for (std::size_t j = 0; j < g.size(); ++j) gi[j] += g[j] * n.saved[j];
        break;
      }
      case OpKind::kCrossEntropy: {
        if (!nodes_[n.in0].requires_grad) break;
        Tensor& gi = grad_slot(n.in0);
        for (std::size_t j = 0; j < n.saved.size(); ++j) {
          gi[j] += g[0] * (n.saved[j] - (j == n.aux ? 1.0 : 0.0));
        }
        break;
      }
      case OpKind::kSumSquares: {
        if (!nodes_[n.in0].requires_grad) break;
        grad_slot(n.in0).axpy(2.0 * g[0], nodes_[n.in0].value);
        break;
      }
      case OpKind::kLstmCell: {
        const std::size_t h = nodes_[n.in1].value.size();
        const Tensor& c_prev = nodes_[n.in1].value;
        const Tensor& s = n.saved;
        const bool need_gates = nodes_[n.in0].requires_grad;
        const bool need_cell = nodes_[n.in1].requires_grad;
        Tensor* gg = need_gates ? &grad_slot(n.in0) : nullptr;
        Tensor* gc = need_cell ? &grad_slot(n.in1) : nullptr;
        for (std::size_t k = 0; k < h; ++k) {
          const double i = s[k], f = s[h + k], gt = s[2 * h + k], o = s[3 * h + k],
                       tc = s[4 * h + k];
          const double dh = g[k];
          const double dc = g[h + k] + dh * o * (1.0 - tc * tc);
          if (gg != nullptr) {
            (*gg)[k] += dc * gt * i * (1.0 - i);
            (*gg)[h + k] += dc * c_prev[k] * f * (1.0 - f);
            (*gg)[2 * h + k] += dc * i * (1.0 - gt * gt);
            (*gg)[3 * h + k] += dh * tc * o * (1.0 - o);
          }
          if (gc != nullptr) (*gc)[k] += dc * f;
        }
        break;
      }
    }
  }
}

Tensor Tape::grad(Var v) const {
  const Node& n = node(v);
  if (v.id < has_grad_.size() && has_grad_[v.id]) return grads_[v.id];
  return Tensor::zeros_like(n.value);
}

}  // namespace socialgat::num
