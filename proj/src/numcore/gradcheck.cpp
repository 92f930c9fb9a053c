#include "socialgat/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "socialgat/errors.hpp"

namespace socialgat::num {
namespace {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(numeric));
}

double scalar_of(Tape& tape, Var out) {
  const Tensor& v = tape.value(out);
  if (v.size() != 1) {
    throw ShapeError("gradient check needs a scalar-valued function, got shape " +
                     v.shape().str());
  }
  return v[0];
}

}  // namespace

double check_gradients(const TapeFunction& f, const Tensor& x, double eps) {
  Tensor analytic;
  {
    Tape tape;
    const Var in = tape.leaf(x, true);
    const Var out = f(tape, in);
    scalar_of(tape, out);
    tape.backward(out);
    analytic = tape.grad(in);
  }
  auto eval = [&](const Tensor& point) {
    Tape tape;
    const Var in = tape.leaf(point, true);
    return scalar_of(tape, f(tape, in));
  };
  double worst = 0.0;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = eval(probe);
    probe[i] = x[i] - eps;
    const double down = eval(probe);
    probe[i] = x[i];
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * eps)));
  }
  return worst;
}

double check_parameter_gradients(const std::function<Var(Tape&)>& loss,
                                 std::span<Parameter* const> params, double eps) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    const Var out = loss(tape);
    scalar_of(tape, out);
    tape.backward(out);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) {
    analytic.push_back(p->grad);
    p->zero_grad();
  }
  auto eval = [&] {
    Tape tape;
    return scalar_of(tape, loss(tape));
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& value = params[k]->value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double original = value[i];
      value[i] = original + eps;
      const double up = eval();
      value[i] = original - eps;
      const double down = eval();
      value[i] = original;
      worst = std::max(worst, relative_error(analytic[k][i], (up - down) / (2.0 * eps)));
    }
  }
  return worst;
}

}  // namespace socialgat::num
