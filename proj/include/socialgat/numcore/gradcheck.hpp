#pragma once

#include <functional>
#include <span>

#include "socialgat/numcore/tape.hpp"

namespace socialgat::num {

/// Scalar-valued function of one tensor input, expressed on a tape.
using TapeFunction = std::function<Var(Tape&, Var)>;

/// Max over coordinates of |analytic - central difference| /
/// max(1e-8, |central difference|) for f at x.
double check_gradients(const TapeFunction& f, const Tensor& x, double eps = 1e-5);

/// Same measure across every coordinate of every listed parameter, for a
/// loss built from scratch on a fresh tape by `loss`. Parameter values are
/// restored before returning; their grad buffers are left zeroed.
double check_parameter_gradients(const std::function<Var(Tape&)>& loss,
                                 std::span<Parameter* const> params, double eps = 1e-5);

}  // namespace socialgat::num
