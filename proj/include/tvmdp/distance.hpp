#pragma once

#include "tvmdp/errors.hpp"
#include "tvmdp/types.hpp"

#include <Eigen/Dense>

namespace tvmdp {

// Span seminorm sp(f) = max f - min f. Invariant to additive constants.
template <typename Derived>
double span(const Eigen::DenseBase<Derived>& f) {
  if (f.size() == 0) throw InvalidInputError("span: empty domain");
  return f.maxCoeff() - f.minCoeff();
}

// Total variation distance 0.5 * sum |mu - nu| between two distributions
// on the same support.
template <typename D1, typename D2>
double tv_distance(const Eigen::DenseBase<D1>& mu, const Eigen::DenseBase<D2>& nu) {
  if (mu.size() != nu.size())
    throw InvalidInputError("tv_distance: mismatched support sizes");
  return 0.5 * (mu.derived().array() - nu.derived().array()).abs().sum();
}

// Induced state-to-state kernel P^pi(s'|s) = sum_a pi(a|s) P(s'|s,a).
Matrix apply_policy_kernel(const ControlledKernel& kernel, const MarkovPolicy& pi);

// Time-ordered product of state-to-state kernels: the distribution of the
// state after stepping through each kernel in sequence.
Matrix compose_kernels(const std::vector<Matrix>& chain);

// max over (s,a) of tv_distance(P(.|s,a), Q(.|s,a)).
double max_row_tv(const ControlledKernel& P, const ControlledKernel& Q);

// Largest coordinatewise change between two controlled kernels.
double max_coordinate_change(const ControlledKernel& P, const ControlledKernel& Q);

}  // namespace tvmdp
