#include "tvmdp/distance.hpp"

namespace tvmdp {

Matrix apply_policy_kernel(const ControlledKernel& kernel, const MarkovPolicy& pi) {
  if (kernel.empty()) throw InvalidInputError("apply_policy_kernel: empty kernel");
  const Index n_states = kernel.front().rows();
  const auto n_actions = static_cast<Index>(kernel.size());
  if (pi.rows() != n_states || pi.cols() != n_actions)
    throw InvalidInputError("apply_policy_kernel: policy/kernel dimension mismatch");
  Matrix induced = Matrix::Zero(n_states, kernel.front().cols());
  for (Index a = 0; a < n_actions; ++a)
    induced += pi.col(a).asDiagonal() * kernel[static_cast<size_t>(a)];
  return induced;
}

Matrix compose_kernels(const std::vector<Matrix>& chain) {
  if (chain.empty()) throw InvalidInputError("compose_kernels: empty sequence");
  Matrix product = chain.front();
  for (size_t i = 1; i < chain.size(); ++i) {
    if (product.cols() != chain[i].rows())
      throw InvalidInputError("compose_kernels: nonconformable kernels");
    product = product * chain[i];
  }
  return product;
}

double max_row_tv(const ControlledKernel& P, const ControlledKernel& Q) {
  if (P.size() != Q.size())
    throw InvalidInputError("max_row_tv: action-count mismatch");
  double worst = 0.0;
  for (size_t a = 0; a < P.size(); ++a)
    for (Index s = 0; s < P[a].rows(); ++s)
      worst = std::max(worst, tv_distance(P[a].row(s), Q[a].row(s)));
  return worst;
}

double max_coordinate_change(const ControlledKernel& P, const ControlledKernel& Q) {
  if (P.size() != Q.size())
    throw InvalidInputError("max_coordinate_change: action-count mismatch");
  double worst = 0.0;
  for (size_t a = 0; a < P.size(); ++a)
    worst = std::max(worst, (P[a] - Q[a]).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace tvmdp
