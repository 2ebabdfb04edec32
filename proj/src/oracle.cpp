#include "tvmdp/oracle.hpp"

#include "tvmdp/distance.hpp"
#include "tvmdp/errors.hpp"
#include "tvmdp/validate.hpp"

#include <algorithm>

namespace tvmdp {

Eigen::VectorXi greedy_actions(const Matrix& Q_t) {
  Eigen::VectorXi actions(Q_t.rows());
  for (Index s = 0; s < Q_t.rows(); ++s) {
    Index best = 0;
    for (Index a = 1; a < Q_t.cols(); ++a)
      if (Q_t(s, a) > Q_t(s, best)) best = a;
    actions(s) = static_cast<int>(best);
  }
  return actions;
}

ValueTables solve_oracle(const TvMdp& M) {
  require_valid(M);
  const Index S = M.n_states;
  const Index A = M.n_actions;
  const Index T = M.horizon;

  ValueTables tables;
  tables.V.assign(static_cast<size_t>(T) + 1, Vector::Zero(S));
  tables.Q.assign(static_cast<size_t>(T), Matrix::Zero(S, A));
  tables.greedy.assign(static_cast<size_t>(T), MarkovPolicy::Zero(S, A));

  for (Index t = T - 1; t >= 0; --t) {
    Matrix& Q = tables.Q[static_cast<size_t>(t)];
    for (Index a = 0; a < A; ++a)
      Q.col(a) = M.rewards[static_cast<size_t>(t)].col(a) +
                 M.kernels[static_cast<size_t>(t)][static_cast<size_t>(a)] *
                     tables.V[static_cast<size_t>(t) + 1];
    const Eigen::VectorXi actions = greedy_actions(Q);
    Vector& V = tables.V[static_cast<size_t>(t)];
    for (Index s = 0; s < S; ++s) {
      V(s) = Q(s, actions(s));
      tables.greedy[static_cast<size_t>(t)](s, actions(s)) = 1.0;
    }
  }
  return tables;
}

double overlap_two_chains(const std::vector<ControlledKernel>& kernels1,
                          const std::vector<MarkovPolicy>& policies1,
                          const std::vector<ControlledKernel>& kernels2,
                          const std::vector<MarkovPolicy>& policies2, Index t, Index m) {
  if (m < 1) throw InvalidInputError("overlap: block length m must be >= 1");
  const auto T1 = static_cast<Index>(kernels1.size());
  const auto T2 = static_cast<Index>(kernels2.size());
  if (t < 0 || t + m > std::min(T1, T2))
    throw InvalidInputError("overlap: window [t, t+m) exceeds horizon");

  std::vector<Matrix> chain1, chain2;
  chain1.reserve(static_cast<size_t>(m));
  chain2.reserve(static_cast<size_t>(m));
  for (Index u = t; u < t + m; ++u) {
    chain1.push_back(apply_policy_kernel(kernels1[static_cast<size_t>(u)],
                                         policies1[static_cast<size_t>(u)]));
    chain2.push_back(apply_policy_kernel(kernels2[static_cast<size_t>(u)],
                                         policies2[static_cast<size_t>(u)]));
  }
  const Matrix K1 = compose_kernels(chain1);
  const Matrix K2 = compose_kernels(chain2);

  double eta = 1.0;
  for (Index s1 = 0; s1 < K1.rows(); ++s1)
    for (Index s2 = 0; s2 < K2.rows(); ++s2)
      eta = std::min(eta, K1.row(s1).cwiseMin(K2.row(s2)).sum());
  return eta;
}

double overlap_coefficient(const TvMdp& M, const std::vector<MarkovPolicy>& policies1,
                           const std::vector<MarkovPolicy>& policies2, Index t, Index m) {
  return overlap_two_chains(M.kernels, policies1, M.kernels, policies2, t, m);
}

MixingCertificate certify_mixing(const TvMdp& M, const std::vector<MarkovPolicy>& pi_alg,
                                 const std::vector<MarkovPolicy>& pi_star, Index m) {
  if (m < 1 || m > M.horizon)
    throw InvalidInputError("certify_mixing: need 1 <= m <= T");
  if (static_cast<Index>(pi_alg.size()) != M.horizon ||
      static_cast<Index>(pi_star.size()) != M.horizon)
    throw InvalidInputError("certify_mixing: policies must cover [0, T)");

  MixingCertificate cert;
  cert.m = m;
  const Index last = M.horizon - m;
  cert.eta_per_t = Vector::Zero(last + 1);
  double eta = 1.0;
  for (Index t = 0; t <= last; ++t) {
    cert.eta_per_t(t) = overlap_coefficient(M, pi_alg, pi_star, t, m);
    eta = std::min(eta, cert.eta_per_t(t));
  }
  cert.eta = eta;
  cert.alpha = 1.0 - eta;
  cert.assumption_holds = eta > 0.0;
  return cert;
}

double span_bound(const ValueTables& tables) {
  double worst = 0.0;
  for (const Vector& v : tables.V) worst = std::max(worst, span(v));
  return worst;
}

}  // namespace tvmdp
