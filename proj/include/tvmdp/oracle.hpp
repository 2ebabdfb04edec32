#pragma once

#include "tvmdp/types.hpp"

#include <vector>

namespace tvmdp {

// Full-information benchmark tables. V has T+1 entries with V[T] = 0;
// Q has T entries; greedy[t] is the deterministic argmax policy with ties
// broken toward the lowest action index.
struct ValueTables {
  std::vector<Vector> V;
  std::vector<Matrix> Q;
  std::vector<MarkovPolicy> greedy;
};

// Backward induction V_t(s) = max_a { r_t(s,a) + E_{s'~P_t}[V_{t+1}(s')] }.
// J*_T(s) is V[0](s). Throws ValidationError on an invalid instance.
ValueTables solve_oracle(const TvMdp& M);

// Deterministic greedy actions at time t as a vector of action indices.
Eigen::VectorXi greedy_actions(const Matrix& Q_t);

// m-step state-to-state kernels over [t, t+m) induced by two policy
// sequences, each run through its own kernel sequence. The plain overlap
// coefficient uses the same kernels on both sides.
double overlap_two_chains(const std::vector<ControlledKernel>& kernels1,
                          const std::vector<MarkovPolicy>& policies1,
                          const std::vector<ControlledKernel>& kernels2,
                          const std::vector<MarkovPolicy>& policies2, Index t, Index m);

// Overlap coefficient eta_t of two policy sequences on M:
//   min_{s1,s2} sum_{s'} min{ P^{pi1}_{t:t+m-1}(s'|s1), P^{pi2}_{t:t+m-1}(s'|s2) }.
// Requires t + m <= T.
double overlap_coefficient(const TvMdp& M, const std::vector<MarkovPolicy>& policies1,
                           const std::vector<MarkovPolicy>& policies2, Index t, Index m);

struct MixingCertificate {
  Index m = 1;
  Vector eta_per_t;  // eta_t for t in [0, T-m]
  double eta = 0.0;  // min over t
  double alpha = 1.0;
  bool assumption_holds = false;  // eta > 0
};

// eta = min over t in [0, T-m] of overlap_coefficient(M, pi_alg, pi_star, t, m);
// alpha = 1 - eta. eta = 0 is reported, not thrown: the caller decides
// whether a vacuous certificate is an error.
MixingCertificate certify_mixing(const TvMdp& M, const std::vector<MarkovPolicy>& pi_alg,
                                 const std::vector<MarkovPolicy>& pi_star, Index m);

// V~ = max_k sp(V_k) over all stored value functions.
double span_bound(const ValueTables& tables);

}  // namespace tvmdp
