#include "tvmdp/validate.hpp"

#include "tvmdp/errors.hpp"

#include <cmath>
#include <sstream>

namespace tvmdp {

namespace {

std::string format_location(Index t, Index s, Index a, Index s_next) {
  std::ostringstream os;
  os << "t=" << t;
  if (s >= 0) os << " s=" << s;
  if (a >= 0) os << " a=" << a;
  if (s_next >= 0) os << " s'=" << s_next;
  return os.str();
}

void add_issue(ValidationReport& report, ValidationIssue::Kind kind, Index t, Index s,
               Index a, Index s_next, double value, const std::string& what) {
  ValidationIssue issue;
  issue.kind = kind;
  issue.t = t;
  issue.s = s;
  issue.a = a;
  issue.s_next = s_next;
  issue.value = value;
  issue.message = what + " at " + format_location(t, s, a, s_next);
  report.issues.push_back(std::move(issue));
}

}  // namespace

ValidationReport validate_instance(const TvMdp& M) {
  ValidationReport report;
  const Index S = M.n_states;
  const Index A = M.n_actions;
  const Index T = M.horizon;

  if (S <= 0 || A <= 0 || T <= 0) {
    add_issue(report, ValidationIssue::Kind::Shape, -1, -1, -1, -1, 0.0,
              "n_states, n_actions and horizon must be positive");
    return report;
  }
  if (static_cast<Index>(M.kernels.size()) != T ||
      static_cast<Index>(M.rewards.size()) != T || M.drift.size() != T) {
    add_issue(report, ValidationIssue::Kind::Shape, -1, -1, -1, -1, 0.0,
              "kernels, rewards and drift must all have length T");
    return report;
  }
  for (Index t = 0; t < T; ++t) {
    if (static_cast<Index>(M.kernels[t].size()) != A) {
      add_issue(report, ValidationIssue::Kind::Shape, t, -1, -1, -1, 0.0,
                "kernel has wrong action count");
      return report;
    }
    for (Index a = 0; a < A; ++a) {
      const Matrix& P = M.kernels[t][static_cast<size_t>(a)];
      if (P.rows() != S || P.cols() != S) {
        add_issue(report, ValidationIssue::Kind::Shape, t, -1, a, -1, 0.0,
                  "kernel slice has wrong shape");
        return report;
      }
    }
    if (M.rewards[t].rows() != S || M.rewards[t].cols() != A) {
      add_issue(report, ValidationIssue::Kind::Shape, t, -1, -1, -1, 0.0,
                "reward table has wrong shape");
      return report;
    }
  }

  for (Index t = 0; t < T; ++t) {
    for (Index a = 0; a < A; ++a) {
      const Matrix& P = M.kernels[t][static_cast<size_t>(a)];
      for (Index s = 0; s < S; ++s) {
        double row_sum = 0.0;
        for (Index sn = 0; sn < S; ++sn) {
          const double p = P(s, sn);
          if (!std::isfinite(p) || p < -kRowSumTol || p > 1.0 + kRowSumTol)
            add_issue(report, ValidationIssue::Kind::Range, t, s, a, sn, p,
                      "kernel entry outside [0,1]");
          row_sum += p;
        }
        if (std::abs(row_sum - 1.0) > kRowSumTol)
          add_issue(report, ValidationIssue::Kind::RowSum, t, s, a, -1, row_sum,
                    "kernel row does not sum to 1");
      }
      for (Index s = 0; s < S; ++s)
        if (!std::isfinite(M.rewards[t](s, a)))
          add_issue(report, ValidationIssue::Kind::NonFinite, t, s, a, -1,
                    M.rewards[t](s, a), "reward is not finite");
    }
    if (!std::isfinite(M.drift(t)) || M.drift(t) < 0.0)
      add_issue(report, ValidationIssue::Kind::Range, t, -1, -1, -1, M.drift(t),
                "drift budget must be nonnegative and finite");
  }

  for (Index t = 0; t + 1 < T; ++t) {
    const double budget = M.drift(t) + kDriftSlack;
    for (Index a = 0; a < A; ++a) {
      const Matrix& P0 = M.kernels[t][static_cast<size_t>(a)];
      const Matrix& P1 = M.kernels[t + 1][static_cast<size_t>(a)];
      for (Index s = 0; s < S; ++s)
        for (Index sn = 0; sn < S; ++sn) {
          const double change = std::abs(P1(s, sn) - P0(s, sn));
          if (change > budget)
            add_issue(report, ValidationIssue::Kind::Drift, t, s, a, sn, change,
                      "kernel change exceeds drift budget");
        }
    }
  }
  return report;
}

ValidationReport validate_schedule(const UpdateSchedule& schedule, Index horizon) {
  ValidationReport report;
  if (schedule.times.empty() || schedule.times.front() != 0) {
    add_issue(report, ValidationIssue::Kind::Schedule, 0, -1, -1, -1, 0.0,
              "schedule must start at tau_0 = 0");
    return report;
  }
  for (size_t k = 0; k < schedule.times.size(); ++k) {
    const Index tau = schedule.times[k];
    if (tau < 0 || tau >= horizon)
      add_issue(report, ValidationIssue::Kind::Schedule, tau, -1, -1, -1, 0.0,
                "update time outside [0, T)");
    if (k > 0 && tau <= schedule.times[k - 1])
      add_issue(report, ValidationIssue::Kind::Schedule, tau, -1, -1, -1, 0.0,
                "update times must be strictly increasing");
  }
  return report;
}

void require_valid(const TvMdp& M) {
  const ValidationReport report = validate_instance(M);
  if (!report.ok()) throw ValidationError(report.issues.front().message);
}

}  // namespace tvmdp
