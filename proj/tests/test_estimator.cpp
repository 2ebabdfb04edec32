#include "tvmdp/estimator.hpp"

#include "tvmdp/errors.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace tvmdp;

namespace {

TransitionDataset worked_example_dataset() {
  // Two update times with the same (s,a), observed next states 0 then 1,
  // cumulative drift budget 0.2 between them.
  TransitionDataset data;
  data.n_states = 2;
  data.n_actions = 1;
  data.triples = {{0, 0, 0, 0}, {1, 0, 0, 1}};
  return data;
}

// Random small |S|=2 dataset over distinct update times.
TransitionDataset random_dataset(Index n_updates, Index n_actions, Index horizon,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> state(0, 1);
  std::uniform_int_distribution<Index> action(0, n_actions - 1);
  TransitionDataset data;
  data.n_states = 2;
  data.n_actions = n_actions;
  std::vector<Index> times;
  std::uniform_int_distribution<Index> gap(1, std::max<Index>(1, (horizon - 1) / n_updates));
  Index t = 0;
  for (Index k = 0; k < n_updates && t < horizon - 1; ++k) {
    times.push_back(t);
    t += gap(rng);
  }
  for (const Index tau : times)
    data.triples.push_back({tau, state(rng), action(rng), state(rng)});
  return data;
}

Vector random_drift_array(Index horizon, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, scale);
  Vector drift(horizon);
  for (Index t = 0; t < horizon; ++t) drift(t) = uniform(rng);
  return drift;
}

double aggregated(const Vector& drift, Index t_from, Index t_to) {
  double budget = 0.0;
  for (Index t = t_from; t < t_to; ++t) budget += drift(t);
  return budget;
}

// Full chain polytope for one (s,a) as an H-polytope over all update rows
// (no anchor reduction), for the vertex-enumeration oracle.
struct ChainPolytope {
  Matrix A_eq;
  Vector b_eq;
  Matrix A_ub;
  Vector b_ub;
};

ChainPolytope full_chain_polytope(const TransitionDataset& data, const Vector& drift,
                                  const ChainEstimate& estimate, Index s, Index a) {
  const Index S = data.n_states;
  const auto K = static_cast<Index>(data.triples.size());
  const Index n = K * S;

  std::vector<std::pair<Index, Index>> pins;  // (flat coordinate, update index)
  for (Index k = 0; k < K; ++k)
    if (data.triples[static_cast<size_t>(k)].state == s &&
        data.triples[static_cast<size_t>(k)].action == a)
      pins.emplace_back(k * S + data.triples[static_cast<size_t>(k)].next_state, k);

  ChainPolytope poly;
  poly.A_eq = Matrix::Zero(K + static_cast<Index>(pins.size()), n);
  poly.b_eq = Vector::Zero(poly.A_eq.rows());
  for (Index k = 0; k < K; ++k) {
    poly.A_eq.block(k, k * S, 1, S).setOnes();
    poly.b_eq(k) = 1.0;
  }
  for (size_t p = 0; p < pins.size(); ++p) {
    const auto [flat, k] = pins[p];
    poly.A_eq(K + static_cast<Index>(p), flat) = 1.0;
    poly.b_eq(K + static_cast<Index>(p)) =
        estimate.kernels[static_cast<size_t>(k)][static_cast<size_t>(a)](
            s, flat - k * S);
  }

  poly.A_ub = Matrix::Zero(2 * (K - 1) * S, n);
  poly.b_ub = Vector::Zero(poly.A_ub.rows());
  Index row = 0;
  for (Index k = 1; k < K; ++k) {
    const double budget = aggregated(drift, data.triples[static_cast<size_t>(k) - 1].time,
                                     data.triples[static_cast<size_t>(k)].time);
    for (Index j = 0; j < S; ++j) {
      poly.A_ub(row, k * S + j) = 1.0;
      poly.A_ub(row, (k - 1) * S + j) = -1.0;
      poly.b_ub(row++) = budget;
      poly.A_ub(row, k * S + j) = -1.0;
      poly.A_ub(row, (k - 1) * S + j) = 1.0;
      poly.b_ub(row++) = budget;
    }
  }
  return poly;
}

}  // namespace

TEST_CASE("solve_cmle: single observation pins the coordinate to 1") {
  TransitionDataset data;
  data.n_states = 3;
  data.n_actions = 2;
  data.triples = {{0, 1, 0, 2}};
  const Vector drift = Vector::Constant(4, 0.1);
  const ChainEstimate estimate = solve_cmle(data, drift);
  CHECK(estimate.kernels[0][0](1, 2) == doctest::Approx(1.0).epsilon(1e-6));
  // rows never touched by data stay uniform
  CHECK(estimate.kernels[0][1](0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(estimate.kernels[0][0](0, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("solve_cmle: worked example lands on 0.6 / 0.6") {
  const TransitionDataset data = worked_example_dataset();
  Vector drift(2);
  drift << 0.2, 0.0;
  const ChainEstimate estimate = solve_cmle(data, drift);
  CHECK(estimate.kernels[0][0](0, 0) == doctest::Approx(0.6).epsilon(1e-4));
  CHECK(estimate.kernels[1][0](0, 1) == doctest::Approx(0.6).epsilon(1e-4));

  // grid oracle agreement on the 2-variable problem
  const double grid = tvmdp::testing::grid_cmle_value(data, drift, 1e-3);
  CHECK(estimate.diagnostics.objective >= grid - 1e-6);
}

TEST_CASE("solve_cmle: solver objective at least the truth's likelihood") {
  for (int trial = 0; trial < 10; ++trial) {
    const Index T = 8;
    const TvMdp truth = tvmdp::testing::random_instance(2, 2, T, 0.1, 900 + trial);
    std::mt19937_64 rng(1000 + trial);
    std::uniform_int_distribution<Index> state(0, 1);
    std::uniform_int_distribution<Index> action(0, 1);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    TransitionDataset data;
    data.n_states = 2;
    data.n_actions = 2;
    std::vector<ControlledKernel> truth_chain;
    for (Index tau = 0; tau < T - 1; tau += 2) {
      const Index s = state(rng);
      const Index a = action(rng);
      const double u = uniform(rng);
      const Index s_next = u < truth.kernels[static_cast<size_t>(tau)][static_cast<size_t>(a)](s, 0) ? 0 : 1;
      data.triples.push_back({tau, s, a, s_next});
      truth_chain.push_back(truth.kernels[static_cast<size_t>(tau)]);
    }
    const ChainEstimate estimate = solve_cmle(data, truth.drift);
    const double at_truth = chain_log_likelihood(data, truth_chain);
    CHECK(estimate.diagnostics.objective >= at_truth - 1e-7);
  }
}

TEST_CASE("solve_cmle: observed coordinates agree across initializations") {
  for (int trial = 0; trial < 8; ++trial) {
    const Index T = 8;
    const TransitionDataset data = random_dataset(3, 2, T, 1100 + trial);
    const Vector drift = random_drift_array(T, 0.15, 1200 + trial);

    const ChainEstimate from_uniform = solve_cmle(data, drift);

    CmleOptions options;
    // start every row at a skewed but feasible point: the constant chain
    Vector skew(2);
    skew << 0.9, 0.1;
    options.init.assign(data.triples.size(),
                        ControlledKernel(2, Matrix::Zero(2, 2)));
    for (auto& kernel : options.init)
      for (auto& slice : kernel) {
        slice.row(0) = skew.transpose();
        slice.row(1) = skew.transpose();
      }
    const ChainEstimate from_skew = solve_cmle(data, drift, options);

    for (size_t k = 0; k < data.triples.size(); ++k) {
      const TransitionObservation& obs = data.triples[k];
      const double a_val =
          from_uniform.kernels[k][static_cast<size_t>(obs.action)](obs.state, obs.next_state);
      const double b_val =
          from_skew.kernels[k][static_cast<size_t>(obs.action)](obs.state, obs.next_state);
      CHECK(std::abs(a_val - b_val) < 1e-6);
    }
  }
}

TEST_CASE("solve_cmle: estimates satisfy simplex and drift-chain constraints") {
  for (int trial = 0; trial < 8; ++trial) {
    const Index T = 10;
    const TransitionDataset data = random_dataset(4, 2, T, 1300 + trial);
    const Vector drift = random_drift_array(T, 0.1, 1400 + trial);
    const ChainEstimate estimate = solve_cmle(data, drift);
    for (size_t k = 0; k < estimate.kernels.size(); ++k) {
      for (Index a = 0; a < 2; ++a)
        for (Index s = 0; s < 2; ++s) {
          const auto row = estimate.kernels[k][static_cast<size_t>(a)].row(s);
          CHECK(std::abs(row.sum() - 1.0) < 1e-8);
          CHECK(row.minCoeff() >= -1e-12);
        }
      if (k == 0) continue;
      const double budget = aggregated(drift, estimate.update_times[k - 1],
                                       estimate.update_times[k]);
      for (Index a = 0; a < 2; ++a)
        CHECK((estimate.kernels[k][static_cast<size_t>(a)] -
               estimate.kernels[k - 1][static_cast<size_t>(a)])
                  .cwiseAbs()
                  .maxCoeff() <= budget + 1e-8);
    }
  }
}

TEST_CASE("solve_cmle: grid-search oracle certifies near-optimality") {
  for (int trial = 0; trial < 6; ++trial) {
    const Index T = 7;
    const TransitionDataset data = random_dataset(3, 2, T, 1500 + trial);
    const Vector drift = random_drift_array(T, 0.2, 1600 + trial);
    const ChainEstimate estimate = solve_cmle(data, drift);
    const double grid = tvmdp::testing::grid_cmle_value(data, drift, 1e-3);
    CHECK(estimate.diagnostics.objective >= grid - 1e-6);
  }
}

TEST_CASE("solve_cmle: iteration cap raises a convergence error with the best iterate") {
  const TransitionDataset data = worked_example_dataset();
  Vector drift(2);
  drift << 0.2, 0.0;
  CmleOptions options;
  options.max_iters = 1;
  CHECK_THROWS_AS(solve_cmle(data, drift, options), CmleConvergenceError);
  try {
    solve_cmle(data, drift, options);
  } catch (const CmleConvergenceError& err) {
    CHECK(err.best.kernels.size() == 2);
    CHECK_FALSE(err.best.diagnostics.converged);
  }
}

TEST_CASE("solve_cmle: long same-pair chains stay feasible (projection regression)") {
  // A six-observation chain of one (s,a) whose optimum sits on a simplex
  // corner with a binding drift band; the projection once returned an
  // infeasible fixed point here (coordinate 1 + 1e-4) that inflated the
  // objective and broke the range LPs.
  TransitionDataset data;
  data.n_states = 3;
  data.n_actions = 1;
  const Index nexts[6] = {2, 2, 2, 2, 0, 2};
  for (Index k = 0; k < 6; ++k) data.triples.push_back({k, 0, 0, nexts[k]});
  Vector drift(7);
  drift << 0.205081, 0.0769547, 0.152493, 0.0748731, 0.304832, 0.0, 0.0;

  const ChainEstimate estimate = solve_cmle(data, drift);
  for (size_t k = 0; k < estimate.kernels.size(); ++k) {
    const auto row = estimate.kernels[k][0].row(0);
    CHECK(std::abs(row.sum() - 1.0) < 1e-10);
    CHECK(row.minCoeff() >= -1e-10);
    CHECK(row.maxCoeff() <= 1.0 + 1e-10);
  }
  // and the range LPs accept the pinned values
  const UncertaintyIntervals intervals = polytope_ranges(data, drift, estimate);
  CHECK(intervals.diameter(0, 0) >= 0.0);
}

TEST_CASE("polytope ranges: unobserved pair spans the whole simplex") {
  TransitionDataset data;
  data.n_states = 2;
  data.n_actions = 2;
  data.triples = {{0, 0, 0, 1}};
  const Vector drift = Vector::Constant(3, 0.1);
  const ChainEstimate estimate = solve_cmle(data, drift);
  const auto [lo, hi] = polytope_coordinate_range(data, drift, estimate, 1, 1, 0);
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(1.0));
}

TEST_CASE("polytope ranges: coordinate observed at the latest update is a point") {
  TransitionDataset data;
  data.n_states = 2;
  data.n_actions = 1;
  data.triples = {{0, 1, 0, 0}, {2, 0, 0, 1}};
  const Vector drift = random_drift_array(4, 0.2, 42);
  const ChainEstimate estimate = solve_cmle(data, drift);
  const double pinned = estimate.kernels[1][0](0, 1);
  const auto [lo, hi] = polytope_coordinate_range(data, drift, estimate, 0, 0, 1);
  CHECK(lo == doctest::Approx(pinned));
  CHECK(hi == doctest::Approx(pinned));
}

TEST_CASE("polytope ranges: vertex-enumeration oracle on tiny chains") {
  for (int trial = 0; trial < 12; ++trial) {
    const Index T = 6;
    const TransitionDataset data = random_dataset(2, 2, T, 1700 + trial);
    const Vector drift = random_drift_array(T, 0.25, 1800 + trial);
    const ChainEstimate estimate = solve_cmle(data, drift);
    const auto K = static_cast<Index>(data.triples.size());

    for (Index s = 0; s < 2; ++s) {
      for (Index a = 0; a < 2; ++a) {
        bool observed = false;
        for (const auto& obs : data.triples)
          if (obs.state == s && obs.action == a) observed = true;
        if (!observed) continue;  // full-simplex case covered elsewhere

        const ChainPolytope poly = full_chain_polytope(data, drift, estimate, s, a);
        const auto vertices =
            tvmdp::testing::enumerate_vertices(poly.A_eq, poly.b_eq, poly.A_ub, poly.b_ub);
        REQUIRE_FALSE(vertices.empty());
        for (Index j = 0; j < 2; ++j) {
          const auto [lo, hi] = polytope_coordinate_range(data, drift, estimate, s, a, j);
          double v_lo = 2.0, v_hi = -1.0;
          for (const Vector& vertex : vertices) {
            const double coord = vertex((K - 1) * 2 + j);
            v_lo = std::min(v_lo, coord);
            v_hi = std::max(v_hi, coord);
          }
          CHECK(std::abs(lo - v_lo) < 1e-8);
          CHECK(std::abs(hi - v_hi) < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("polytope ranges: the MLE point lies inside every interval") {
  for (int trial = 0; trial < 6; ++trial) {
    const Index T = 8;
    const TransitionDataset data = random_dataset(3, 2, T, 1900 + trial);
    const Vector drift = random_drift_array(T, 0.15, 2000 + trial);
    const ChainEstimate estimate = solve_cmle(data, drift);
    const UncertaintyIntervals intervals = polytope_ranges(data, drift, estimate);
    const ControlledKernel& latest = estimate.kernels.back();
    for (Index a = 0; a < 2; ++a)
      for (Index s = 0; s < 2; ++s)
        for (Index j = 0; j < 2; ++j) {
          CHECK(latest[static_cast<size_t>(a)](s, j) >=
                intervals.lo[static_cast<size_t>(a)](s, j) - 1e-7);
          CHECK(latest[static_cast<size_t>(a)](s, j) <=
                intervals.hi[static_cast<size_t>(a)](s, j) + 1e-7);
        }
  }
}

TEST_CASE("uncertainty_diameter: frozen examples") {
  Vector lo(2), hi(2);
  lo << 0.3, 0.7;
  hi << 0.3, 0.7;
  CHECK(uncertainty_diameter(lo, hi) == doctest::Approx(0.0));
  lo << 0.0, 0.0;
  hi << 1.0, 1.0;
  CHECK(uncertainty_diameter(lo, hi) == doctest::Approx(1.0));
  lo << 0.2, 0.5;
  hi << 0.5, 0.8;
  CHECK(uncertainty_diameter(lo, hi) == doctest::Approx(0.3));
}

TEST_CASE("forecast_uncertainty: widening, clamping, monotonicity") {
  TransitionDataset data;
  data.n_states = 2;
  data.n_actions = 1;
  data.triples = {{0, 0, 0, 1}};
  Vector drift = Vector::Constant(6, 0.05);
  const ChainEstimate estimate = solve_cmle(data, drift);
  const UncertaintyIntervals base = polytope_ranges(data, drift, estimate);

  SUBCASE("h = 0 is the identity") {
    const UncertaintyIntervals same = forecast_uncertainty(base, drift, 0, 6);
    CHECK((same.diameter - base.diameter).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((same.lo[0] - base.lo[0]).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("point interval widens by the accumulated budget") {
    // observed coordinate is pinned at 1.0; after two steps of 0.05 the
    // interval is [0.9, 1.0]
    const UncertaintyIntervals ahead = forecast_uncertainty(base, drift, 2, 6);
    CHECK(ahead.lo[0](0, 1) == doctest::Approx(0.9));
    CHECK(ahead.hi[0](0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("zero drift keeps the diameters fixed") {
    Vector no_drift = Vector::Zero(6);
    const ChainEstimate est0 = solve_cmle(data, no_drift);
    const UncertaintyIntervals b0 = polytope_ranges(data, no_drift, est0);
    for (Index h = 0; h <= 3; ++h) {
      const UncertaintyIntervals ahead = forecast_uncertainty(b0, no_drift, h, 6);
      CHECK((ahead.diameter - b0.diameter).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
  }
  SUBCASE("diameters are nondecreasing in the lookahead and capped at 1") {
    double previous = -1.0;
    for (Index h = 0; h <= 5; ++h) {
      const UncertaintyIntervals ahead = forecast_uncertainty(base, drift, h, 6);
      const double worst = ahead.diameter.maxCoeff();
      CHECK(worst >= previous - 1e-12);
      CHECK(worst <= 1.0);
      previous = worst;
    }
  }
  SUBCASE("beyond the horizon is rejected") {
    CHECK_THROWS_AS(forecast_uncertainty(base, drift, 6, 6), InvalidInputError);
  }
}

TEST_CASE("monotone information: a fresh observation never enlarges u") {
  for (int trial = 0; trial < 6; ++trial) {
    const Index T = 8;
    TransitionDataset base = random_dataset(2, 2, T, 2100 + trial);
    const Vector drift = random_drift_array(T, 0.1, 2200 + trial);
    const Index last_time = base.triples.back().time;
    const Index new_time = last_time + 2;
    REQUIRE(new_time <= T - 1);

    std::mt19937_64 rng(2300 + trial);
    std::uniform_int_distribution<Index> state(0, 1);
    std::uniform_int_distribution<Index> action(0, 1);
    const Index s = state(rng);
    const Index a = action(rng);

    TransitionDataset extended = base;
    extended.triples.push_back({new_time, s, a, state(rng)});

    const ChainEstimate base_estimate = solve_cmle(base, drift);
    const UncertaintyIntervals base_now = polytope_ranges(base, drift, base_estimate);
    const UncertaintyIntervals base_at_new =
        forecast_uncertainty(base_now, drift, new_time - last_time, T);

    const ChainEstimate ext_estimate = solve_cmle(extended, drift);
    const UncertaintyIntervals ext_now = polytope_ranges(extended, drift, ext_estimate);

    CHECK(ext_now.diameter(s, a) <= base_at_new.diameter(s, a) + 1e-8);
  }
}
