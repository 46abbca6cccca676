#include <doctest.h>

#include "dbfgs/experiments.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace dbfgs;

namespace {

TrialConfig small_trial(Method m, bool async = false) {
  TrialConfig c;
  c.n = 12;
  c.async = async;
  c.sync.method = m;
  c.sync.stepsize = m == Method::dbfgs ? 0.01 : 0.002;
  c.sync.max_iters = 3000;
  c.async_run.method = m;
  c.async_run.stepsize = m == Method::dbfgs ? 0.007 : 0.001;
  c.async_run.max_ticks = 3000;
  c.schedule.horizon = 3000;
  if (async) {
    c.regime = ConditionRegime::narrow_1e0;
    c.delta = 5e-2;
  }
  return c;
}

}  // namespace

TEST_CASE("normalized error examples") {
  Vec xs(2);
  xs << 1.0, -2.0;
  PrimalBlock x = xs.replicate(1, 4);
  CHECK(normalized_error(x, xs) == 0.0);
  x.col(2) = 2.0 * xs;
  CHECK(normalized_error(x, xs) == doctest::Approx(0.25));
  CHECK(normalized_error(PrimalBlock::Zero(2, 4), xs) == 1.0);
  CHECK_THROWS_AS(normalized_error(x, Vec::Zero(2)), std::domain_error);
}

TEST_CASE("convergence time examples") {
  const std::vector<double> e{0.5, 0.02, 0.009, 0.004};
  CHECK(convergence_time(e, 1e-2) == 2);
  CHECK(convergence_time(e, 1.0) == 0);
  CHECK_FALSE(convergence_time(e, 1e-3).has_value());
  CHECK_THROWS(convergence_time(e, 0.0));
}

TEST_CASE("histogram bins") {
  const std::vector<double> v{0.0, 9.99, 10.0, 25.0, 25.0};
  Histogram h = make_histogram(v, 10.0);
  REQUIRE(h.bins.size() == 3);
  CHECK(h.bins[0].count == 2);
  CHECK(h.bins[1].count == 1);
  CHECK(h.bins[2].count == 2);
  CHECK(h.bins[2].lo == 20.0);
  CHECK(h.bins[2].hi == 30.0);
  CHECK(make_histogram(std::vector<double>{}, 5.0).bins.empty());
  CHECK_THROWS_AS(make_histogram(v, 0.0), ConfigError);
}

TEST_CASE("median helpers") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  std::vector<TrialSummary> t(3);
  t[0].converged = true;
  t[0].exchanges = 10.0;
  t[1].converged = false;
  t[2].converged = true;
  t[2].exchanges = 30.0;
  CHECK(median_exchanges(t) == 30.0);
  t[1].converged = true;
  t[1].exchanges = 5.0;
  CHECK(median_exchanges(t) == 10.0);
}

TEST_CASE("a single trial matches a direct run") {
  TrialConfig c = small_trial(Method::dbfgs);
  TrialSummary s = run_trial(c, 4);
  SyncRunConfig r = c.sync;
  r.threshold = c.delta;
  Trace tr = run(r, generate_quadratic(12, 4, 4), regular_cycle(12, 4));
  REQUIRE(s.converged);
  CHECK(*s.iters == convergence_time(tr, c.delta));
  CHECK(*s.exchanges == tr.back().comm_rounds);
  CHECK(*s.exchanges >= static_cast<double>(*s.iters));
  CHECK(s.final_err == tr.back().err);
  CHECK(s.skips == tr.back().skips);

  c.unit = ExchangeUnit::messages;
  CHECK(*run_trial(c, 4).exchanges == static_cast<double>(tr.back().comm_msgs));

  const std::vector<std::uint64_t> one{4};
  TrialSet set = run_trials(small_trial(Method::dbfgs), one, 10.0);
  REQUIRE(set.trials.size() == 1);
  CHECK(set.trials[0].exchanges == s.exchanges);
}

TEST_CASE("trials are deterministic and independent of the worker count") {
  std::vector<std::uint64_t> seeds(8);
  std::iota(seeds.begin(), seeds.end(), 1);
  for (bool async : {false, true}) {
    CAPTURE(async);
    TrialConfig c = small_trial(Method::dbfgs, async);
    TrialSet a = run_trials(c, seeds, 5.0, 1), b = run_trials(c, seeds, 5.0, 4);
    REQUIRE(a.trials.size() == 8);
    long converged = 0, binned = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(a.trials[k].seed == seeds[k]);
      CHECK(a.trials[k].converged == b.trials[k].converged);
      CHECK(a.trials[k].exchanges == b.trials[k].exchanges);
      CHECK(a.trials[k].final_err == b.trials[k].final_err);
      converged += a.trials[k].converged;
    }
    for (const auto& bin : a.histogram.bins) binned += bin.count;
    CHECK(binned == converged);
    CHECK(converged > 0);
  }
}

TEST_CASE("divergent trials are kept as non-converged") {
  TrialConfig c = small_trial(Method::dual_descent);
  c.sync.stepsize = 50.0;
  const std::vector<std::uint64_t> seeds{1, 2};
  TrialSet set = run_trials(c, seeds, 10.0);
  REQUIRE(set.trials.size() == 2);
  for (const auto& t : set.trials) {
    CHECK_FALSE(t.converged);
    CHECK(std::isnan(t.final_err));
    CHECK_FALSE(t.exchanges.has_value());
  }
  CHECK(set.histogram.bins.empty());
  CHECK(std::isinf(median_exchanges(set.trials)));
  CHECK_THROWS_AS(run_trials(c, std::span<const std::uint64_t>{}, 10.0), ConfigError);
}

TEST_CASE("D-BFGS needs fewer exchanges than dual descent") {
  std::vector<std::uint64_t> seeds(6);
  std::iota(seeds.begin(), seeds.end(), 1);
  TrialConfig q = small_trial(Method::dbfgs), d = small_trial(Method::dual_descent);
  q.n = d.n = 50;
  q.sync.max_iters = d.sync.max_iters = 10000;
  CHECK(median_exchanges(run_trials(q, seeds, 10.0, 4).trials) <
        median_exchanges(run_trials(d, seeds, 10.0, 4).trials));
}

TEST_CASE("strong concavity gap inequality") {
  SUBCASE("P3 at zero multipliers is tight") {
    Vec one = Vec::Ones(1);
    ProblemInstance p3 = make_quadratic_instance({one, one, one}, {Vec::Constant(1, 1.0), Vec::Zero(1), Vec::Constant(1, -1.0)});
    Graph g = path_graph(3);
    // x(0) = (-1, 0, 1), x* = 0, mu = 1: left 1, right h(0) - f(x*) = 1
    const std::vector<Vec> lam{Vec::Zero(4)};
    GapReport r = duality_gap_check(p3, g, lam);
    CHECK(r.violations == 0);
    CHECK(r.max_violation == doctest::Approx(-1e-8).epsilon(1e-6));
  }
  SUBCASE("random multipliers") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, 2.0);
    Graph g = random_connected_graph(8, 0.3, 3);
    ProblemInstance prob = generate_quadratic(8, 4, 3);
    std::vector<Vec> lams;
    for (int k = 0; k < 100; ++k) {
      Vec l(g.num_edges() * 4);
      for (auto& v : l) v = z(rng);
      lams.push_back(l);
    }
    GapReport r = duality_gap_check(prob, g, lams);
    CHECK(r.samples == 100);
    CHECK(r.violations == 0);
    CHECK(r.max_violation < 0.0);
  }
}

TEST_CASE("sqrt(t) scaled primal distance is non-increasing on a converging run") {
  Graph g = regular_cycle(50, 4);
  ProblemInstance prob = generate_quadratic(50, 4, 2);
  SyncRunConfig c;
  c.stepsize = 0.01;
  c.max_iters = 500;
  SyncEngine e(c, prob, g);
  const Vec xs = exact_optimum(prob);
  std::vector<double> scaled;
  for (long t = 1; t <= 500; ++t) {
    e.step();
    if (t == 125 || t == 250 || t == 500)
      scaled.push_back(std::sqrt(static_cast<double>(t)) * primal_distance(e.state().x, xs));
  }
  CHECK(scaled[1] <= scaled[0]);
  CHECK(scaled[2] <= scaled[1]);
}
