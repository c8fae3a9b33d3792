#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "antiito/errors.hpp"
#include "antiito/simulate.hpp"
#include "support.hpp"

using namespace antiito;
using testing_support::kCanonical;

namespace {

SimulationConfig small_config() {
  SimulationConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_final = 5.0;
  cfg.n_paths = 300;
  cfg.seed = 17;
  return cfg;
}

double normal_quantile(double p) {
  // Bisection on the normal CDF.
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("single steps") {
  SimulationConfig cfg;
  cfg.dt = 0.01;
  cfg.scheme = Scheme::EulerMaruyama;

  ModelParams quiet = kCanonical;
  quiet.sigma = 0.0;
  CHECK(step(1.0, 0.0, 0.3, cfg, chemotherapy_sde(quiet)) == 1.0);

  const SdeSpec chemo = chemotherapy_sde(kCanonical);
  cfg.interp = Interpretation::hanggi_klimontovich();
  CHECK(step(1.0, 0.0, 0.0, cfg, chemo) == doctest::Approx(1.01).epsilon(1e-15));
  cfg.interp = Interpretation::ito();
  CHECK(step(1.0, 0.0, 0.0, cfg, hk_to_ito(chemo)) == doctest::Approx(1.01).epsilon(1e-15));

  cfg.scheme = Scheme::Milstein;
  const double em = 1.0 + chemo.drift(1.0, 0.0) * cfg.dt;
  CHECK(step(1.0, 0.0, 0.0, cfg, chemo) == doctest::Approx(em - 0.005).epsilon(1e-15));

  cfg.scheme = Scheme::EulerMaruyama;
  CHECK(step(1.0, 0.0, -10.0, cfg, chemo) == 0.0);
  CHECK_THROWS_AS(step(-1.0, 0.0, 0.0, cfg, chemo), DomainError);
}

TEST_CASE("alpha-point scheme reads the noise at the endpoint") {
  SimulationConfig cfg;
  cfg.dt = 0.01;
  cfg.scheme = Scheme::AlphaPoint;
  cfg.interp = Interpretation::hanggi_klimontovich();
  const SdeSpec chemo = chemotherapy_sde(kCanonical);
  const double x = 1.0, dw = 0.05;
  const double predicted = x + chemo.drift(x, 0) * cfg.dt + chemo.diffusion(x, 0) * dw;
  CHECK(step(x, 0.0, dw, cfg, chemo) == doctest::Approx(x + chemo.drift(x, 0) * cfg.dt + predicted * dw));
  cfg.interp = Interpretation::ito();
  cfg.scheme = Scheme::AlphaPoint;
  SimulationConfig em = cfg;
  em.scheme = Scheme::EulerMaruyama;
  CHECK(step(x, 0.0, dw, cfg, chemo) == step(x, 0.0, dw, em, chemo));
}

TEST_CASE("non-finite states raise a blow-up error") {
  const SdeSpec explosive{
      [](double x, double) { return x * x * x; },
      [](double x, double) { return 0.1 * x; },
      [](double, double) { return 0.1; },
      0.1,
  };
  SimulationConfig cfg;
  cfg.dt = 0.5;
  cfg.t_final = 20.0;
  cfg.x0 = 10.0;
  cfg.n_paths = 50;
  cfg.interp = Interpretation::ito();
  try {
    simulate_ensemble(cfg, explosive);
    FAIL("expected EnsembleBlowup");
  } catch (const EnsembleBlowup& e) {
    CHECK(e.blown_paths() == 50);
    CHECK(e.first_blowup_time() > 0.0);
  }
  try {
    step(1e200, 1.5, 0.0, cfg, explosive);
    FAIL("expected NumericalBlowup");
  } catch (const NumericalBlowup& e) {
    CHECK(e.time() == doctest::Approx(2.0));
  }
}

TEST_CASE("configuration validation") {
  SimulationConfig cfg = small_config();
  CHECK_NOTHROW(validate(cfg));
  auto bad = [&](auto mutate) {
    SimulationConfig c = small_config();
    mutate(c);
    CHECK_THROWS_AS(validate(c), DomainError);
  };
  bad([](SimulationConfig& c) { c.dt = 0.0; });
  bad([](SimulationConfig& c) { c.t_final = 1e-3; });
  bad([](SimulationConfig& c) { c.n_paths = 0; });
  bad([](SimulationConfig& c) { c.x0 = 0.0; });
  bad([](SimulationConfig& c) { c.burn_in = 1.0; });
  bad([](SimulationConfig& c) { c.absorb_eps = -1.0; });
  CHECK(cfg.absorb_threshold() == doctest::Approx(1e-8));
  cfg.dt = 0.3;
  cfg.t_final = 1.0;
  CHECK(cfg.n_steps() == 4);
  CHECK(cfg.step_size() == doctest::Approx(0.25));
}

TEST_CASE("ensembles are bit-identical across thread counts") {
  SimulationConfig cfg = small_config();
  cfg.n_paths = 513;
  for (Scheme scheme : {Scheme::EulerMaruyama, Scheme::Milstein, Scheme::LogTransform, Scheme::AlphaPoint}) {
    cfg.scheme = scheme;
    const EnsembleSummary one = simulate_ensemble(cfg, kCanonical, 1);
    for (unsigned threads : {2u, 4u, 7u}) {
      const EnsembleSummary many = simulate_ensemble(cfg, kCanonical, threads);
      CHECK(one.terminal_samples == many.terminal_samples);
      CHECK(one.histogram.counts == many.histogram.counts);
      CHECK(one.mean == many.mean);
      CHECK(one.ks_vs_analytic == many.ks_vs_analytic);
    }
  }
}

TEST_CASE("summary invariants") {
  std::mt19937_64 gen(4);
  for (int i = 0; i < 6; ++i) {
    SimulationConfig cfg = small_config();
    cfg.seed = gen();
    cfg.interp = i % 2 ? Interpretation::ito() : Interpretation::hanggi_klimontovich();
    ModelParams p = testing_support::robust_params(gen, 0.3, 2.0);
    if (i >= 3) p.c = p.q + 1.0;
    const EnsembleSummary s = simulate_ensemble(cfg, p);
    CHECK(s.extinct_fraction >= 0.0);
    CHECK(s.extinct_fraction <= 1.0);
    std::size_t total = 0;
    for (auto c : s.histogram.counts) total += c;
    CHECK(total == cfg.n_paths);
    CHECK(std::all_of(s.terminal_samples.begin(), s.terminal_samples.end(), [](double x) { return x >= 0.0; }));
    CHECK(s.ks_vs_analytic.has_value() ==
          (cfg.interp == Interpretation::hanggi_klimontovich() && classify_regime(p) != RegimeClass::DegenerateAtZero));
  }
}

TEST_CASE("log-transform scheme stays positive") {
  SimulationConfig cfg = small_config();
  cfg.scheme = Scheme::LogTransform;
  cfg.interp = Interpretation::ito();
  cfg.absorb_eps = 0.0;
  ModelParams p = kCanonical;
  p.sigma = 2.5;
  const EnsembleSummary s = simulate_ensemble(cfg, p);
  CHECK(std::all_of(s.terminal_samples.begin(), s.terminal_samples.end(), [](double x) { return x > 0.0; }));

  SimulationConfig c;
  c.scheme = Scheme::LogTransform;
  const SdeSpec additive{[](double, double) { return 0.0; }, [](double, double) { return 1.0; },
                         [](double, double) { return 0.0; }, std::nullopt};
  CHECK_THROWS_AS(step(1.0, 0.0, 0.1, c, additive), DomainError);
}

TEST_CASE("deterministic limit keeps the fixed point") {
  ModelParams p = kCanonical;
  p.sigma = 1e-6;
  SimulationConfig cfg = small_config();
  for (Interpretation interp : {Interpretation::ito(), Interpretation::stratonovich(), Interpretation::hanggi_klimontovich()}) {
    cfg.interp = interp;
    CHECK(std::abs(simulate_ensemble(cfg, p).mean - 1.0) <= 1e-3);
  }
}

TEST_CASE("extinction fraction") {
  EnsembleSummary s;
  s.terminal_samples = {0.0, 0.0, 0.0};
  CHECK(extinction_fraction(s, 1e-8) == 1.0);
  s.terminal_samples = {0.5, 1.0, 2.0};
  CHECK(extinction_fraction(s, 1e-8) == 0.0);
  s.terminal_samples = {0.0, 1.0, 2.0, 0.0};
  CHECK(extinction_fraction(s, 0.0) == 0.5);
  CHECK_THROWS_AS(extinction_fraction(s, -1.0), DomainError);
}

TEST_CASE("one-sample KS statistic") {
  auto normal_cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const std::size_t n = 1000;
  std::vector<double> q;
  for (std::size_t i = 1; i <= n; ++i) q.push_back(normal_quantile((static_cast<double>(i) - 0.5) / n));
  CHECK(ks_distance(q, normal_cdf) <= 0.5 / n + 1e-9);

  const std::vector<double> zeros(10, 0.0);
  CHECK(ks_distance(zeros, [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); }) == 1.0);
  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, normal_cdf), DomainError);
}

TEST_CASE("two-sample KS statistic") {
  const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4}, c{5, 6, 7, 8}, d{1, 2, 5, 6};
  CHECK(ks_two_sample(a, b) == 0.0);
  CHECK(ks_two_sample(a, c) == 1.0);
  CHECK(ks_two_sample(a, d) == doctest::Approx(0.5));
  CHECK_THROWS_AS(ks_two_sample(a, std::vector<double>{}), DomainError);
}

TEST_CASE("histogram") {
  const std::vector<double> xs{0.0, 0.1, 0.5, 0.99, 1.0, 7.0};
  const Histogram h = make_histogram(xs, 4, 1.0);
  CHECK(h.edges.size() == 5);
  CHECK(h.counts == std::vector<std::size_t>{2, 0, 1, 3});
  const Histogram sturges = make_histogram(std::vector<double>(1000, 1.0));
  CHECK(sturges.counts.size() == 11);
}

TEST_CASE("HK ensemble approaches the stationary law") {
  SimulationConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_final = 20.0;
  cfg.n_paths = 2000;
  cfg.seed = 2024;
  const EnsembleSummary s = simulate_ensemble(cfg, kCanonical);
  REQUIRE(s.ks_vs_analytic.has_value());
  CHECK(*s.ks_vs_analytic <= 0.05);
  CHECK(s.extinct_fraction <= 0.01);
}

TEST_CASE("step-size guidance and thread resolution") {
  CHECK(dt_guidance(kCanonical, 1.0) == doctest::Approx(0.1 / (2 + 1 + 1 + 10)));
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}
