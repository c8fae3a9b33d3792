#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "antiito/errors.hpp"
#include "antiito/fpe.hpp"
#include "support.hpp"

using namespace antiito;
using testing_support::kCanonical;

namespace {

double stationary_value(double x) { return 4.0 * x * x * std::exp(-2.0 * x); }
double stationary_cdf_closed(double x) { return 1.0 - std::exp(-2.0 * x) * (1.0 + 2.0 * x + 2.0 * x * x); }

// max |J| over interior faces relative to max |a p|, with p the stationary density on the grid.
double flux_residual(std::size_t cells) {
  const Grid g(0.0, 8.0, cells);
  const DensityField f = sample_field(g, stationary_value);
  double worst_flux = 0.0, worst_adv = 0.0;
  for (std::size_t i = 1; i < cells; ++i) {
    worst_flux = std::max(worst_flux, std::abs(flux_at(i, f, kCanonical)));
    const double x = g.face(i);
    worst_adv = std::max(worst_adv, std::abs(drift_velocity(kCanonical, x) * stationary_value(x)));
  }
  return worst_flux / worst_adv;
}

double steady_l1(std::size_t cells) {
  const Grid g(0.0, 8.0, cells);
  const DensityField f = fpe_evolve(kCanonical, 1.0, 50.0, g, max_stable_dt(g, kCanonical));
  return l1_distance(f, stationary_cdf_closed);
}

}  // namespace

TEST_CASE("grid") {
  const Grid g(0.0, 8.0, 64);
  CHECK(g.spacing() == 0.125);
  CHECK(g.center(0) == 0.0625);
  CHECK(g.face(64) == 8.0);
  CHECK_THROWS_AS(Grid(0.0, 8.0, 15), DomainError);
  CHECK_THROWS_AS(Grid(1.0, 1.0, 32), DomainError);
  CHECK_THROWS_AS(Grid(-1.0, 1.0, 32), DomainError);
}

TEST_CASE("flux values") {
  const Grid g(0.0, 8.0, 64);
  const DensityField zero(g);
  for (std::size_t i = 0; i <= 64; ++i) CHECK(flux_at(i, zero, kCanonical) == 0.0);
  const DensityField f = sample_field(g, stationary_value);
  CHECK(flux_at(0, f, kCanonical) == 0.0);
  CHECK(flux_at(64, f, kCanonical) == 0.0);
  CHECK(drift_velocity(kCanonical, 0.0) == 0.0);
}

TEST_CASE("stationary flux residual") {
  const double coarse = flux_residual(2048), fine = flux_residual(4096);
  CHECK(fine <= 1.05e-3);
  CHECK(coarse / fine >= 1.9);
}

TEST_CASE("single steps") {
  const Grid g(0.0, 8.0, 512);
  const DensityField f = sample_field(g, stationary_value);
  const double dt = max_stable_dt(g, kCanonical);
  CHECK(dt <= 0.4 * g.spacing() * g.spacing() / (kCanonical.sigma2() * 64.0));

  const DensityField same = fpe_step(f, kCanonical, 0.0);
  CHECK(same.values == f.values);

  const DensityField next = fpe_step(f, kCanonical, dt);
  CHECK(std::abs(next.mass() - f.mass()) <= 1e-12);
  double l1 = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) l1 += std::abs(next.values[i] - f.values[i]) * g.spacing();
  CHECK(l1 <= 1e-6);
  CHECK(next.time == doctest::Approx(dt));
  CHECK(next.clip_events == 0);
}

TEST_CASE("oversized steps are detected") {
  const Grid g(0.0, 8.0, 256);
  const DensityField spike = initial_condition(g, g.center(128), 0.2);
  CHECK_THROWS_AS(fpe_step(spike, kCanonical, 20.0 * max_stable_dt(g, kCanonical)), StabilityError);
  CHECK_THROWS_AS(fpe_evolve(kCanonical, 1.0, 1.0, g, 2.0 * max_stable_dt(g, kCanonical)), StabilityError);
}

TEST_CASE("initial condition") {
  const Grid g(0.0, 8.0, 256);
  const DensityField f = fpe_evolve(kCanonical, 1.0, 0.0, g, max_stable_dt(g, kCanonical));
  CHECK(std::abs(f.mass() - 1.0) <= 1e-12);
  const auto peak = std::max_element(f.values.begin(), f.values.end()) - f.values.begin();
  CHECK(std::abs(g.center(static_cast<std::size_t>(peak)) - 1.0) <= g.spacing());
  CHECK_THROWS_AS(initial_condition(g, 9.0), DomainError);
}

TEST_CASE("zero-flux evolution conserves mass and stays non-negative") {
  const Grid g(0.0, 8.0, 128);
  const double t = 5.0;
  const auto snaps = fpe_evolve_snapshots(kCanonical, 2.0, std::vector<double>{0.5, 1.0, t}, g,
                                          max_stable_dt(g, kCanonical));
  REQUIRE(snaps.size() == 3);
  for (const DensityField& f : snaps) {
    CHECK(std::abs(f.mass() - 1.0) <= 1e-10 * std::max(1.0, f.time));
    CHECK(std::all_of(f.values.begin(), f.values.end(), [](double v) { return v >= -1e-14; }));
    CHECK(f.clip_events == 0);
  }
  CHECK(snaps[2].time == t);
}

TEST_CASE("dense propagation equals repeated explicit steps") {
  const Grid g(0.0, 4.0, 16);
  const double dt = max_stable_dt(g, kCanonical);
  const double t = 3000.0 * dt;
  for (BoundaryMode mode : {BoundaryMode::ZeroFlux, BoundaryMode::AbsorbingAtZero}) {
    const DensityField fast = fpe_evolve(kCanonical, 1.0, t, g, dt, mode);
    DensityField slow = initial_condition(g, 1.0);
    for (int k = 0; k < 3000; ++k) slow = fpe_step(slow, kCanonical, dt, mode);
    for (std::size_t i = 0; i < 16; ++i) CHECK(fast.values[i] == doctest::Approx(slow.values[i]).epsilon(1e-10));
    CHECK(fast.absorbed_mass == doctest::Approx(slow.absorbed_mass).epsilon(1e-10));
  }
}

TEST_CASE("absorbing mode tallies lost mass") {
  const ModelParams eradicating{1.0, 1.0, 1.0, 2.0, 1.0};
  const Grid g(0.0, 4.0, 128);
  const DensityField f =
      fpe_evolve(eradicating, 1.0, 10.0, g, max_stable_dt(g, eradicating), BoundaryMode::AbsorbingAtZero);
  CHECK(f.absorbed_mass > 0.1);
  CHECK(f.absorbed_mass <= 1.0);
  CHECK(f.mass() + f.absorbed_mass == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.values[0] == 0.0);
}

TEST_CASE("near-deterministic field stays at the fixed point") {
  ModelParams p = kCanonical;
  p.sigma = 1e-6;
  const Grid g(0.0, 2.0, 128);
  const std::vector<double> times{0.5, 2.0, 10.0};
  for (const DensityField& f : fpe_evolve_snapshots(p, 1.0, times, g, max_stable_dt(g, p))) {
    double mean = 0.0;
    for (std::size_t i = 0; i < g.n_cells(); ++i) mean += g.center(i) * f.values[i] * g.spacing();
    const auto peak = std::max_element(f.values.begin(), f.values.end()) - f.values.begin();
    CHECK(std::abs(mean - 1.0) <= 2.0 * g.spacing());
    CHECK(std::abs(g.center(static_cast<std::size_t>(peak)) - 1.0) <= 2.0 * g.spacing());
  }
}

TEST_CASE("steady state converges under refinement") {
  const double coarse = steady_l1(256), fine = steady_l1(512);
  CHECK(fine <= 1e-2);
  CHECK(coarse / fine >= 1.7);
}

TEST_CASE("distance helpers and field cdf") {
  const Grid g(0.0, 8.0, 1024);
  DensityField f(g);
  for (std::size_t i = 0; i < g.n_cells(); ++i) {
    f.values[i] = (stationary_cdf_closed(g.face(i + 1)) - stationary_cdf_closed(g.face(i))) / g.spacing();
  }
  // Only the reference mass beyond x = 8 remains.
  CHECK(l1_distance(f, stationary_cdf_closed) == doctest::Approx(1.0 - stationary_cdf_closed(8.0)).epsilon(1e-6));
  CHECK(ks_distance(f, stationary_cdf_closed) <= 1e-3);
  CHECK(f.cdf(-1.0) == 0.0);
  CHECK(f.cdf(8.0) == doctest::Approx(f.mass()).epsilon(1e-14));
  CHECK(f.cdf(g.face(10)) == doctest::Approx(stationary_cdf_closed(g.face(10))).epsilon(1e-12));
}

TEST_CASE("suggested truncation point") {
  const double x_max = suggested_x_max(kCanonical);
  CHECK(stationary_value(x_max) < 1e-12 * stationary_value(1.0));
  CHECK(stationary_value(0.9 * x_max) > 1e-12 * stationary_value(1.0));
}
