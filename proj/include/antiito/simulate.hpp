#pragma once

// Seeded Monte Carlo ensembles for the chemotherapy SDE (or any scalar SdeSpec).
//
// Every path p draws its Wiener increments from its own generator seeded by
// (seed, p), so a summary is bit-identical regardless of how many threads ran
// it or in which order the paths finished.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "antiito/calculus.hpp"
#include "antiito/model.hpp"

namespace antiito {

enum class Scheme {
  EulerMaruyama,  ///< on the effective Ito drift
  Milstein,       ///< EM plus 1/2 g g' (dW^2 - dt)
  LogTransform,   ///< exact-positivity scheme in y = ln x; linear noise only
  AlphaPoint,     ///< raw drift, noise coefficient read at the interpretation's evaluation point
};

const char* to_string(Scheme s) noexcept;

struct SimulationConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::EulerMaruyama;
  Interpretation interp = Interpretation::hanggi_klimontovich();
  double x0 = 1.0;
  /// States at or below this are absorbed at 0. Defaults to 1e-8 * x0.
  std::optional<double> absorb_eps;
  /// Fraction of the horizon treated as burn-in. Only terminal states are
  /// sampled, so this is recorded but does not change the ensemble.
  double burn_in = 0.5;
  /// Histogram bin count; 0 selects Sturges' rule.
  std::size_t histogram_bins = 0;
  /// Upper histogram edge; 0 uses the largest sample. Larger samples land in the last bin.
  double histogram_max = 0.0;

  double absorb_threshold() const noexcept { return absorb_eps.value_or(1e-8 * x0); }
  /// Number of equal steps covering [0, t_final] with step size <= dt.
  std::size_t n_steps() const;
  double step_size() const { return t_final / static_cast<double>(n_steps()); }
};

/// Throws DomainError on dt <= 0, t_final < dt, n_paths == 0, x0 <= 0,
/// burn_in outside [0, 1) or a negative absorption threshold.
void validate(const SimulationConfig& cfg);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

Histogram make_histogram(std::span<const double> samples, std::size_t bins = 0, double upper = 0.0);

struct EnsembleSummary {
  std::vector<double> terminal_samples;  ///< in path order
  double extinct_fraction = 0.0;
  double mean = 0.0;
  Histogram histogram;
  /// KS distance to the analytic stationary law; present for HK ensembles
  /// whose parameters admit a proper stationary density.
  std::optional<double> ks_vs_analytic;
  /// Paths dropped after a non-finite state (at most 0.1% of n_paths).
  std::size_t blown_paths = 0;
};

/// Generator for path `path` of an ensemble seeded with `seed`.
std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path);

/// One step of cfg.scheme from `state` at time t with Wiener increment dW over cfg.dt.
/// Negative results of EM/Milstein/AlphaPoint are clamped to 0. Throws
/// NumericalBlowup on a non-finite result.
double step(double state, double t, double dW, const SimulationConfig& cfg, const SdeSpec& spec);

/// Integrates one path from cfg.x0 with the given increments (one per step of
/// size cfg.dt), applying absorption. Returns the terminal state.
double integrate_path(const SdeSpec& spec, const SimulationConfig& cfg, std::span<const double> increments);

/// Chemotherapy ensemble; throws EnsembleBlowup when more than 0.1% of paths blow up.
EnsembleSummary simulate_ensemble(const SimulationConfig& cfg, const ModelParams& params, unsigned threads = 0);
/// Ensemble for an arbitrary scalar SDE (no analytic KS statistic).
EnsembleSummary simulate_ensemble(const SimulationConfig& cfg, const SdeSpec& spec, unsigned threads = 0);

double extinction_fraction(const EnsembleSummary& summary, double eps);

/// sup |F_n - F| between the empirical CDF of `samples` and `cdf`.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);
/// sup |F_n - G_m| between two empirical CDFs.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Step-size guidance for EM on the model: 0.1 / (q + c + sigma^2 + r x_cap^v),
/// x_cap = 10 * max(mode, x0).
double dt_guidance(const ModelParams& params, double x0);

/// Thread count: `requested` if nonzero, else ANTIITO_THREADS if set and
/// nonzero, else the hardware concurrency.
unsigned resolve_threads(unsigned requested = 0);

}  // namespace antiito
