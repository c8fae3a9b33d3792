#include "antiito/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

#include "antiito/errors.hpp"

namespace antiito {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Adapter exposing an SdeSpec through the coefficient interface used by advance().
struct SpecCoefficients {
  const SdeSpec& spec;
  double drift(double x, double t) const { return spec.drift(x, t); }
  double diffusion(double x, double t) const { return spec.diffusion(x, t); }
  double diffusion_dx(double x, double t) const { return spec.diffusion_dx(x, t); }
  std::optional<double> linear_noise() const { return spec.linear_noise; }
};

// Inlined coefficients of the chemotherapy model.
struct ChemoCoefficients {
  double q, r, v, c, sigma;

  double crowding(double x) const {
    if (v == 1.0) return x;
    if (v == 2.0) return x * x;
    return std::pow(x, v);
  }
  double drift(double x, double) const { return x * (q - c - r * crowding(x)); }
  double diffusion(double x, double) const { return sigma * x; }
  double diffusion_dx(double, double) const { return sigma; }
  std::optional<double> linear_noise() const { return sigma; }
};

// One step without error reporting: non-finite results come back as NaN or inf.
template <class Coeffs>
double advance(const Coeffs& m, Scheme scheme, double alpha, double x, double t, double dt, double dW) {
  switch (scheme) {
    case Scheme::EulerMaruyama: {
      const double g = m.diffusion(x, t);
      const double f = m.drift(x, t) + alpha * g * m.diffusion_dx(x, t);
      return std::max(x + f * dt + g * dW, 0.0);
    }
    case Scheme::Milstein: {
      const double g = m.diffusion(x, t);
      const double gg = g * m.diffusion_dx(x, t);
      const double f = m.drift(x, t) + alpha * gg;
      return std::max(x + f * dt + g * dW + 0.5 * gg * (dW * dW - dt), 0.0);
    }
    case Scheme::LogTransform: {
      if (x <= 0.0) return 0.0;
      const double s = *m.linear_noise();
      const double g = m.diffusion(x, t);
      const double f = m.drift(x, t) + alpha * g * m.diffusion_dx(x, t);
      return std::exp(std::log(x) + (f / x - 0.5 * s * s) * dt + s * dW);
    }
    case Scheme::AlphaPoint: {
      // Predictor with the left-point coefficient, corrector re-reads g at the
      // alpha-point of [x, predicted endpoint].
      const double f = m.drift(x, t);
      const double predicted = x + f * dt + m.diffusion(x, t) * dW;
      const double xa = x + alpha * (predicted - x);
      return std::max(x + f * dt + m.diffusion(xa, t + alpha * dt) * dW, 0.0);
    }
  }
  return kNaN;
}

enum class PathStatus : unsigned char { Alive, Absorbed, Blown };

struct PathResult {
  double terminal = 0.0;
  double blown_at = 0.0;
  PathStatus status = PathStatus::Alive;
};

template <class Coeffs>
PathResult run_path(const Coeffs& m, const SimulationConfig& cfg, std::size_t n_steps, double dt, std::size_t path) {
  std::mt19937_64 gen = path_stream(cfg.seed, path);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  const double alpha = cfg.interp.alpha();
  const double eps = cfg.absorb_threshold();
  double x = cfg.x0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    x = advance(m, cfg.scheme, alpha, x, t, dt, normal(gen));
    if (!std::isfinite(x)) return {kNaN, t + dt, PathStatus::Blown};
    if (x <= eps) return {0.0, 0.0, PathStatus::Absorbed};
  }
  return {x, 0.0, PathStatus::Alive};
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  constexpr std::size_t kChunk = 16;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>((n + kChunk - 1) / kChunk)));
  std::vector<std::jthread> pool;
  pool.reserve(count - 1);
  for (unsigned i = 1; i < count; ++i) pool.emplace_back(worker);
  worker();
}

template <class Coeffs>
EnsembleSummary run_ensemble(const Coeffs& m, const SimulationConfig& cfg, unsigned threads) {
  validate(cfg);
  if (cfg.scheme == Scheme::LogTransform && !m.linear_noise()) {
    throw DomainError("log_transform scheme requires linear noise g(x) = sigma x");
  }
  const std::size_t n_steps = cfg.n_steps();
  const double dt = cfg.step_size();

  std::vector<PathResult> results(cfg.n_paths);
  parallel_for(cfg.n_paths, resolve_threads(threads),
               [&](std::size_t p) { results[p] = run_path(m, cfg, n_steps, dt, p); });

  EnsembleSummary out;
  out.terminal_samples.reserve(cfg.n_paths);
  double first_blowup = std::numeric_limits<double>::infinity();
  for (const PathResult& r : results) {
    if (r.status == PathStatus::Blown) {
      ++out.blown_paths;
      first_blowup = std::min(first_blowup, r.blown_at);
    } else {
      out.terminal_samples.push_back(r.terminal);
    }
  }
  if (static_cast<double>(out.blown_paths) > 1e-3 * static_cast<double>(cfg.n_paths)) {
    std::ostringstream msg;
    msg << out.blown_paths << " of " << cfg.n_paths << " paths produced non-finite states (first at t=" << first_blowup
        << ", dt=" << dt << "); reduce dt or use the log_transform scheme";
    throw EnsembleBlowup(msg.str(), out.blown_paths, first_blowup);
  }

  const auto& s = out.terminal_samples;
  double sum = 0.0;
  for (double x : s) sum += x;
  out.mean = s.empty() ? kNaN : sum / static_cast<double>(s.size());
  out.extinct_fraction = extinction_fraction(out, cfg.absorb_threshold());
  out.histogram = make_histogram(s, cfg.histogram_bins, cfg.histogram_max);
  return out;
}

}  // namespace

const char* to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::EulerMaruyama: return "euler_maruyama";
    case Scheme::Milstein: return "milstein";
    case Scheme::LogTransform: return "log_transform";
    case Scheme::AlphaPoint: return "alpha_point";
  }
  return "unknown";
}

std::size_t SimulationConfig::n_steps() const {
  return static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
}

void validate(const SimulationConfig& cfg) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw DomainError(msg);
  };
  require(std::isfinite(cfg.dt) && cfg.dt > 0.0, "dt must be positive");
  require(std::isfinite(cfg.t_final) && cfg.t_final >= cfg.dt, "t_final must be at least dt");
  require(cfg.n_paths >= 1, "n_paths must be at least 1");
  require(std::isfinite(cfg.x0) && cfg.x0 > 0.0, "x0 must be positive");
  require(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0, "burn_in must lie in [0, 1)");
  require(cfg.absorb_threshold() >= 0.0, "absorb_eps must be non-negative");
  require(cfg.histogram_max >= 0.0, "histogram_max must be non-negative");
}

Histogram make_histogram(std::span<const double> samples, std::size_t bins, double upper) {
  if (bins == 0) {
    bins = samples.empty() ? 1 : static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(samples.size())))) + 1;
  }
  if (!(upper > 0.0)) {
    upper = samples.empty() ? 0.0 : *std::max_element(samples.begin(), samples.end());
    if (!(upper > 0.0)) upper = 1.0;
  }
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = upper * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  const double width = upper / static_cast<double>(bins);
  for (double x : samples) {
    const auto b = static_cast<std::size_t>(std::max(0.0, x / width));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

double step(double state, double t, double dW, const SimulationConfig& cfg, const SdeSpec& spec) {
  if (!(state >= 0.0)) throw DomainError("state must be non-negative");
  if (cfg.scheme == Scheme::LogTransform && !spec.linear_noise) {
    throw DomainError("log_transform scheme requires linear noise g(x) = sigma x");
  }
  const double next = advance(SpecCoefficients{spec}, cfg.scheme, cfg.interp.alpha(), state, t, cfg.dt, dW);
  if (!std::isfinite(next)) throw NumericalBlowup("non-finite state at t=" + std::to_string(t + cfg.dt), t + cfg.dt);
  return next;
}

double integrate_path(const SdeSpec& spec, const SimulationConfig& cfg, std::span<const double> increments) {
  const double eps = cfg.absorb_threshold();
  double x = cfg.x0;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    x = step(x, static_cast<double>(k) * cfg.dt, increments[k], cfg, spec);
    if (x <= eps) return 0.0;
  }
  return x;
}

EnsembleSummary simulate_ensemble(const SimulationConfig& cfg, const ModelParams& params, unsigned threads) {
  validate_stochastic(params);
  EnsembleSummary out =
      run_ensemble(ChemoCoefficients{params.q, params.r, params.v, params.c, params.sigma}, cfg, threads);
  if (cfg.interp == Interpretation::hanggi_klimontovich() && classify_regime(params) != RegimeClass::DegenerateAtZero &&
      !out.terminal_samples.empty()) {
    const StationaryDensity d(params);
    out.ks_vs_analytic = ks_distance(out.terminal_samples, [&d](double x) { return d.cdf(x); });
  }
  return out;
}

EnsembleSummary simulate_ensemble(const SimulationConfig& cfg, const SdeSpec& spec, unsigned threads) {
  return run_ensemble(SpecCoefficients{spec}, cfg, threads);
}

double extinction_fraction(const EnsembleSummary& summary, double eps) {
  if (!(eps >= 0.0)) throw DomainError("eps must be non-negative");
  const auto& s = summary.terminal_samples;
  if (s.empty()) return 0.0;
  const auto n = std::count_if(s.begin(), s.end(), [eps](double x) { return x <= eps; });
  return static_cast<double>(n) / static_cast<double>(s.size());
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_distance requires at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample requires non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double dt_guidance(const ModelParams& params, double x0) {
  validate(params);
  const double mode = params.net_growth() > 0.0 ? std::pow(params.net_growth() / params.r, 1.0 / params.v) : 0.0;
  const double x_cap = 10.0 * std::max(mode, x0);
  return 0.1 / (params.q + params.c + params.sigma2() + params.r * std::pow(x_cap, params.v));
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ANTIITO_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace antiito
