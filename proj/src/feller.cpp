#include "antiito/feller.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "antiito/errors.hpp"

namespace antiito {
namespace {

void check_scale_params(const ModelParams& p) {
  const bool finite = std::isfinite(p.q) && std::isfinite(p.r) && std::isfinite(p.v) && std::isfinite(p.c) &&
                      std::isfinite(p.sigma);
  if (!finite || p.q <= 0.0 || p.r < 0.0 || p.v <= 0.0 || p.c < 0.0 || p.sigma <= 0.0) {
    throw DomainError("scale/speed needs q > 0, r >= 0, v > 0, c >= 0, sigma > 0");
  }
}

double log_scale_density(const ModelParams& p, double log_eta) {
  const double s2 = p.sigma2();
  const double kappa = (p.q - p.c + s2) / s2;
  double value = -2.0 * kappa * log_eta;
  if (p.r > 0.0) value += 2.0 * p.r / (p.v * s2) * std::expm1(p.v * log_eta);
  return value;
}

double log_of_positive(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(what);
  return std::log(x);
}

// Levels as w = |ln xi|, checked to move strictly toward the boundary.
std::vector<double> to_w(Boundary b, std::span<const double> levels) {
  std::vector<double> w;
  w.reserve(levels.size());
  for (double xi : levels) {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("ladder levels must be positive and finite");
    const double lx = std::log(xi);
    const double d = b == Boundary::Infinity ? lx : -lx;
    if (!(d > 0.0)) throw DomainError("ladder levels must lie on the boundary's side of 1");
    if (!w.empty() && !(d > w.back())) throw DomainError("ladder levels must move strictly toward the boundary");
    w.push_back(d);
  }
  return w;
}

double judge_start(const ScaleSpeed& ss, Boundary b) {
  return b == Boundary::Zero ? ss.settled_zero : ss.settled_infinity;
}

enum class Order { ScaleOuter, SpeedOuter };

Functional functional(const ScaleSpeed& ss, Boundary b, std::span<const double> levels, LadderOptions opts,
                      Order order) {
  const std::vector<double> w = to_w(b, levels);
  const double dir = b == Boundary::Infinity ? 1.0 : -1.0;
  // ln(s xi) and ln(m xi) as functions of w.
  LogDensity log_a = [ls = ss.log_scale, dir](double w) {
    const double lx = dir * w;
    return ls(lx) + lx;
  };
  LogDensity log_b = [ls = ss.log_scale, lg = ss.log_g2, dir](double w) {
    const double lx = dir * w;
    return -ls(lx) - lg(lx) + lx;
  };
  opts.judge_from = std::max(opts.judge_from, judge_start(ss, b));
  NestedLadder ladder = order == Order::ScaleOuter ? NestedLadder(log_a, log_b, opts) : NestedLadder(log_b, log_a, opts);
  return run_ladder(
      w,
      [&](double target) {
        const double value = ladder.advance_to(target);
        return LadderStep{value, ladder.last_log_increment()};
      },
      opts);
}

}  // namespace

const char* to_string(Boundary b) noexcept { return b == Boundary::Zero ? "zero" : "infinity"; }

const char* to_string(FellerClass c) noexcept {
  switch (c) {
    case FellerClass::Exit: return "exit";
    case FellerClass::Entrance: return "entrance";
    case FellerClass::Natural: return "natural";
    case FellerClass::Regular: return "regular";
  }
  return "unknown";
}

ScaleSpeed scale_speed(const ModelParams& params) {
  check_scale_params(params);
  ScaleSpeed ss;
  ss.log_scale = [p = params](double lx) { return log_scale_density(p, lx); };
  ss.log_g2 = [ls2 = 2.0 * std::log(params.sigma)](double lx) { return ls2 + 2.0 * lx; };
  if (params.r > 0.0) {
    const double s2 = params.sigma2();
    const double lambda = 2.0 * params.r / (params.v * s2);
    const double k1 = 2.0 * (params.q - params.c + s2) / s2 - 1.0;
    // ln xi where the logistic term of the drift overtakes the linear one.
    const double lt = std::log((params.q - params.c + s2) / params.r) / params.v;
    if (std::isfinite(lt)) {
      ss.settled_infinity = std::max(lt + 1.0, 0.0);
      ss.settled_zero = std::max(1.0 - lt, 0.0);
    }
    // exp(lambda (xi^v - 1)) within 0.1% of its limit at 0.
    ss.settled_zero = std::max(ss.settled_zero, std::log(lambda / 1e-3) / params.v);
    // Inner integrals near 0 carry mass from xi ~ 1 until xi^{-k1} e^{-lambda} takes over.
    if (k1 > 0.0) ss.settled_zero = std::max(ss.settled_zero, (lambda + 10.0) / k1);
  }
  return ss;
}

ScaleSpeed brownian_scale_speed(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
  ScaleSpeed ss;
  ss.log_scale = [](double) { return 0.0; };
  ss.log_g2 = [ls2 = 2.0 * std::log(sigma)](double) { return ls2; };
  return ss;
}

double scale_density(const ModelParams& params, double eta) {
  check_scale_params(params);
  return std::exp(log_scale_density(params, log_of_positive(eta, "eta must be positive")));
}

double speed_density(const ModelParams& params, double xi) {
  check_scale_params(params);
  const double lx = log_of_positive(xi, "xi must be positive");
  return std::exp(-log_scale_density(params, lx) - 2.0 * std::log(params.sigma) - 2.0 * lx);
}

double scale_function(const ModelParams& params, double xi) {
  check_scale_params(params);
  log_of_positive(xi, "xi must be positive");
  if (xi == 1.0) return 0.0;
  auto s = [&](double eta) { return std::exp(log_scale_density(params, std::log(eta))); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double lo = std::min(1.0, xi), hi = std::max(1.0, xi);
  const double value = GK::integrate(s, lo, hi, 20, 1e-12);
  return xi > 1.0 ? value : -value;
}

std::vector<double> default_levels(Boundary b, std::size_t count) {
  std::vector<double> levels(count);
  for (std::size_t k = 0; k < count; ++k) {
    const int e = static_cast<int>(k) + 1;
    levels[k] = std::ldexp(1.0, b == Boundary::Infinity ? e : -e);
  }
  return levels;
}

Functional sigma_functional(const ScaleSpeed& ss, Boundary b, std::span<const double> levels,
                            const LadderOptions& opts) {
  return functional(ss, b, levels, opts, Order::ScaleOuter);
}

Functional n_functional(const ScaleSpeed& ss, Boundary b, std::span<const double> levels, const LadderOptions& opts) {
  return functional(ss, b, levels, opts, Order::SpeedOuter);
}

Functional sigma_functional(const ModelParams& params, Boundary b, std::span<const double> levels,
                            const LadderOptions& opts) {
  return sigma_functional(scale_speed(params), b, levels, opts);
}

Functional n_functional(const ModelParams& params, Boundary b, std::span<const double> levels,
                        const LadderOptions& opts) {
  return n_functional(scale_speed(params), b, levels, opts);
}

FellerClass feller_class(const Functional& sigma, const Functional& n) noexcept {
  if (!sigma.diverges) return n.diverges ? FellerClass::Exit : FellerClass::Regular;
  return n.diverges ? FellerClass::Natural : FellerClass::Entrance;
}

BoundaryVerdict classify(const ScaleSpeed& ss, Boundary b, const LadderOptions& opts) {
  const std::vector<double> levels = default_levels(b);
  BoundaryVerdict v;
  v.sigma = sigma_functional(ss, b, levels, opts);
  v.n = n_functional(ss, b, levels, opts);
  v.cls = feller_class(v.sigma, v.n);
  return v;
}

BoundaryReport classify_boundary(const ModelParams& params, const LadderOptions& opts) {
  const ScaleSpeed ss = scale_speed(params);
  BoundaryReport report;
  report.zero = classify(ss, Boundary::Zero, opts);
  report.infinity = classify(ss, Boundary::Infinity, opts);
  report.positive_net_growth = params.net_growth() > 0.0;
  return report;
}

}  // namespace antiito
