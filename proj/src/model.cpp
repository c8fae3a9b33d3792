#include "antiito/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "antiito/errors.hpp"

namespace antiito {
namespace {

// ln(1e-16): the truncation depth below the integrand peak.
constexpr double kLogTruncation = -36.841361487904734;

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

template <class F>
double gk(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-13);
}

// Integrand of the cumulative distribution after the substitution t = rate * x^v:
//   p_s(x) dx = exp(log_norm + (a - 1) ln t - t) dt,  a = gamma shape.
struct GammaVariable {
  double shape;
  double log_norm;

  double log_integrand(double t) const { return log_norm + (shape - 1.0) * std::log(t) - t; }
  double peak() const { return std::max(shape - 1.0, 0.0); }
  double width() const { return std::sqrt(std::max(shape, 1.0)); }

  // Upper end of the truncated domain: beyond it the t-integrand stays below
  // 1e-16 of its peak (of its value at t = 1 when the peak is a pole at 0).
  double truncation() const {
    const double ref_t = shape >= 1.0 ? peak() : 1.0;
    const double ref = (shape - 1.0) * (ref_t > 0.0 ? std::log(ref_t) : 0.0) - ref_t;
    auto excess = [&](double t) { return (shape - 1.0) * std::log(t) - t - ref - kLogTruncation; };
    double lo = std::max(ref_t, 1e-300);
    double step = width();
    double hi = lo + step;
    while (excess(hi) > 0.0) {
      lo = hi;
      step *= 2.0;
      hi = lo + step;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
  }

  double integrate(double t_end) const {
    if (t_end <= 0.0) return 0.0;
    const double t_peak = peak();
    const double w = width();
    std::vector<double> cuts{0.0};
    for (double k : {-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
      const double b = t_peak + k * w;
      if (b > 0.0 && b < t_end) cuts.push_back(b);
    }
    cuts.push_back(t_end);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto f = [this](double t) { return t > 0.0 ? std::exp(log_integrand(t)) : 0.0; };
    double total = 0.0;
    // First piece carries the endpoint behaviour t^(a-1) at the origin.
    const double b1 = cuts[1];
    if (shape < 1.0) {
      // u = t^a turns t^(a-1) dt into du / a.
      const double inv = 1.0 / shape;
      auto g = [&](double u) { return u > 0.0 ? std::exp(-std::pow(u, inv)) : 1.0; };
      total += std::exp(log_norm) / shape * gk(g, 0.0, std::pow(b1, shape));
    } else {
      total += gk(f, 0.0, b1);
    }
    for (std::size_t i = 1; i + 1 < cuts.size(); ++i) total += gk(f, cuts[i], cuts[i + 1]);
    return total;
  }
};

GammaVariable gamma_variable(const StationaryDensity& d) {
  const double a = d.gamma_shape();
  return {a, d.log_k0() - std::log(d.params().v) - a * std::log(d.rate())};
}

// sigma^2 within a few ulps of 2(c - q) counts as the transition itself,
// so sigma = sqrt(2 (c - q)) lands on the degenerate side.
bool above_transition(const ModelParams& p) {
  const double s2 = p.sigma2(), crit = 2.0 * (p.c - p.q);
  return s2 - crit > 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(s2), std::abs(crit));
}

}  // namespace

void validate(const ModelParams& p) {
  for (double f : {p.q, p.r, p.v, p.c, p.sigma}) require(std::isfinite(f), "model parameters must be finite");
  require(p.q > 0.0, "q must be positive");
  require(p.r > 0.0, "r must be positive");
  require(p.v > 0.0, "v must be positive");
  require(p.c >= 0.0, "c must be non-negative");
  require(p.sigma >= 0.0, "sigma must be non-negative");
}

void validate_stochastic(const ModelParams& p) {
  validate(p);
  require(p.sigma > 0.0, "sigma must be positive for stochastic operations");
}

std::vector<FixedPoint> fixed_points(const ModelParams& p) {
  validate(p);
  if (p.net_growth() > 0.0) {
    return {{0.0, Stability::Unstable}, {std::pow(p.net_growth() / p.r, 1.0 / p.v), Stability::Stable}};
  }
  return {{0.0, Stability::Stable}};
}

double ln_gamma(double x) {
  require(std::isfinite(x) && x > 0.0, "ln_gamma requires x > 0");
  return boost::math::lgamma(x);
}

StationaryDensity::StationaryDensity(const ModelParams& params) : params_(params) {
  validate_stochastic(params_);
  const double s2 = params_.sigma2();
  if (!above_transition(params_)) {
    throw DegenerateDensity("sigma^2 <= 2(c - q): the stationary law is the point mass at zero");
  }
  beta_ = 2.0 * params_.net_growth() / s2;
  lambda_ = 2.0 * params_.r / (params_.v * s2);
  const double a = (beta_ + 1.0) / params_.v;
  log_k0_ = std::log(params_.v) - ln_gamma(a) + a * std::log(lambda_);
}

double StationaryDensity::log_pdf(double x) const {
  if (!(x > 0.0)) throw DomainError("log_pdf requires x > 0");
  return log_k0_ + beta_ * std::log(x) - lambda_ * std::pow(x, params_.v);
}

PdfValue StationaryDensity::pdf(double x) const {
  if (!(x >= 0.0)) throw DomainError("stationary density requires x >= 0");
  if (x == 0.0) {
    if (beta_ > 0.0) return {0.0, false};
    if (beta_ == 0.0) return {std::exp(log_k0_), false};
    return {std::numeric_limits<double>::quiet_NaN(), true};
  }
  return {std::exp(log_pdf(x)), false};
}

double StationaryDensity::cdf(double x) const {
  if (!(x >= 0.0)) throw DomainError("stationary cdf requires x >= 0");
  if (x == 0.0) return 0.0;
  const GammaVariable g = gamma_variable(*this);
  const double t = std::isinf(x) ? x : std::exp(std::log(lambda_) + params_.v * std::log(x));
  return g.integrate(std::min(t, g.truncation()));
}

double StationaryDensity::truncation_point() const {
  const double t = gamma_variable(*this).truncation();
  return std::exp((std::log(t) - std::log(lambda_)) / params_.v);
}

PdfValue stationary_pdf(const StationaryDensity& d, double x) { return d.pdf(x); }
double stationary_cdf(const StationaryDensity& d, double x) { return d.cdf(x); }

double stationary_mode(const ModelParams& p) {
  validate_stochastic(p);
  if (p.net_growth() > 0.0) return std::pow(p.net_growth() / p.r, 1.0 / p.v);
  return 0.0;
}

RegimeClass classify_regime(const ModelParams& p) {
  validate_stochastic(p);
  if (p.net_growth() > 0.0) return RegimeClass::RobustInterior;
  if (above_transition(p)) return RegimeClass::DecreasingMode;
  return RegimeClass::DegenerateAtZero;
}

const char* to_string(RegimeClass r) noexcept {
  switch (r) {
    case RegimeClass::RobustInterior: return "robust_interior";
    case RegimeClass::DecreasingMode: return "decreasing_mode";
    case RegimeClass::DegenerateAtZero: return "degenerate_at_zero";
  }
  return "unknown";
}

std::optional<double> critical_sigma_squared(const ModelParams& p) {
  validate(p);
  if (p.net_growth() > 0.0) return std::nullopt;
  return 2.0 * (p.c - p.q);
}

}  // namespace antiito
