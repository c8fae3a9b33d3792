#include "antiito/ladder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "antiito/errors.hpp"

namespace antiito {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// 10-point Gauss-Legendre rule mapped to [0, 1].
struct UnitRule {
  std::array<double, 10> node{};
  std::array<double, 10> log_weight{};

  UnitRule() {
    using G = boost::math::quadrature::gauss<double, 10>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    std::size_t k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        if (x[i] == 0.0 && sign > 0.0) continue;
        node[k] = 0.5 * (1.0 + sign * x[i]);
        log_weight[k] = std::log(0.5 * w[i]);
        ++k;
      }
    }
  }
};

const UnitRule& unit_rule() {
  static const UnitRule rule;
  return rule;
}

double log_sum(std::span<const double> terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

// ln of (w - a) deviation test: how far lf bends away from its chord on [a, b].
double bend(double la, double lm, double lb) { return std::abs(lm - 0.5 * (la + lb)); }

void require_finite(double v) {
  if (!std::isfinite(v)) throw Inconclusive("integrand left the representable range before a verdict");
}

}  // namespace

double log_add(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

Functional Functional::finite(double log_value) { return {false, std::exp(log_value), log_value}; }

Functional Functional::divergent() {
  const double inf = std::numeric_limits<double>::infinity();
  return {true, inf, inf};
}

std::optional<Functional> judge(std::span<const LadderStep> steps, const LadderOptions& opts) {
  const std::size_t n = steps.size();
  if (n < std::max<std::size_t>(opts.min_levels, 3)) return std::nullopt;
  const double last = steps[n - 1].log_value, prev = steps[n - 2].log_value;
  if (last == kNegInf) return Functional::finite(last);

  const double d1 = steps[n - 1].log_increment, d2 = steps[n - 2].log_increment, d3 = steps[n - 3].log_increment;
  const double threshold = std::log(opts.increment_ratio);
  const bool shrinking = d1 - d2 < threshold;
  if (d1 - last <= std::log(opts.rel_tol) && shrinking) return Functional::finite(last);
  if (std::exp(last - prev) > opts.growth_factor && std::exp(prev - steps[n - 3].log_value) > opts.growth_factor) {
    return Functional::divergent();
  }
  if (!shrinking && d2 - d3 >= threshold) return Functional::divergent();
  return std::nullopt;
}

double log_panel_integral(const LogDensity& lf, double a, double b, double la, double lb) {
  const UnitRule& rule = unit_rule();
  const double h = b - a;
  if (!(h > 0.0)) return kNegInf;
  std::array<double, 10> terms{};
  const double k = (lb - la) / h;
  if (!std::isfinite(la) || !std::isfinite(lb) || std::abs(k * h) < 0.5) {
    const double log_h = std::log(h);
    for (std::size_t j = 0; j < terms.size(); ++j) terms[j] = rule.log_weight[j] + log_h + lf(a + h * rule.node[j]);
    return log_sum(terms);
  }
  // Substitute tau with d tau = exp(k (w - a)) dw / scale so the exponential
  // trend is integrated exactly; the remaining factor is smooth.
  const double kh = k * h;
  double log_scale;
  if (k > 0.0) {
    log_scale = kh + std::log(-std::expm1(-kh)) - std::log(k);
  } else {
    log_scale = std::log(-std::expm1(kh)) - std::log(-k);
  }
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const double tau = rule.node[j];
    double w;
    if (k > 0.0) {
      w = b + std::log(tau + (1.0 - tau) * std::exp(-kh)) / k;
    } else {
      w = a + std::log1p(tau * std::expm1(kh)) / k;
    }
    w = std::clamp(w, a, b);
    terms[j] = rule.log_weight[j] + log_scale + lf(w) - k * (w - a);
  }
  return log_sum(terms);
}

NestedLadder::NestedLadder(LogDensity outer, LogDensity inner, const LadderOptions& opts)
    : outer_(std::move(outer)), inner_(std::move(inner)), opts_(opts), h_(opts.max_panel) {}

double NestedLadder::advance_to(double w_target) {
  log_increment_ = kNegInf;
  while (w_ < w_target) {
    const double a = w_;
    const double la_o = outer_(a), la_i = inner_(a);
    require_finite(la_o);
    require_finite(la_i);
    double h = std::min(h_, w_target - a);
    double b, lb_o, lb_i;
    for (;;) {
      b = (h >= w_target - a) ? w_target : a + h;
      lb_o = outer_(b);
      lb_i = inner_(b);
      require_finite(lb_o);
      require_finite(lb_i);
      const double m = 0.5 * (a + b);
      if (bend(la_o, outer_(m), lb_o) <= opts_.panel_tol && bend(la_i, inner_(m), lb_i) <= opts_.panel_tol) break;
      h *= 0.5;
      if (h <= 1e-13 * (1.0 + a)) throw Inconclusive("panel width underflow while resolving the integrand");
    }
    if (++panels_ > opts_.panel_budget) throw Inconclusive("panel budget exhausted before a verdict");

    const double cum_a = log_inner_cum_;
    auto cumulative = [&](double w, double lw_i) {
      return log_add(cum_a, log_panel_integral(inner_, a, w, la_i, lw_i));
    };
    const double cum_b = cumulative(b, lb_i);
    auto product = [&](double w) { return outer_(w) + cumulative(w, inner_(w)); };
    const double piece = log_panel_integral(product, a, b, la_o + cum_a, lb_o + cum_b);
    log_value_ = log_add(log_value_, piece);
    log_increment_ = log_add(log_increment_, piece);
    log_inner_cum_ = cum_b;
    w_ = b;
    h_ = std::min(2.0 * h, opts_.max_panel);
  }
  return log_value_;
}

SingleLadder::SingleLadder(LogDensity lf, const LadderOptions& opts)
    : lf_(std::move(lf)), opts_(opts), h_(opts.max_panel) {}

double SingleLadder::advance_to(double w_target) {
  log_increment_ = kNegInf;
  while (w_ < w_target) {
    const double a = w_;
    const double la = lf_(a);
    require_finite(la);
    double h = std::min(h_, w_target - a);
    double b, lb;
    for (;;) {
      b = (h >= w_target - a) ? w_target : a + h;
      lb = lf_(b);
      require_finite(lb);
      if (bend(la, lf_(0.5 * (a + b)), lb) <= opts_.panel_tol) break;
      h *= 0.5;
      if (h <= 1e-13 * (1.0 + a)) throw Inconclusive("panel width underflow while resolving the integrand");
    }
    if (++panels_ > opts_.panel_budget) throw Inconclusive("panel budget exhausted before a verdict");
    const double piece = log_panel_integral(lf_, a, b, la, lb);
    log_value_ = log_add(log_value_, piece);
    log_increment_ = log_add(log_increment_, piece);
    w_ = b;
    h_ = std::min(2.0 * h, opts_.max_panel);
  }
  return log_value_;
}

Functional run_ladder(std::span<const double> levels, const std::function<LadderStep(double)>& evaluate,
                      const LadderOptions& opts) {
  std::vector<LadderStep> judged;
  double previous = 0.0;
  for (double w : levels) {
    if (!(w > previous)) throw DomainError("ladder levels must move strictly toward the boundary");
    previous = w;
    const LadderStep step = evaluate(w);
    if (w < opts.judge_from) continue;
    judged.push_back(step);
    if (auto verdict = judge(judged, opts)) return *verdict;
  }
  throw Inconclusive("truncation ladder ended without a verdict; extend the ladder");
}

}  // namespace antiito
