#pragma once

// Improper integrals on truncation ladders.
//
// Integrands are given as log-densities of a coordinate w >= 0 that grows
// toward the boundary under study. Values are accumulated in log space so
// power laws near 0 and stretched exponentials near infinity never overflow.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>

namespace antiito {

using LogDensity = std::function<double(double w)>;

struct LadderOptions {
  /// Diverges if each of the last two level-to-level value ratios exceeds this.
  double growth_factor = 1.5;
  /// Finite if the last increment is within this fraction of the value and
  /// smaller than the one before by more than increment_ratio.
  double rel_tol = 1e-4;
  /// Diverges if each of the last two increment ratios is at least this
  /// (increments that stop shrinking: logarithmic divergence).
  double increment_ratio = 0.95;
  /// No verdict before this many levels.
  std::size_t min_levels = 4;
  /// Levels with w below this are computed but not judged.
  double judge_from = 0.0;
  /// Maximum deviation of a log-density from linearity inside one panel.
  double panel_tol = 0.02;
  double max_panel = 0.05;
  std::size_t panel_budget = 2'000'000;
};

/// Outcome of an improper integral: a finite value or divergence.
struct Functional {
  bool diverges = false;
  double value = std::numeric_limits<double>::quiet_NaN();
  double log_value = std::numeric_limits<double>::quiet_NaN();

  static Functional finite(double log_value);
  static Functional divergent();
};

/// ln I at one truncation level and ln of the part added since the previous level.
/// The increment is accumulated directly, so it stays exact when I is dominated
/// by a large early contribution.
struct LadderStep {
  double log_value = -std::numeric_limits<double>::infinity();
  double log_increment = -std::numeric_limits<double>::infinity();
};

/// Verdict from successive truncation levels, or nullopt when neither
/// criterion is met yet.
std::optional<Functional> judge(std::span<const LadderStep> steps, const LadderOptions& opts);

/// ln of the integral of exp(lf) over [a, b], Gauss-Legendre with the linear
/// part of lf integrated exactly. la, lb are lf(a), lf(b).
double log_panel_integral(const LogDensity& lf, double a, double b, double la, double lb);

/// Progressive evaluation of  I(W) = int_0^W exp(outer(w)) int_0^w exp(inner(u)) du dw.
class NestedLadder {
 public:
  NestedLadder(LogDensity outer, LogDensity inner, const LadderOptions& opts = {});

  /// Extends the integration to w_target (>= current position) and returns ln I.
  /// Throws Inconclusive when the panel budget runs out.
  double advance_to(double w_target);
  /// ln of the integral over the span covered by the last advance_to.
  double last_log_increment() const noexcept { return log_increment_; }
  double position() const noexcept { return w_; }
  std::size_t panels() const noexcept { return panels_; }

 private:
  LogDensity outer_, inner_;
  LadderOptions opts_;
  double w_ = 0.0;
  double h_;
  double log_inner_cum_ = -std::numeric_limits<double>::infinity();
  double log_value_ = -std::numeric_limits<double>::infinity();
  double log_increment_ = -std::numeric_limits<double>::infinity();
  std::size_t panels_ = 0;
};

/// Progressive evaluation of  I(W) = int_0^W exp(lf(w)) dw.
class SingleLadder {
 public:
  explicit SingleLadder(LogDensity lf, const LadderOptions& opts = {});
  double advance_to(double w_target);
  double last_log_increment() const noexcept { return log_increment_; }

 private:
  LogDensity lf_;
  LadderOptions opts_;
  double w_ = 0.0;
  double h_;
  double log_value_ = -std::numeric_limits<double>::infinity();
  double log_increment_ = -std::numeric_limits<double>::infinity();
  std::size_t panels_ = 0;
};

/// Runs a ladder over `levels` (increasing w), stopping at the first verdict.
/// `evaluate(w)` extends the integral to w. Throws Inconclusive if no verdict is reached.
Functional run_ladder(std::span<const double> levels, const std::function<LadderStep(double)>& evaluate,
                      const LadderOptions& opts);

double log_add(double a, double b) noexcept;

}  // namespace antiito
