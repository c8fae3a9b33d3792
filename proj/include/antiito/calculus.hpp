#pragma once

#include <functional>
#include <optional>

#include "antiito/model.hpp"

namespace antiito {

/// Evaluation point of the stochastic integral inside each partition interval:
/// 0 (Ito), 1/2 (Stratonovich) or 1 (Hanggi-Klimontovich, anti-Ito).
class Interpretation {
 public:
  static constexpr Interpretation ito() { return Interpretation(0.0); }
  static constexpr Interpretation stratonovich() { return Interpretation(0.5); }
  static constexpr Interpretation hanggi_klimontovich() { return Interpretation(1.0); }
  /// Throws DomainError unless alpha is exactly 0, 0.5 or 1.
  static Interpretation from_alpha(double alpha);

  constexpr double alpha() const noexcept { return alpha_; }
  const char* name() const noexcept;

  friend constexpr bool operator==(Interpretation, Interpretation) = default;

 private:
  constexpr explicit Interpretation(double alpha) : alpha_(alpha) {}
  double alpha_;
};

using Coefficient = std::function<double(double x, double t)>;

/// A scalar SDE dX = f dt + g dW (dW read under some interpretation), with the
/// analytic spatial derivative of g.
struct SdeSpec {
  Coefficient drift;
  Coefficient diffusion;
  Coefficient diffusion_dx;
  /// Set to sigma when diffusion(x, t) == sigma * x; enables the log-space scheme.
  std::optional<double> linear_noise;
};

/// The chemotherapy model as written: f = qx - r x^{v+1} - cx, g = sigma x.
SdeSpec chemotherapy_sde(const ModelParams& p);
/// dX = a X dt + sigma X dW, the r = 0 reduction.
SdeSpec linear_sde(double a, double sigma);

/// Ito SDE with the same solution as the given HK-SDE: drift f + g dg/dx.
SdeSpec hk_to_ito(const SdeSpec& spec);
/// Ito drift equivalent to reading the noise at evaluation point alpha: f + alpha g dg/dx.
Coefficient effective_ito_drift(const SdeSpec& spec, Interpretation interp);

}  // namespace antiito
