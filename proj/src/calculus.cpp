#include "antiito/calculus.hpp"

#include <cmath>

#include "antiito/errors.hpp"

namespace antiito {

Interpretation Interpretation::from_alpha(double alpha) {
  if (alpha == 0.0) return ito();
  if (alpha == 0.5) return stratonovich();
  if (alpha == 1.0) return hanggi_klimontovich();
  throw DomainError("interpretation alpha must be 0, 0.5 or 1");
}

const char* Interpretation::name() const noexcept {
  if (alpha_ == 0.0) return "ito";
  if (alpha_ == 0.5) return "stratonovich";
  return "hanggi_klimontovich";
}

SdeSpec chemotherapy_sde(const ModelParams& p) {
  validate(p);
  const double q = p.q, r = p.r, v = p.v, c = p.c, s = p.sigma;
  return {
      [=](double x, double) { return q * x - r * std::pow(x, v + 1.0) - c * x; },
      [=](double x, double) { return s * x; },
      [=](double, double) { return s; },
      s,
  };
}

SdeSpec linear_sde(double a, double sigma) {
  return {
      [=](double x, double) { return a * x; },
      [=](double x, double) { return sigma * x; },
      [=](double, double) { return sigma; },
      sigma,
  };
}

SdeSpec hk_to_ito(const SdeSpec& spec) {
  SdeSpec out = spec;
  out.drift = effective_ito_drift(spec, Interpretation::hanggi_klimontovich());
  return out;
}

Coefficient effective_ito_drift(const SdeSpec& spec, Interpretation interp) {
  const double alpha = interp.alpha();
  if (alpha == 0.0) return spec.drift;
  return [f = spec.drift, g = spec.diffusion, dg = spec.diffusion_dx, alpha](double x, double t) {
    return f(x, t) + alpha * g(x, t) * dg(x, t);
  };
}

}  // namespace antiito
