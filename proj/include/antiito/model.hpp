#pragma once

// Deterministic and stationary analysis of the chemotherapy growth model
//
//   dX = (q X - r X^{v+1} - c X) dt + sigma X . dB
//
// where the noise term is read in the Hanggi-Klimontovich (anti-Ito) sense.
// All density arithmetic happens in log space; values are exponentiated only
// when handed back to the caller.

#include <optional>
#include <vector>

namespace antiito {

struct ModelParams {
  double q = 0.0;      ///< proliferation rate, 1/time
  double r = 0.0;      ///< logistic crowding coefficient
  double v = 0.0;      ///< logistic exponent
  double c = 0.0;      ///< drug kill rate, 1/time
  double sigma = 0.0;  ///< noise intensity, 1/sqrt(time)

  double net_growth() const noexcept { return q - c; }
  double sigma2() const noexcept { return sigma * sigma; }
};

/// Throws DomainError unless q, r, v > 0, c, sigma >= 0 and all finite.
void validate(const ModelParams& p);
/// As validate(), additionally requiring sigma > 0.
void validate_stochastic(const ModelParams& p);

enum class Stability { Stable, Unstable };

struct FixedPoint {
  double location = 0.0;
  Stability stability = Stability::Stable;
};

std::vector<FixedPoint> fixed_points(const ModelParams& p);

/// ln Gamma(x) for x > 0.
double ln_gamma(double x);

/// Value of the stationary density at a point. At x = 0 with exponent in
/// (-1, 0) the density has an integrable pole; `pole` is set and `value` is NaN.
struct PdfValue {
  double value = 0.0;
  bool pole = false;
};

class StationaryDensity {
 public:
  /// Throws DegenerateDensity when sigma^2 <= 2(c - q).
  explicit StationaryDensity(const ModelParams& params);

  const ModelParams& params() const noexcept { return params_; }
  double log_k0() const noexcept { return log_k0_; }
  /// 2(q - c) / sigma^2, the power of x in the density.
  double exponent() const noexcept { return beta_; }
  /// 2r / (v sigma^2), the rate inside the stretched exponential.
  double rate() const noexcept { return lambda_; }
  /// (exponent + 1) / v, the shape of the Gamma law of rate * X^v.
  double gamma_shape() const noexcept { return (beta_ + 1.0) / params_.v; }

  PdfValue pdf(double x) const;
  /// ln p_s(x) for x > 0.
  double log_pdf(double x) const;
  /// Integral of the density over [0, x]; absolute error <= 1e-9.
  double cdf(double x) const;
  /// Point beyond which the density stays below 1e-16 of its peak.
  double truncation_point() const;

 private:
  ModelParams params_;
  double beta_;
  double lambda_;
  double log_k0_;
};

inline StationaryDensity stationary_density_new(const ModelParams& p) { return StationaryDensity(p); }
PdfValue stationary_pdf(const StationaryDensity& d, double x);
double stationary_cdf(const StationaryDensity& d, double x);

/// argmax of the stationary density: ((q-c)/r)^(1/v) when q > c, else 0.
double stationary_mode(const ModelParams& p);

enum class RegimeClass {
  RobustInterior,    ///< q - c > 0: interior mode, no transition
  DecreasingMode,    ///< q - c <= 0, sigma^2 > 2(c - q): proper density, mode at 0
  DegenerateAtZero,  ///< q - c <= 0, sigma^2 <= 2(c - q): point mass at 0
};

RegimeClass classify_regime(const ModelParams& p);
const char* to_string(RegimeClass r) noexcept;

/// 2(c - q) when q - c <= 0, otherwise nullopt (no noise-induced transition).
std::optional<double> critical_sigma_squared(const ModelParams& p);

}  // namespace antiito
