#pragma once

// Feller boundary classification for the chemotherapy diffusion.
//
// With s the scale density and m the speed density, the boundary functionals
// are computed in their Fubini-equivalent forms
//   Sigma = int s(eta) int_eta^x m  (inner part toward the interior point x = 1),
//   N     = int m(xi)  int_xi^x  s,
// on truncation ladders approaching the boundary.

#include <functional>
#include <span>
#include <vector>

#include "antiito/ladder.hpp"
#include "antiito/model.hpp"

namespace antiito {

enum class Boundary { Zero, Infinity };
enum class FellerClass { Exit, Entrance, Natural, Regular };

const char* to_string(Boundary b) noexcept;
const char* to_string(FellerClass c) noexcept;

/// A scalar diffusion reduced to what the Feller test needs. Both members take
/// ln(xi) so that levels deep toward 0 or infinity stay representable.
struct ScaleSpeed {
  std::function<double(double log_xi)> log_scale;  ///< ln s, with s(1) = 1
  std::function<double(double log_xi)> log_g2;     ///< ln of the squared noise coefficient
  /// Ladder levels with |ln xi| below these are still in the transient of s
  /// and are integrated but not judged; 0 means no hint.
  double settled_zero = 0.0;
  double settled_infinity = 0.0;
};

/// Scale/speed pair of the chemotherapy model. r = 0 (the linear reduction) is
/// allowed here; requires q > 0, r >= 0, v > 0, c >= 0, sigma > 0.
ScaleSpeed scale_speed(const ModelParams& params);
/// Driftless diffusion with constant noise sigma: s = 1, m = 1/sigma^2.
ScaleSpeed brownian_scale_speed(double sigma);

/// s(eta) = eta^(-2 (q-c+sigma^2)/sigma^2) exp{(2r/(v sigma^2)) (eta^v - 1)}.
double scale_density(const ModelParams& params, double eta);
/// m(xi) = 1/(sigma^2 xi^2 s(xi)).
double speed_density(const ModelParams& params, double xi);
/// S(xi) = int_1^xi s by quadrature (negative for xi < 1).
double scale_function(const ModelParams& params, double xi);

/// Truncation levels 2^{+-1}, 2^{+-2}, ... toward the boundary.
std::vector<double> default_levels(Boundary b, std::size_t count = 1000);

/// Levels are xi values, strictly monotone toward the boundary and on its side
/// of 1. Throws Inconclusive when the ladder ends without a verdict.
Functional sigma_functional(const ScaleSpeed& ss, Boundary b, std::span<const double> levels,
                            const LadderOptions& opts = {});
Functional n_functional(const ScaleSpeed& ss, Boundary b, std::span<const double> levels,
                        const LadderOptions& opts = {});
Functional sigma_functional(const ModelParams& params, Boundary b, std::span<const double> levels,
                            const LadderOptions& opts = {});
Functional n_functional(const ModelParams& params, Boundary b, std::span<const double> levels,
                        const LadderOptions& opts = {});

struct BoundaryVerdict {
  Functional sigma;
  Functional n;
  FellerClass cls = FellerClass::Natural;
};

/// Feller table: (finite, diverges) Exit; (diverges, finite) Entrance;
/// (diverges, diverges) Natural; (finite, finite) Regular.
FellerClass feller_class(const Functional& sigma, const Functional& n) noexcept;

BoundaryVerdict classify(const ScaleSpeed& ss, Boundary b, const LadderOptions& opts = {});

struct BoundaryReport {
  BoundaryVerdict zero;
  BoundaryVerdict infinity;
  /// q - c > 0.
  bool positive_net_growth = false;
};

BoundaryReport classify_boundary(const ModelParams& params, const LadderOptions& opts = {});

}  // namespace antiito
