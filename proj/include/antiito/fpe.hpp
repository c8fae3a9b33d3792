#pragma once

// Finite-volume Fokker-Planck solver for the chemotherapy model in flux form
//
//   dp/dt = -dJ/dx,   J = (q - c + sigma^2 - r x^v) x p - (sigma^2 / 2) d(x^2 p)/dx,
//
// on a uniform cell-centred grid. Advection is upwinded on the sign of the
// velocity, diffusion uses centred differences of x^2 p across each face, and
// the outer faces carry no flux.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "antiito/model.hpp"

namespace antiito {

class Grid {
 public:
  /// Throws DomainError unless x_max > x_min >= 0 and n_cells >= 16.
  Grid(double x_min, double x_max, std::size_t n_cells);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t n_cells() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double center(std::size_t i) const noexcept { return x_min_ + (static_cast<double>(i) + 0.5) * h_; }
  /// Face i sits between cells i-1 and i; faces run 0..n_cells.
  double face(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * h_; }

 private:
  double x_min_, x_max_;
  std::size_t n_;
  double h_;
};

struct DensityField {
  Grid grid;
  std::vector<double> values;  ///< cell densities
  double time = 0.0;
  std::size_t clip_events = 0;  ///< round-off negatives reset to zero
  double absorbed_mass = 0.0;   ///< mass removed at 0 in AbsorbingAtZero mode

  explicit DensityField(const Grid& g) : grid(g), values(g.n_cells(), 0.0) {}

  double mass() const;
  /// Mass on [x_min, x], exact for the piecewise-constant field.
  double cdf(double x) const;
};

enum class BoundaryMode { ZeroFlux, AbsorbingAtZero };

/// Effective velocity x (q - c + sigma^2 - r x^v) of the flux.
double drift_velocity(const ModelParams& params, double x);

/// Field sampled at cell centres.
DensityField sample_field(const Grid& grid, const std::function<double(double)>& f);
/// Gaussian of standard deviation width_cells * spacing centred at x0,
/// renormalised to unit mass on the grid. Throws DomainError if x0 is off-grid.
DensityField initial_condition(const Grid& grid, double x0, double width_cells = 3.0);

/// Probability flux through face `face`; zero on the two outer faces.
double flux_at(std::size_t face, const DensityField& field, const ModelParams& params);

/// Largest dt keeping the explicit update positivity-preserving (a factor 0.4
/// below the limit). It never exceeds 0.4 h^2 / (sigma^2 x_max^2).
double max_stable_dt(const Grid& grid, const ModelParams& params);

/// One explicit conservative step. Throws StabilityError if a cell value
/// drops below round-off level.
DensityField fpe_step(const DensityField& field, const ModelParams& params, double dt,
                      BoundaryMode mode = BoundaryMode::ZeroFlux);

/// Evolves the narrow initial condition at x0 to t_final with steps of at most
/// dt. Throws StabilityError when dt exceeds max_stable_dt.
DensityField fpe_evolve(const ModelParams& params, double x0, double t_final, const Grid& grid, double dt,
                        BoundaryMode mode = BoundaryMode::ZeroFlux);
/// As fpe_evolve, returning the field at each of the increasing `times`.
std::vector<DensityField> fpe_evolve_snapshots(const ModelParams& params, double x0, std::span<const double> times,
                                               const Grid& grid, double dt,
                                               BoundaryMode mode = BoundaryMode::ZeroFlux);

/// L1 distance between the field's cell masses and those of a reference CDF,
/// plus the reference mass beyond the grid.
double l1_distance(const DensityField& field, const std::function<double(double)>& cdf);
/// sup |F_field - F| over faces and cell centres.
double ks_distance(const DensityField& field, const std::function<double(double)>& cdf);

/// Right edge x_max at which the stationary density has fallen below
/// 1e-12 of its peak.
double suggested_x_max(const ModelParams& params);

}  // namespace antiito
