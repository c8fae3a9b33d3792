#include "antiito/fpe.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "antiito/errors.hpp"

namespace antiito {
namespace {

// Generator A of dp/dt = A p, stored per row as (lower, diag, upper).
struct Tridiagonal {
  std::vector<double> lower, diag, upper;
};

Tridiagonal generator(const Grid& g, const ModelParams& p) {
  const std::size_t n = g.n_cells();
  const double h = g.spacing();
  const double d = 0.5 * p.sigma2() / h;
  Tridiagonal t{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  // Face i (1..n-1): J = (a+ + d x_{i-1}^2) p_{i-1} + (a- - d x_i^2) p_i.
  for (std::size_t i = 1; i < n; ++i) {
    const double a = drift_velocity(p, g.face(i));
    const double from_left = std::max(a, 0.0) + d * g.center(i - 1) * g.center(i - 1);
    const double from_right = std::min(a, 0.0) - d * g.center(i) * g.center(i);
    t.upper[i - 1] -= from_right / h;
    t.diag[i - 1] -= from_left / h;
    t.lower[i] += from_left / h;
    t.diag[i] += from_right / h;
  }
  return t;
}

void check_mode_dt(double dt, double limit) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw DomainError("dt must be finite and non-negative");
  if (dt > limit * (1.0 + 1e-12)) throw StabilityError("dt exceeds the explicit stability bound");
}

std::size_t step_count(double span, double dt) {
  if (span <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
}

class Propagator {
 public:
  Propagator(const Grid& g, const ModelParams& p, double dt, BoundaryMode mode)
      : grid_(g), params_(p), dt_(dt), mode_(mode) {}

  // Applies N steps to the field in place.
  void advance(DensityField& f, std::size_t steps) {
    if (steps == 0) return;
    const double n = static_cast<double>(grid_.n_cells());
    const double log_steps = std::log2(static_cast<double>(steps)) + 1.0;
    if (static_cast<double>(steps) <= log_steps * n * n / 100.0) {
      for (std::size_t k = 0; k < steps; ++k) f = fpe_step(f, params_, dt_, mode_);
    } else {
      advance_by_powers(f, steps);
    }
    f.time += static_cast<double>(steps) * dt_;
  }

 private:
  const Eigen::MatrixXd& power(std::size_t j) {
    if (powers_.empty()) {
      const std::size_t n = grid_.n_cells();
      const Tridiagonal t = generator(grid_, params_);
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        m(ii, ii) += dt_ * t.diag[i];
        if (i > 0) m(ii, ii - 1) += dt_ * t.lower[i];
        if (i + 1 < n) m(ii, ii + 1) += dt_ * t.upper[i];
      }
      if (mode_ == BoundaryMode::AbsorbingAtZero) m.row(0).setZero();
      powers_.push_back(std::move(m));
    }
    while (powers_.size() <= j) {
      Eigen::MatrixXd sq(powers_.back().rows(), powers_.back().cols());
      sq.noalias() = powers_.back() * powers_.back();
      powers_.push_back(std::move(sq));
    }
    return powers_[j];
  }

  void advance_by_powers(DensityField& f, std::size_t steps) {
    Eigen::Map<Eigen::VectorXd> p(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
    const double h = grid_.spacing();
    const double before = p.sum() * h;
    for (std::size_t j = 0; steps != 0; ++j, steps >>= 1) {
      if ((steps & 1U) == 0) continue;
      Eigen::VectorXd next = power(j) * p;
      p = next;
    }
    if (mode_ == BoundaryMode::AbsorbingAtZero) f.absorbed_mass += std::max(before - p.sum() * h, 0.0);
  }

  Grid grid_;
  ModelParams params_;
  double dt_;
  BoundaryMode mode_;
  std::vector<Eigen::MatrixXd> powers_;
};

}  // namespace

Grid::Grid(double x_min, double x_max, std::size_t n_cells) : x_min_(x_min), x_max_(x_max), n_(n_cells) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min >= 0.0) || !(x_max > x_min)) {
    throw DomainError("grid needs x_max > x_min >= 0");
  }
  if (n_cells < 16) throw DomainError("grid needs at least 16 cells");
  h_ = (x_max - x_min) / static_cast<double>(n_cells);
}

double DensityField::mass() const {
  double total = 0.0;
  for (double v : values) total += v;
  return total * grid.spacing();
}

double DensityField::cdf(double x) const {
  if (x <= grid.x_min()) return 0.0;
  const double h = grid.spacing();
  const double pos = (x - grid.x_min()) / h;
  const std::size_t full = std::min(static_cast<std::size_t>(pos), values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < full; ++i) total += values[i];
  total *= h;
  if (full < values.size()) total += values[full] * (pos - static_cast<double>(full)) * h;
  return total;
}

double drift_velocity(const ModelParams& p, double x) {
  return x * (p.q - p.c + p.sigma2() - p.r * std::pow(x, p.v));
}

DensityField sample_field(const Grid& grid, const std::function<double(double)>& f) {
  DensityField field(grid);
  for (std::size_t i = 0; i < grid.n_cells(); ++i) field.values[i] = f(grid.center(i));
  return field;
}

DensityField initial_condition(const Grid& grid, double x0, double width_cells) {
  if (!(x0 >= grid.x_min() && x0 <= grid.x_max())) throw DomainError("x0 must lie within the grid");
  if (!(width_cells > 0.0)) throw DomainError("initial width must be positive");
  const double sd = width_cells * grid.spacing();
  DensityField field = sample_field(grid, [&](double x) {
    const double z = (x - x0) / sd;
    return std::exp(-0.5 * z * z);
  });
  const double m = field.mass();
  for (double& v : field.values) v /= m;
  return field;
}

double flux_at(std::size_t face, const DensityField& field, const ModelParams& params) {
  const Grid& g = field.grid;
  if (face == 0 || face >= g.n_cells()) return 0.0;
  const double a = drift_velocity(params, g.face(face));
  const double pl = field.values[face - 1], pr = field.values[face];
  const double xl = g.center(face - 1), xr = g.center(face);
  const double advective = a > 0.0 ? a * pl : a * pr;
  return advective - 0.5 * params.sigma2() * (xr * xr * pr - xl * xl * pl) / g.spacing();
}

double max_stable_dt(const Grid& grid, const ModelParams& params) {
  const Tridiagonal t = generator(grid, params);
  double worst = 0.0;
  for (double d : t.diag) worst = std::max(worst, -d);
  const double diffusive = params.sigma2() * grid.x_max() * grid.x_max() / (grid.spacing() * grid.spacing());
  worst = std::max(worst, diffusive);
  if (!(worst > 0.0)) return std::numeric_limits<double>::infinity();
  return 0.4 / worst;
}

DensityField fpe_step(const DensityField& field, const ModelParams& params, double dt, BoundaryMode mode) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw DomainError("dt must be finite and non-negative");
  DensityField next = field;
  if (dt == 0.0) return next;
  const std::size_t n = field.values.size();
  const double h = field.grid.spacing();
  std::vector<double> flux(n + 1, 0.0);
  for (std::size_t i = 1; i < n; ++i) flux[i] = flux_at(i, field, params);
  double peak = 0.0;
  for (double v : field.values) peak = std::max(peak, v);
  const double tol = 1e-14 * std::max(peak, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = field.values[i] - dt * (flux[i + 1] - flux[i]) / h;
    if (v < 0.0) {
      if (v < -tol) throw StabilityError("negative density: time step too large for the grid");
      v = 0.0;
      ++next.clip_events;
    }
    next.values[i] = v;
  }
  if (mode == BoundaryMode::AbsorbingAtZero) {
    next.absorbed_mass += next.values[0] * h;
    next.values[0] = 0.0;
  }
  next.time += dt;
  return next;
}

DensityField fpe_evolve(const ModelParams& params, double x0, double t_final, const Grid& grid, double dt,
                        BoundaryMode mode) {
  const double times[] = {t_final};
  return std::move(fpe_evolve_snapshots(params, x0, times, grid, dt, mode).front());
}

std::vector<DensityField> fpe_evolve_snapshots(const ModelParams& params, double x0, std::span<const double> times,
                                               const Grid& grid, double dt, BoundaryMode mode) {
  validate(params);
  if (times.empty()) return {};
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || !std::isfinite(times[k])) throw DomainError("snapshot times must be finite and >= 0");
    if (k > 0 && !(times[k] >= times[k - 1])) throw DomainError("snapshot times must be increasing");
  }
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  check_mode_dt(dt, max_stable_dt(grid, params));

  const double t_final = times.back();
  const std::size_t total = step_count(t_final, dt);
  const double dt_eff = total == 0 ? dt : t_final / static_cast<double>(total);

  DensityField field = initial_condition(grid, x0);
  Propagator prop(grid, params, dt_eff, mode);
  std::vector<DensityField> out;
  out.reserve(times.size());
  std::size_t done = 0;
  for (double t : times) {
    const auto target = static_cast<std::size_t>(std::llround(t / dt_eff));
    const std::size_t goal = std::min(target, total);
    prop.advance(field, goal - done);
    done = goal;
    field.time = t;
    out.push_back(field);
  }
  return out;
}

double l1_distance(const DensityField& field, const std::function<double(double)>& cdf) {
  const Grid& g = field.grid;
  const double h = g.spacing();
  double total = 0.0;
  double prev = cdf(g.face(0));
  for (std::size_t i = 0; i < g.n_cells(); ++i) {
    const double next = cdf(g.face(i + 1));
    total += std::abs(field.values[i] * h - (next - prev));
    prev = next;
  }
  return total + std::abs(1.0 - prev) + std::abs(cdf(g.face(0)));
}

double ks_distance(const DensityField& field, const std::function<double(double)>& cdf) {
  const Grid& g = field.grid;
  double worst = 0.0;
  for (std::size_t i = 0; i <= g.n_cells(); ++i) {
    worst = std::max(worst, std::abs(field.cdf(g.face(i)) - cdf(g.face(i))));
    if (i < g.n_cells()) worst = std::max(worst, std::abs(field.cdf(g.center(i)) - cdf(g.center(i))));
  }
  return worst;
}

double suggested_x_max(const ModelParams& params) {
  const StationaryDensity sd(params);
  if (params.net_growth() <= 0.0) return sd.truncation_point();
  const double mode = std::pow(params.net_growth() / params.r, 1.0 / params.v);
  const double target = sd.log_pdf(mode) + std::log(1e-12);
  double lo = mode, hi = 2.0 * mode;
  while (sd.log_pdf(hi) > target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 200 && hi - lo > 1e-12 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (sd.log_pdf(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace antiito
