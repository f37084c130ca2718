#include "shwave/forward.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "shwave/error.hpp"

namespace shwave {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr cplx kI{0.0, 1.0};
// Reciprocal condition number below which a matching system is rejected.
constexpr double kMinRcond = 1e-14;

double sinc(double z) { return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

// Integral over [0, len] of cos(a y) cos(c y).
double cos_overlap(double a, double c, double len) {
  return 0.5 * len * (sinc((a - c) * len) + sinc((a + c) * len));
}

// Overlap of the thick-layer modes (rows) with the thin-layer modes (columns)
// over the common interval [0, thin.height].
Eigen::MatrixXd overlap(const ModalBasis& thick, const ModalBasis& thin) {
  Eigen::MatrixXd out(thick.size(), thin.size());
  for (int m = 0; m < thick.size(); ++m) {
    const double a = transverse_wavenumber(thick.height, thick.orders[m]);
    for (int n = 0; n < thin.size(); ++n) {
      const double c = transverse_wavenumber(thin.height, thin.orders[n]);
      out(m, n) = cos_overlap(a, c, thin.height);
    }
  }
  return out;
}

SMatrix identity_smatrix(int n) {
  SMatrix s;
  s.s11 = MatrixXcd::Zero(n, n);
  s.s22 = MatrixXcd::Zero(n, n);
  s.s12 = MatrixXcd::Identity(n, n);
  s.s21 = MatrixXcd::Identity(n, n);
  return s;
}

// a followed by a uniform stretch of waveguide with phase factors `p`.
void append_propagation(SMatrix& a, const VectorXcd& p) {
  a.s12 = a.s12 * p.asDiagonal();
  a.s21 = p.asDiagonal() * a.s21;
  a.s22 = p.asDiagonal() * a.s22 * p.asDiagonal();
}

bool heights_equal(double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(a, b); }

}  // namespace

WavenumberGrid WavenumberGrid::linear(const PlateSpec& plate, double xib_min, double xib_max,
                                      int samples, bool single_mode) {
  if (samples < 2) throw std::invalid_argument("WavenumberGrid: need at least two samples");
  WavenumberGrid g;
  g.single_mode = single_mode;
  g.xi.resize(static_cast<std::size_t>(samples));
  const double b = plate.half_thickness;
  for (int m = 0; m < samples; ++m) {
    const double t = static_cast<double>(m) / static_cast<double>(samples - 1);
    g.xi[static_cast<std::size_t>(m)] = (xib_min + (xib_max - xib_min) * t) / b;
  }
  g.validate(plate);
  return g;
}

void WavenumberGrid::validate(const PlateSpec& plate) const {
  if (xi.empty()) throw std::invalid_argument("WavenumberGrid: empty");
  if (!(xi.front() > 0.0)) throw std::invalid_argument("WavenumberGrid: xi_min must be positive");
  for (std::size_t m = 1; m < xi.size(); ++m)
    if (!(xi[m] > xi[m - 1]))
      throw std::invalid_argument("WavenumberGrid: samples must be strictly increasing");
  if (single_mode) {
    const double first_cutoff = transverse_wavenumber(plate.depth(), 1);
    if (!(xi.back() < first_cutoff))
      throw std::invalid_argument("WavenumberGrid: single-mode band reaches the first cutoff");
  }
}

StaircaseModel staircase(const PlateSpec& plate, const DepthProfile& profile, int segments) {
  if (segments < 1) throw std::invalid_argument("staircase: need at least one segment");
  const SpatialGrid& g = profile.grid;
  const double full = plate.depth();

  int first = -1, last = -1;
  for (int i = 0; i < g.size; ++i) {
    if (profile.depths[static_cast<std::size_t>(i)] != 0.0) {
      if (first < 0) first = i;
      last = i;
    }
  }

  std::vector<double> edges{g.x_min};
  std::vector<double> heights;
  auto push = [&](double right_edge, double h) {
    if (!heights.empty() && heights.back() == h) {
      edges.back() = right_edge;
    } else {
      heights.push_back(h);
      edges.push_back(right_edge);
    }
  };

  if (first < 0) {
    push(g.x_max(), full);
    return {edges, heights};
  }

  const double lo = g.x_min + g.dx * first;
  const double hi = g.x_min + g.dx * (last + 1);
  if (first > 0) push(lo, full);
  const double width = (hi - lo) / segments;
  for (int s = 0; s < segments; ++s) {
    const double mid = lo + (s + 0.5) * width;
    int cell = static_cast<int>(std::floor((mid - g.x_min) / g.dx));
    cell = std::clamp(cell, first, last);
    const double right = (s + 1 == segments) ? hi : lo + (s + 1) * width;
    push(right, full - profile.depths[static_cast<std::size_t>(cell)]);
  }
  if (last + 1 < g.size) push(g.x_max(), full);
  return {edges, heights};
}

ModalBasis modal_basis(double height, double k, int n_modes) {
  ModalBasis basis;
  basis.height = height;
  basis.xi.resize(n_modes);
  basis.norm.resize(n_modes);
  int order = 0;
  for (int i = 0; i < n_modes; ++order) {
    const cplx xi = axial_wavenumber_in_layer(height, order, k);
    if (classify(xi) == ModeKind::cutoff) continue;
    basis.orders.push_back(order);
    basis.xi(i) = xi;
    basis.norm(i) = order == 0 ? height : 0.5 * height;
    ++i;
  }
  return basis;
}

SMatrix star(const SMatrix& a, const SMatrix& b) {
  const auto n = a.s22.rows();
  if (b.s11.rows() != n) throw std::invalid_argument("star: port dimensions differ");
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  // (I - B11 A22)^{-1} and (I - A22 B11)^{-1}
  const Eigen::PartialPivLU<MatrixXcd> lu1(id - b.s11 * a.s22);
  const Eigen::PartialPivLU<MatrixXcd> lu2(id - a.s22 * b.s11);
  SMatrix out;
  const MatrixXcd f1 = lu1.solve(b.s11 * a.s21);
  const MatrixXcd g1 = lu1.solve(b.s12);
  const MatrixXcd f2 = lu2.solve(a.s21);
  const MatrixXcd g2 = lu2.solve(a.s22 * b.s12);
  out.s11 = a.s11 + a.s12 * f1;
  out.s12 = a.s12 * g1;
  out.s21 = b.s21 * f2;
  out.s22 = b.s22 + b.s21 * g2;
  return out;
}

Junction junction_smatrix(const PlateSpec& plate, double h_left, double h_right, double omega,
                          int n_modes) {
  const double full = plate.depth();
  if (!(h_left > 0.0) || !(h_right > 0.0) || h_left > full * (1 + 1e-12) ||
      h_right > full * (1 + 1e-12))
    throw std::invalid_argument("junction_smatrix: heights must lie in (0, 2b]");
  const double k = omega / plate.shear_velocity;
  const double thick = std::max(h_left, h_right);
  if (n_modes < propagating_mode_count_in_layer(thick, k) + 4)
    throw std::invalid_argument("junction_smatrix: n_modes must exceed the propagating count by 4");

  Junction j;
  j.left = modal_basis(h_left, k, n_modes);
  j.right = modal_basis(h_right, k, n_modes);
  const int n = n_modes;
  const bool left_thick = h_left >= h_right;
  const ModalBasis& big = left_thick ? j.left : j.right;
  const ModalBasis& small = left_thick ? j.right : j.left;
  const MatrixXcd ov = overlap(big, small).cast<cplx>();

  const VectorXcd nb = big.norm.cast<cplx>();
  const VectorXcd ns = small.norm.cast<cplx>();
  const MatrixXcd nb_xb = (nb.array() * kI * big.xi.array()).matrix().asDiagonal();
  const MatrixXcd ov_xs = ov * (kI * small.xi).asDiagonal();
  const MatrixXcd ns_diag = ns.asDiagonal();

  // Unknowns [b_left; a_right], knowns [a_left; b_right].
  // Displacement on the overlap, projected on the thin modes; traction over
  // the thick face (zero on the exposed step), projected on the thick modes.
  MatrixXcd lhs(2 * n, 2 * n), rhs(2 * n, 2 * n);
  if (left_thick) {
    lhs << -ov.transpose(), ns_diag, nb_xb, ov_xs;
    rhs << ov.transpose(), -ns_diag, nb_xb, ov_xs;
  } else {
    lhs << ns_diag, -ov.transpose(), ov_xs, nb_xb;
    rhs << -ns_diag, ov.transpose(), ov_xs, nb_xb;
  }
  // Row equilibration; evanescent traction rows can be many orders larger.
  for (int r = 0; r < 2 * n; ++r) {
    const double scale = lhs.row(r).cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      lhs.row(r) /= scale;
      rhs.row(r) /= scale;
    }
  }
  const Eigen::PartialPivLU<MatrixXcd> lu(lhs);
  const double rcond = lu.rcond();
  if (!(rcond > kMinRcond)) {
    std::ostringstream msg;
    msg << "step " << h_left << " -> " << h_right << " at omega " << omega << " (rcond "
        << rcond << ")";
    throw Error(ErrorCode::singular_projection_system, msg.str());
  }
  const MatrixXcd s = lu.solve(rhs);
  j.s.s11 = s.topLeftCorner(n, n);
  j.s.s12 = s.topRightCorner(n, n);
  j.s.s21 = s.bottomLeftCorner(n, n);
  j.s.s22 = s.bottomRightCorner(n, n);
  return j;
}

DefectScattering scatter(const PlateSpec& plate, const StaircaseModel& model, double omega,
                         int n_modes) {
  const double full = plate.depth();
  const double k = omega / plate.shear_velocity;

  // Height sequence including the semi-infinite full-depth leads.
  struct Step {
    double x, h_left, h_right;
  };
  std::vector<Step> steps;
  double current = full;
  for (int s = 0; s < model.segments(); ++s) {
    const double h = model.heights[static_cast<std::size_t>(s)];
    if (!heights_equal(h, current)) steps.push_back({model.edges[static_cast<std::size_t>(s)], current, h});
    current = h;
  }
  if (!heights_equal(current, full)) steps.push_back({model.edges.back(), current, full});

  DefectScattering out;
  out.lead = modal_basis(full, k, n_modes);
  if (steps.empty()) {
    out.s = identity_smatrix(n_modes);
    return out;
  }
  out.left_plane = steps.front().x;
  out.right_plane = steps.back().x;

  Junction first = junction_smatrix(plate, steps[0].h_left, steps[0].h_right, omega, n_modes);
  SMatrix total = std::move(first.s);
  ModalBasis inside = std::move(first.right);
  for (std::size_t j = 1; j < steps.size(); ++j) {
    const double len = steps[j].x - steps[j - 1].x;
    const VectorXcd phase = (kI * inside.xi * len).array().exp().matrix();
    append_propagation(total, phase);
    Junction next = junction_smatrix(plate, steps[j].h_left, steps[j].h_right, omega, n_modes);
    total = star(total, next.s);
    inside = std::move(next.right);
  }
  out.s = std::move(total);
  return out;
}

ReflectionSpectrum solve_reflection(const PlateSpec& plate, const DepthProfile& profile,
                                    const WavenumberGrid& grid, const SolverSettings& settings) {
  grid.validate(plate);
  const StaircaseModel model = staircase(plate, profile, settings.segments);
  ReflectionSpectrum out{grid, std::vector<cplx>(grid.xi.size())};
  for (std::size_t m = 0; m < grid.xi.size(); ++m) {
    const double xi = grid.xi[m];
    const double omega = xi * plate.shear_velocity;
    const DefectScattering ds = scatter(plate, model, omega, settings.n_modes);
    // Internal reflection of a left-going mode-0 wave, referenced at the right
    // port; shift the reference to x1 = 0 and conjugate to the reported form.
    const cplx r = ds.s.s22(0, 0) * std::exp(-2.0 * kI * xi * ds.right_plane);
    out.coefficients[m] = std::conj(r);
  }
  return out;
}

ModalReflectionTable solve_modal_reflection(const PlateSpec& plate, const DepthProfile& profile,
                                            const std::vector<double>& omegas, int max_order,
                                            const SolverSettings& settings) {
  const StaircaseModel model = staircase(plate, profile, settings.segments);
  ModalReflectionTable table;
  table.omega = omegas;
  table.max_order = max_order;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double omega : omegas) {
    std::vector<cplx> row(static_cast<std::size_t>(max_order), cplx(nan, nan));
    std::vector<double> xis(static_cast<std::size_t>(max_order), nan);
    const int n_modes = std::max(settings.n_modes, propagating_mode_count(plate, omega) + 4);
    const DefectScattering ds = scatter(plate, model, omega, n_modes);
    for (int i = 0; i < ds.lead.size(); ++i) {
      const int order = ds.lead.orders[static_cast<std::size_t>(i)];
      if (order >= max_order || classify(ds.lead.xi(i)) != ModeKind::propagating) continue;
      const double xi = ds.lead.xi(i).real();
      const cplx r = ds.s.s22(i, i) * std::exp(-2.0 * kI * xi * ds.right_plane);
      row[static_cast<std::size_t>(order)] = std::conj(r);
      xis[static_cast<std::size_t>(order)] = xi;
    }
    table.coefficients.push_back(std::move(row));
    table.xi.push_back(std::move(xis));
  }
  return table;
}

ReflectionSpectrum born_forward(const PlateSpec& plate, const DepthProfile& profile,
                                const WavenumberGrid& grid) {
  ReflectionSpectrum out{grid, std::vector<cplx>(grid.xi.size())};
  const double dx = profile.grid.dx;
  const double two_b = plate.depth();
  for (std::size_t m = 0; m < grid.xi.size(); ++m) {
    const double xi = grid.xi[m];
    cplx acc{0.0, 0.0};
    for (int i = 0; i < profile.grid.size; ++i) {
      const double d = profile.depths[static_cast<std::size_t>(i)];
      if (d == 0.0) continue;
      acc += d * std::exp(2.0 * kI * xi * profile.grid.x(i));
    }
    out.coefficients[m] = kI * xi / two_b * acc * dx;
  }
  return out;
}

}  // namespace shwave
