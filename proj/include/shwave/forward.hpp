// Forward SH-wave scattering by a one-sided plate thinning.
//
// Two routes to the reflection spectrum of the fundamental mode:
//   * solve_reflection: staircase mode matching, junction scattering
//     matrices cascaded with the Redheffer star product;
//   * born_forward: first-order (Born) Fourier kernel, linear in the profile.
//
// Sign conventions. The incident mode travels from the right toward -x1 and
// is written exp(+i xi x1) with time factor exp(+i omega t); the reflected
// wave is exp(-i xi x1). Reported coefficients are referred to the plane
// x1 = 0 of the spatial grid, which makes both routes share the same phase.
// Internally the solver works with exp(-i omega t) and right-going modes
// exp(+i xi x1); reported values are the complex conjugates of the internal
// ones, which is exact for a lossless plate.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "shwave/defect.hpp"
#include "shwave/waveguide.hpp"

namespace shwave {

struct WavenumberGrid {
  std::vector<double> xi;  // incident mode-0 wavenumbers, strictly increasing
  bool single_mode = true;

  double xi_min() const { return xi.front(); }
  double xi_max() const { return xi.back(); }
  int size() const { return static_cast<int>(xi.size()); }

  // M samples with xi*b evenly spaced in [xib_min, xib_max].
  static WavenumberGrid linear(const PlateSpec& plate, double xib_min = 0.1, double xib_max = 1.5,
                               int samples = 64, bool single_mode = true);

  // Throws std::invalid_argument when not strictly increasing, xi_min <= 0, or
  // the single-mode flag is set while some sample reaches the first cutoff.
  void validate(const PlateSpec& plate) const;
};

struct ReflectionSpectrum {
  WavenumberGrid grid;
  std::vector<cplx> coefficients;
};

// Piecewise-constant plate height over the grid window. Outside
// [edges.front(), edges.back()] the plate has full depth.
struct StaircaseModel {
  std::vector<double> edges;    // S + 1 positions
  std::vector<double> heights;  // S remaining heights 2b - d

  int segments() const { return static_cast<int>(heights.size()); }
};

/// Each profile sample is a cell of constant depth. The defect support is cut
/// into `segments` equal pieces, each takes the depth at its midpoint, and
/// neighbours of equal height are merged. Full-depth flanks pad the model out
/// to the grid window.
StaircaseModel staircase(const PlateSpec& plate, const DepthProfile& profile, int segments);

// Modes of a layer of thickness h, bottom-referenced: cos(n pi (x2 + b) / h).
// Exact-cutoff orders are skipped, so `orders` need not be contiguous.
struct ModalBasis {
  double height = 1.0;
  std::vector<int> orders;
  Eigen::VectorXcd xi;
  Eigen::VectorXd norm;  // integral of the squared shape over the layer

  int size() const { return static_cast<int>(orders.size()); }
  // Re(xi_n) * norm_n; zero for evanescent modes.
  double power_factor(int i) const { return xi(i).real() * norm(i); }
};

ModalBasis modal_basis(double height, double k, int n_modes);

// Scattering blocks between a left and a right port:
//   [b_left; a_right] = [s11 s12; s21 s22] [a_left; b_right]
// with a = right-going and b = left-going modal amplitudes at the port planes.
struct SMatrix {
  Eigen::MatrixXcd s11, s12, s21, s22;
};

SMatrix star(const SMatrix& a, const SMatrix& b);

struct Junction {
  ModalBasis left, right;
  SMatrix s;
};

/// Mode-matching scattering matrix of a height step at a single plane
/// (internal exp(-i omega t) convention, amplitudes at the step plane).
/// Requires n_modes >= (propagating count of the thicker side) + 4. Throws
/// Error(singular_projection_system) if the matching system is singular.
Junction junction_smatrix(const PlateSpec& plate, double h_left, double h_right, double omega,
                          int n_modes);

struct SolverSettings {
  int n_modes = 12;
  int segments = 64;
};

// Whole-defect scattering in the full-plate basis (internal convention).
// Ports sit at the first and last height steps; with no steps both planes
// are at x1 = 0 and the matrix is the identity transmission.
struct DefectScattering {
  ModalBasis lead;  // full-plate basis on both sides
  SMatrix s;
  double left_plane = 0.0;
  double right_plane = 0.0;
};

DefectScattering scatter(const PlateSpec& plate, const StaircaseModel& model, double omega,
                         int n_modes);

/// Mode-0 reflection spectrum of the full-wave solver, reported convention.
ReflectionSpectrum solve_reflection(const PlateSpec& plate, const DepthProfile& profile,
                                    const WavenumberGrid& grid, const SolverSettings& settings = {});

/// Diagonal reflection C_nn of modes n < max_order for each angular frequency,
/// incident from the right in mode n, reported convention. Entries for modes
/// that do not propagate at that frequency are NaN.
struct ModalReflectionTable {
  std::vector<double> omega;
  int max_order = 5;
  std::vector<std::vector<cplx>> coefficients;  // [omega index][mode]
  std::vector<std::vector<double>> xi;          // axial wavenumber, NaN when not propagating
};

ModalReflectionTable solve_modal_reflection(const PlateSpec& plate, const DepthProfile& profile,
                                            const std::vector<double>& omegas, int max_order,
                                            const SolverSettings& settings);

/// C(xi) = (i xi / 2b) * sum_i d(x_i) exp(2 i xi x_i) dx.
ReflectionSpectrum born_forward(const PlateSpec& plate, const DepthProfile& profile,
                                const WavenumberGrid& grid);

}  // namespace shwave
