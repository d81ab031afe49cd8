// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graphbec/lattice.hpp"

namespace graphbec {

using QuasiMomentum = Eigen::VectorXd;  // in [-pi, pi]^nu

/// Fundamental-cell matrix of the adjacency operator restricted to the
/// twisted-boundary sector of quasi-momentum p, minus the periodic
/// potential: entries carry the bridge phases e^{i p.offset}.
struct TwistedOperator {
  Eigen::MatrixXcd matrix;  // A~(p) - diag(v), Hermitian
  QuasiMomentum p;
};

TwistedOperator twisted_matrix(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                               const QuasiMomentum& p);

/// Ascending eigenvalues of A~(p) - v.
Eigen::VectorXd twisted_spectrum(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                 const QuasiMomentum& p);

/// Band-top scan over the corner grid p in (2 pi / G) Z^nu.
struct BlochBand {
  PeriodicLattice lattice;
  Eigen::VectorXd v;
  int grid_resolution = 0;
  double E = 0;                           // global band top, attained at p = 0
  std::vector<QuasiMomentum> maximizers;  // grid points within tol of E
  bool maximizer_set_degenerate = false;  // cluster wider than one grid cell
  double curvature = 0;                   // C with E - E(p) <= ~ C |p|^2 near maximizers
  Eigen::MatrixXd curvature_form;         // fitted quadratic form
  std::vector<double> e_top;              // E(p) over the scan grid, row-major
  double top_at(const QuasiMomentum& p) const;  // fresh eigenvalue evaluation
};

BlochBand band_top(const PeriodicLattice& lat, const Eigen::VectorXd& v, int grid_resolution);

/// Midpoint Brillouin-zone integration with dyadic shell refinement
/// around singular centers (grid-aligned). Returns the raw integral of
/// f over [-pi, pi]^nu.
struct BzIntegralOptions {
  int base_per_axis = 16;       // even
  int shell_per_axis = 16;      // even
  int max_shells = 40;
  double min_shell_radius = 1e-9;
  double delta = 0.0;           // regularization known to the caller, sets shell depth
};
struct BzIntegral {
  double value = 0;
  std::vector<double> shell_sums;  // outermost first, per innermost center stack
  double core_estimate = 0;        // geometric extrapolation below the last shell
  bool core_extrapolated = false;
};
BzIntegral bz_integrate(int nu, const std::function<double(const QuasiMomentum&)>& f,
                        const std::vector<QuasiMomentum>& centers,
                        const BzIntegralOptions& opt = {});

enum class BecVerdict { no_bec, bec_possible, degenerate_review };

/// Finiteness analysis of the band-top integral int dp / (E - E(p)):
/// shell sums and a delta-refinement study classify the singularity.
struct BecCriterion {
  BecVerdict verdict = BecVerdict::degenerate_review;
  std::vector<double> delta_values;     // descending deltas
  std::vector<double> integral_values;  // (2pi)^-nu I(delta)
  double integral = 0;                  // delta = 0 value when convergent
  double shell_ratio = 0;               // asymptotic ratio of consecutive shell sums
  std::string divergence_model;         // "", "log", "inverse-sqrt", "power"
  std::string note;
};
BecCriterion bec_criterion(const BlochBand& band);

/// Critical density of the periodic lattice with potential v via the
/// quasi-momentum integral of the occupation trace over the cell.
double critical_density_periodic(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                 double beta, int grid_resolution);

/// Both sides of the heat-kernel domination at quasi-momentum p:
///   (f, e^{-beta(E - A~(p) + v)} f) <= (|f|, e^{-beta(E - A~(0) + v)} |f|).
struct DiamagneticCheck {
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
};
DiamagneticCheck diamagnetic_check(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                   double beta, const QuasiMomentum& p,
                                   const Eigen::VectorXcd& f);

/// Gauge transport between degenerate band maxima: when E(p0) = E, a
/// diagonal unitary W with W A~(p) W* = A~(p - p0) exists and is built
/// from the phases of the top eigenvector. Refuses (nullopt) with a
/// residual report when p0 is not a maximizer or the conjugation fails.
struct DegenerateGauge {
  std::optional<Eigen::MatrixXcd> W;
  double residual = 0;   // max over the verification grid
  std::string message;
};
DegenerateGauge degenerate_gauge(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                 const QuasiMomentum& p0, int verify_grid = 9,
                                 double tol = 1e-10);

/// Positive periodic ground state of h = E - A + v, stored with the
/// cell normalization sum_{V0} Omega_i^2 = 1.
struct PeriodicGroundState {
  Eigen::VectorXd omega;
  double M = 0;          // sup Omega / inf Omega
  double residual = 0;   // |(A~(0) - v) Omega - E Omega|_inf
};
PeriodicGroundState periodic_ground_state(const PeriodicLattice& lat, const Eigen::VectorXd& v);

/// chi~(f) = sum_i Omega(i) f_i for a finite-support test function given
/// as (vertex, value) pairs; Omega extended periodically.
std::complex<double> chi_tilde(const PeriodicGroundState& gs,
                               const std::vector<std::pair<LatticeVertex, std::complex<double>>>& f);

/// Finite-volume functional sqrt(#cells) (Omega_l, f) on the periodic
/// block l, with the block ground state normalized to 1.
std::complex<double> chi_tilde_finite(const PeriodicLattice& lat, const Eigen::VectorXd& v, int l,
                                      const std::vector<std::pair<LatticeVertex, std::complex<double>>>& f);

/// Two-sided comparison between the band gaps of h(v) and of the pure
/// Laplacian (v = degree):
///   M^-1 (E^d(0)-E^d(p)) <= E^v(0)-E^v(p) <= M (E^d(0)-E^d(p)).
struct GroundStateComparison {
  double M = 0;
  bool sandwich_holds = false;
  double worst_violation = 0;
  double rayleigh_residual = 0;  // |min gen-eig of the weighted form - (E - E(p))|
};
GroundStateComparison ground_state_compare(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                           int grid_resolution);

/// Spectrum of h_l = E_l - A + v on the periodic block Gamma_l^(p),
/// assembled from the twisted spectra at the discrete momenta
/// p in (2 pi / (2l+1)) Z^nu. Ascending, ground value 0.
Eigen::VectorXd periodic_stage_spectrum(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                        int l);

/// Elementwise eigenvalues of A~(p) - v over the corner grid, for band
/// CSV export.
std::vector<std::pair<QuasiMomentum, Eigen::VectorXd>> band_grid(const PeriodicLattice& lat,
                                                                 const Eigen::VectorXd& v,
                                                                 int grid_resolution);

}  // namespace graphbec
