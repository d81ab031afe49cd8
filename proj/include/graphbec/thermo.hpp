// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "graphbec/exhaustion.hpp"
#include "graphbec/spectral.hpp"

namespace graphbec {

struct ThermoOptions {
  double residual_tol = 1e-10;
  int max_bisection = 200;
  double zero_mode_tol = 1e-9;
  SpectralOptions spectral;
};

/// Mean particle density at inverse temperature beta and fugacity z for
/// the one-particle spectrum `eigenvalues` (of a positive operator with
/// ground value 0):
///   rho(z) = |V|^{-1} sum_k z e^{-beta lambda_k} / (1 - z e^{-beta lambda_k}).
/// Strictly increasing in z; evaluated through expm1 so that z near 1
/// stays accurate.
double density_of_z(const Eigen::VectorXd& eigenvalues, double beta, double z);

/// Grand-canonical solution of rho = rho(z) on one finite volume.
struct ThermoSolution {
  double beta = 0;
  double rho = 0;
  double z = 0;
  double mu = 0;  // z = exp(-beta mu)
  double density_residual = 0;
  Eigen::VectorXd occupations;  // per eigenmode
  int volume = 0;
};
ThermoSolution solve_fugacity(const Eigen::VectorXd& eigenvalues, double beta, double rho,
                              const ThermoOptions& opt = {});

/// Zero-mode-excluded occupation trace per volume along exhaustion
/// stages, with an extrapolation or a divergence flag. Periodic-lattice
/// stages use the momentum-factorized spectrum of the periodic block;
/// other bases use the dense stage Laplacian.
struct CriticalDensityEstimate {
  double beta = 0;
  std::vector<int> stages;
  std::vector<int> volumes;
  std::vector<double> per_stage;
  std::optional<double> extrapolated;  // a from fit a + b/L over the last stages
  bool infinite = false;               // per-stage values grow without bound
  std::string method = "ground_mode_excluded";
  std::string fit_model;               // "finite", "log", "power", or "" (no fit)
};
CriticalDensityEstimate critical_density(const Exhaustion& exh, double beta,
                                         const std::vector<int>& stages,
                                         const ThermoOptions& opt = {});

/// Value of the zero-mode-excluded trace for one explicit spectrum.
double occupation_trace_excluding_ground(const Eigen::VectorXd& eigenvalues, double beta,
                                         double z, double zero_mode_tol = 1e-9);

enum class Regime { normal, condensed };

/// Quasi-free equilibrium state functional on one finite stage: kernel
/// z e^{beta Delta} / (1 - z e^{beta Delta}) in the normal regime; in
/// the condensed regime the fugacity sits at 1, the kernel acts on the
/// zero-mode complement and the condensate is an explicit rank-one term
/// (rho - rho_bar) chi(f) conj(chi(g)) with chi(f) = sum_j f_j.
struct QuasiFreeState {
  Regime regime = Regime::normal;
  double beta = 0;
  double z = 0;           // normal regime
  double condensate = 0;  // rho - rho_bar, condensed regime
};
QuasiFreeState make_normal_state(double beta, double z);
QuasiFreeState make_condensed_state(double beta, double condensate_density);

struct TwoPointValue {
  std::complex<double> value;
  int support_boundary_distance = -1;  // -1: no stage supplied
  bool boundary_warning = false;
};
/// phi(a*(f) a(g)) evaluated spectrally. When `stage` is supplied, test
/// function supports are checked against the stage boundary (margin
/// violations only warn).
TwoPointValue two_point(const QuasiFreeState& state, const SpectralData& sd,
                        const Eigen::VectorXcd& f, const Eigen::VectorXcd& g,
                        const StageGraph* stage = nullptr, int boundary_margin = 2,
                        const ThermoOptions& opt = {});

/// phi(W(f)) in (0, 1]; the log is a negative quadratic form in f.
double weyl_value(const QuasiFreeState& state, const SpectralData& sd,
                  const Eigen::VectorXcd& f, const ThermoOptions& opt = {});

/// Extremal decomposition component
///   psi^{(beta,eta,theta)}(W(f)) = exp{i sqrt(eta - rho_bar)
///       (e^{i theta} chi(f) + e^{-i theta} conj(chi(f)))} x normal part.
/// Requires eta >= rho_bar.
std::complex<double> factor_state_value(double eta, double theta, double rho_bar,
                                        const SpectralData& sd, double beta,
                                        const Eigen::VectorXcd& f,
                                        const ThermoOptions& opt = {});

/// Per-stage chain bounding the finite-volume occupation trace by a
/// boundary term plus the projected host trace:
///   tr(z e^{beta D_n}/(1 - z e^{beta D_n}))
///     <= C |bd| (beta z/(1-z)^2 + z/(1-z)) + tr(P_n K_host P_n),
/// C = degree bound. Also reports the host Green-function comparison
/// sup_i (delta_i, K delta_i) vs C' (delta_i, (h + 1 - z)^{-1} delta_i).
struct CriticalGreenBound {
  int stage = 0;
  double lhs = 0;
  double boundary_term = 0;
  double projected_host_term = 0;
  double rhs = 0;
  bool holds = false;
  double sup_occupation_diagonal = 0;
  double sup_green_diagonal = 0;
};
std::vector<CriticalGreenBound> bound_critical_by_green(const Exhaustion& exh, double beta,
                                                        double z, const std::vector<int>& stages,
                                                        int host_margin = 3,
                                                        const ThermoOptions& opt = {});

}  // namespace graphbec
