// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "graphbec/exhaustion.hpp"
#include "graphbec/graph.hpp"

namespace graphbec {

enum class OperatorKind { laplacian, adjacency, schrodinger };

/// One-particle Hamiltonian on a finite graph as a dense symmetric
/// matrix. laplacian = degree diagonal minus adjacency (positive
/// semidefinite); adjacency = 0/1 off-diagonal; schrodinger =
/// E - A + v with E the top of the spectrum of A - v, so the result is
/// positive semidefinite with 0 in its spectrum.
struct OneParticleOperator {
  OperatorKind kind = OperatorKind::laplacian;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd potential;  // empty unless schrodinger
  double spectral_shift = 0;  // E for schrodinger, else 0
};

struct SpectralData {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
};

struct SpectralOptions {
  int dense_limit = 4096;
  double reconstruction_tol = 1e-10;  // relative
  double zero_mode_tol = 1e-9;        // absolute eigenvalue threshold
};

OneParticleOperator build_operator(const Graph& g, OperatorKind kind,
                                   const Eigen::VectorXd& potential = Eigen::VectorXd());

SpectralData eigendecompose(const OneParticleOperator& op, const SpectralOptions& opt = {});
SpectralData eigendecompose(const Eigen::MatrixXd& symmetric, const SpectralOptions& opt = {});

/// Q f(Lambda) Q^T. Throws std::domain_error naming the eigenvalue when
/// f is singular (non-finite) at some eigenvalue.
Eigen::MatrixXd matfunc(const SpectralData& sd, const std::function<double(double)>& f);

/// Debug export: plain text "matrix <rows> <cols>" header plus one row
/// per line.
void write_matrix_text(std::ostream& out, const Eigen::MatrixXd& m);

/// Both sides of the finite-volume heat-trace comparison for stage n,
/// with the infinite graph realized on a larger host stage. The chain
/// asserted is lhs <= rhs with
///   lhs = tr exp(beta Delta_stage)        (intrinsic stage Laplacian)
///   rhs = tr(P_b beta A_host e^{beta Delta_host} P_b)
///       + tr(e^{beta Delta_stage} P_b)
///       + tr(P_stage e^{beta Delta_host} P_stage),
/// P_b projecting onto the stage boundary. Also reports the nested
/// cut-down monotonicity triple for W1 = interior, W2 = stage:
///   tr exp(beta P_W1 Delta_host P_W1) <= tr exp(beta P_W2 Delta_host P_W2)
///     <= tr(P_W2 e^{beta Delta_host} P_W2).
struct HeatTraceComparison {
  double lhs = 0;
  double boundary_adjacency_term = 0;
  double boundary_trace_term = 0;
  double projected_host_term = 0;
  double rhs = 0;
  double nested_inner = 0;   // W1 cut-down trace
  double nested_outer = 0;   // W2 cut-down trace
  double nested_host = 0;    // projected host heat trace
  int host_stage = 0;
};
HeatTraceComparison heat_trace_comparison(const Exhaustion& exh, int n, double beta,
                                          int host_margin = 3,
                                          const SpectralOptions& opt = {});

/// Trace of exp(beta * P_W Delta P_W) where the cut-down keeps the full
/// diagonal of Delta on W and restricts the adjacency to W.
double cutdown_heat_trace(const Eigen::MatrixXd& laplacian, const std::vector<int>& subset,
                          double beta);

/// Ground-state transform of the quadratic form: for h = E - A + v with
/// Perron ground state Omega (h Omega = 0, Omega > 0),
///   (f Omega, h f Omega) = sum_{(i,j) in E} |f_i - f_j|^2 Omega_i Omega_j.
/// Returns both evaluations.
struct DirichletFormValue {
  double bilinear = 0;  // (f Omega, h f Omega)
  double edge_sum = 0;
};
DirichletFormValue dirichlet_form(const Graph& g, const OneParticleOperator& op,
                                  const Eigen::VectorXd& f, const SpectralOptions& opt = {});

/// Perron ground state of a schrodinger operator on a connected graph
/// (eigenvector of the 0 eigenvalue, made positive). Throws when the
/// computed vector has a nonpositive entry.
Eigen::VectorXd perron_ground_state(const OneParticleOperator& op,
                                    const SpectralOptions& opt = {});

}  // namespace graphbec
