// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphbec/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace graphbec {

namespace {

Eigen::MatrixXd adjacency_matrix(const Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.vertex_count(), g.vertex_count());
  for (const auto& [i, j] : g.edges()) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

}  // namespace

OneParticleOperator build_operator(const Graph& g, OperatorKind kind,
                                   const Eigen::VectorXd& potential) {
  if (g.vertex_count() == 0) throw std::invalid_argument("empty graph");
  if (g.vertex_count() > 1 && !g.is_connected())
    throw std::invalid_argument("graph must be connected");
  if (potential.size() != 0) {
    if (potential.size() != g.vertex_count())
      throw std::invalid_argument("potential size mismatch");
    if (!potential.allFinite()) throw std::invalid_argument("potential has non-finite entries");
  }

  OneParticleOperator op;
  op.kind = kind;
  Eigen::MatrixXd a = adjacency_matrix(g);
  switch (kind) {
    case OperatorKind::adjacency:
      op.matrix = a;
      break;
    case OperatorKind::laplacian: {
      op.matrix = -a;
      for (int v = 0; v < g.vertex_count(); ++v) op.matrix(v, v) = g.degree(v);
      break;
    }
    case OperatorKind::schrodinger: {
      if (potential.size() == 0)
        throw std::invalid_argument("schrodinger operator needs a potential");
      Eigen::MatrixXd av = a;
      av.diagonal() -= potential;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(av, Eigen::EigenvaluesOnly);
      const double top = es.eigenvalues().maxCoeff();
      op.matrix = -av;
      op.matrix.diagonal().array() += top;
      op.potential = potential;
      op.spectral_shift = top;
      break;
    }
  }
  return op;
}

SpectralData eigendecompose(const Eigen::MatrixXd& symmetric, const SpectralOptions& opt) {
  if (symmetric.rows() != symmetric.cols()) throw std::invalid_argument("matrix not square");
  if (symmetric.rows() > opt.dense_limit) {
    std::ostringstream msg;
    msg << "matrix size " << symmetric.rows() << " exceeds dense limit " << opt.dense_limit;
    throw std::invalid_argument(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigensolver failed to converge");
  SpectralData sd{es.eigenvalues(), es.eigenvectors()};

  const double scale = std::max(1.0, symmetric.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd recon =
      sd.eigenvectors * sd.eigenvalues.asDiagonal() * sd.eigenvectors.transpose();
  if ((recon - symmetric).cwiseAbs().maxCoeff() > 100 * opt.reconstruction_tol * scale)
    throw std::runtime_error("eigendecomposition reconstruction residual too large");
  return sd;
}

SpectralData eigendecompose(const OneParticleOperator& op, const SpectralOptions& opt) {
  SpectralData sd = eigendecompose(op.matrix, opt);
  if (op.kind == OperatorKind::laplacian || op.kind == OperatorKind::schrodinger) {
    if (sd.eigenvalues.minCoeff() < -100 * opt.reconstruction_tol *
                                        std::max(1.0, op.matrix.cwiseAbs().maxCoeff()))
      throw std::runtime_error("positive semidefinite operator has a negative eigenvalue");
  }
  return sd;
}

Eigen::MatrixXd matfunc(const SpectralData& sd, const std::function<double(double)>& f) {
  Eigen::VectorXd fl(sd.eigenvalues.size());
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    const double y = f(sd.eigenvalues[k]);
    if (!std::isfinite(y)) {
      std::ostringstream msg;
      msg << "matrix function singular at eigenvalue " << sd.eigenvalues[k] << " (mode " << k
          << ")";
      throw std::domain_error(msg.str());
    }
    fl[k] = y;
  }
  return sd.eigenvectors * fl.asDiagonal() * sd.eigenvectors.transpose();
}

void write_matrix_text(std::ostream& out, const Eigen::MatrixXd& m) {
  out << "matrix " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
    out << "\n";
  }
}

double cutdown_heat_trace(const Eigen::MatrixXd& laplacian, const std::vector<int>& subset,
                          double beta) {
  const int m = static_cast<int>(subset.size());
  if (m == 0) return 0.0;
  Eigen::MatrixXd cut(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) cut(r, c) = laplacian(subset[r], subset[c]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-beta * cut, Eigen::EigenvaluesOnly);
  return es.eigenvalues().array().exp().sum();
}

HeatTraceComparison heat_trace_comparison(const Exhaustion& exh, int n, double beta,
                                          int host_margin, const SpectralOptions& opt) {
  if (beta <= 0) throw std::invalid_argument("beta must be positive");
  if (host_margin < 1) throw std::invalid_argument("host margin must be >= 1");
  HeatTraceComparison out;
  out.host_stage = n + host_margin;

  StageGraph host = exh.stage(out.host_stage);
  StageGraph inner = exh.stage(n);

  // Identify inner-stage vertices inside the host stage.
  std::vector<int> inner_in_host(inner.graph.vertex_count(), -1);
  if (exh.has_lattice_base()) {
    // lattice coordinates give the injection directly
    const int Lh = 2 * out.host_stage + 1;
    const int nu = exh.lattice().nu();
    const int cs = exh.lattice().cell_size();
    auto host_index = [&](const LatticeVertex& v) {
      std::int64_t idx = 0;
      for (int i = nu - 1; i >= 0; --i) idx = idx * Lh + (v.cell[i] + out.host_stage);
      return static_cast<int>(idx * cs + v.local);
    };
    for (int v = 0; v < inner.graph.vertex_count(); ++v)
      inner_in_host[v] = host_index(inner.vertex_ids[v]);
  } else {
    // metric balls: stage vertices enumerate in the same host order
    auto dist = host.graph.distances_from(host.origin);
    std::vector<int> members;
    for (int v = 0; v < host.graph.vertex_count(); ++v)
      if (dist[v] <= n) members.push_back(v);
    if (static_cast<int>(members.size()) != inner.graph.vertex_count())
      throw std::logic_error("stage embedding mismatch");
    for (int v = 0; v < inner.graph.vertex_count(); ++v) inner_in_host[v] = members[v];
  }

  OneParticleOperator host_lap = build_operator(host.graph, OperatorKind::laplacian);
  OneParticleOperator stage_lap = build_operator(inner.graph, OperatorKind::laplacian);
  SpectralData host_sd = eigendecompose(host_lap, opt);
  SpectralData stage_sd = eigendecompose(stage_lap, opt);

  const Eigen::MatrixXd host_heat =
      matfunc(host_sd, [beta](double x) { return std::exp(-beta * x); });
  const Eigen::MatrixXd stage_heat =
      matfunc(stage_sd, [beta](double x) { return std::exp(-beta * x); });

  out.lhs = stage_heat.trace();

  // boundary of the inner stage, in stage indexing
  std::vector<bool> is_boundary(inner.graph.vertex_count(), false);
  for (int v : inner.boundary) is_boundary[v] = true;

  // tr(P_b beta A_host e^{beta Delta_host} P_b)
  Eigen::MatrixXd host_adj = Eigen::MatrixXd::Zero(host.graph.vertex_count(),
                                                   host.graph.vertex_count());
  for (const auto& [i, j] : host.graph.edges()) {
    host_adj(i, j) = 1.0;
    host_adj(j, i) = 1.0;
  }
  for (int v : inner.boundary) {
    const int hv = inner_in_host[v];
    out.boundary_adjacency_term += beta * host_adj.row(hv).dot(host_heat.col(hv));
  }

  // tr(e^{beta Delta_stage} P_b)
  for (int v : inner.boundary) out.boundary_trace_term += stage_heat(v, v);

  // tr(P_stage e^{beta Delta_host} P_stage)
  for (int v = 0; v < inner.graph.vertex_count(); ++v)
    out.projected_host_term += host_heat(inner_in_host[v], inner_in_host[v]);

  out.rhs = out.boundary_adjacency_term + out.boundary_trace_term + out.projected_host_term;

  // nested cut-down monotonicity with W1 = interior, W2 = whole stage
  std::vector<int> w1, w2;
  for (int v = 0; v < inner.graph.vertex_count(); ++v) {
    w2.push_back(inner_in_host[v]);
    if (!is_boundary[v]) w1.push_back(inner_in_host[v]);
  }
  out.nested_inner = cutdown_heat_trace(host_lap.matrix, w1, beta);
  out.nested_outer = cutdown_heat_trace(host_lap.matrix, w2, beta);
  out.nested_host = out.projected_host_term;
  return out;
}

Eigen::VectorXd perron_ground_state(const OneParticleOperator& op, const SpectralOptions& opt) {
  if (op.kind != OperatorKind::schrodinger && op.kind != OperatorKind::laplacian)
    throw std::invalid_argument("ground state defined for laplacian/schrodinger kinds");
  SpectralData sd = eigendecompose(op, opt);
  if (sd.eigenvalues[0] > opt.zero_mode_tol)
    throw std::runtime_error("operator has no zero mode");
  Eigen::VectorXd omega = sd.eigenvectors.col(0);
  if (omega.sum() < 0) omega = -omega;
  if (omega.minCoeff() <= 0)
    throw std::runtime_error(
        "ground state has a nonpositive entry (wrong eigenvector or disconnected graph)");
  return omega;
}

DirichletFormValue dirichlet_form(const Graph& g, const OneParticleOperator& op,
                                  const Eigen::VectorXd& f, const SpectralOptions& opt) {
  if (f.size() != g.vertex_count()) throw std::invalid_argument("test function size mismatch");
  Eigen::VectorXd omega;
  if (op.kind == OperatorKind::laplacian) {
    omega = Eigen::VectorXd::Ones(g.vertex_count());
  } else {
    omega = perron_ground_state(op, opt);
    // scale is irrelevant to the identity; keep the solver normalization
  }
  DirichletFormValue out;
  const Eigen::VectorXd fo = f.cwiseProduct(omega);
  out.bilinear = fo.dot(op.matrix * fo);
  for (const auto& [i, j] : g.edges()) {
    const double d = f[i] - f[j];
    out.edge_sum += d * d * omega[i] * omega[j];
  }
  return out;
}

}  // namespace graphbec
