// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphbec/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "graphbec/bloch.hpp"

namespace graphbec {

namespace {

/// occupation z e^{-beta x} / (1 - z e^{-beta x}), written with the
/// stable denominator (1 - z) + z (1 - e^{-beta x}).
double occupation(double x, double beta, double z, double one_minus_z) {
  const double w = std::exp(-beta * x);
  const double denom = one_minus_z + z * (-std::expm1(-beta * x));
  return z * w / denom;
}

Eigen::VectorXd degree_potential_of(const PeriodicLattice& lat) {
  Eigen::VectorXd d(lat.cell_size());
  for (int a = 0; a < lat.cell_size(); ++a) d[a] = lat.cell_degree(a);
  return d;
}

}  // namespace

double density_of_z(const Eigen::VectorXd& eigenvalues, double beta, double z) {
  if (beta <= 0) throw std::invalid_argument("beta must be positive");
  if (z <= 0 || z >= 1) throw std::invalid_argument("fugacity must lie in (0, 1)");
  double acc = 0;
  const double one_minus_z = 1.0 - z;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k)
    acc += occupation(eigenvalues[k], beta, z, one_minus_z);
  return acc / static_cast<double>(eigenvalues.size());
}

ThermoSolution solve_fugacity(const Eigen::VectorXd& eigenvalues, double beta, double rho,
                              const ThermoOptions& opt) {
  if (rho <= 0) throw std::invalid_argument("density must be positive");
  if (beta <= 0) throw std::invalid_argument("beta must be positive");
  if (eigenvalues.size() == 0) throw std::invalid_argument("empty spectrum");

  // bisection on t = log(z / (1-z)); the density is strictly increasing
  // in z, so the bracket is monotone
  auto z_of = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
  auto one_minus_z_of = [](double t) { return 1.0 / (1.0 + std::exp(t)); };
  auto density_at = [&](double t) {
    const double z = z_of(t);
    const double omz = one_minus_z_of(t);
    double acc = 0;
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k)
      acc += occupation(eigenvalues[k], beta, z, omz);
    return acc / static_cast<double>(eigenvalues.size());
  };

  double lo = -80, hi = 80;
  while (density_at(lo) > rho) lo *= 1.5;
  while (density_at(hi) < rho) hi *= 1.5;
  for (int it = 0; it < opt.max_bisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (density_at(mid) < rho)
      lo = mid;
    else
      hi = mid;
  }
  const double t = 0.5 * (lo + hi);

  ThermoSolution sol;
  sol.beta = beta;
  sol.rho = rho;
  sol.z = z_of(t);
  sol.mu = -std::log(sol.z) / beta;
  sol.volume = static_cast<int>(eigenvalues.size());
  sol.occupations.resize(eigenvalues.size());
  const double omz = one_minus_z_of(t);
  double acc = 0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    sol.occupations[k] = occupation(eigenvalues[k], beta, sol.z, omz);
    acc += sol.occupations[k];
  }
  sol.density_residual = std::abs(rho - acc / sol.volume);
  if (sol.density_residual > opt.residual_tol * std::max(1.0, rho)) {
    std::ostringstream msg;
    msg << "fugacity solve residual " << sol.density_residual << " exceeds tolerance";
    throw std::runtime_error(msg.str());
  }
  return sol;
}

double occupation_trace_excluding_ground(const Eigen::VectorXd& eigenvalues, double beta,
                                         double z, double zero_mode_tol) {
  double acc = 0;
  const double one_minus_z = 1.0 - z;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    if (eigenvalues[k] <= zero_mode_tol) continue;
    acc += occupation(eigenvalues[k], beta, z, one_minus_z);
  }
  return acc;
}

CriticalDensityEstimate critical_density(const Exhaustion& exh, double beta,
                                         const std::vector<int>& stages,
                                         const ThermoOptions& opt) {
  if (beta <= 0) throw std::invalid_argument("beta must be positive");
  if (stages.empty()) throw std::invalid_argument("need at least one stage");
  CriticalDensityEstimate out;
  out.beta = beta;
  out.stages = stages;

  const bool lattice_route = exh.has_lattice_base() && exh.defects().empty();
  for (int n : stages) {
    Eigen::VectorXd spectrum;
    int volume = 0;
    if (lattice_route) {
      const auto& lat = exh.lattice();
      spectrum = periodic_stage_spectrum(lat, degree_potential_of(lat), n);
      volume = static_cast<int>(spectrum.size());
    } else {
      StageGraph s = exh.stage(n);
      OneParticleOperator lap = build_operator(s.graph, OperatorKind::laplacian);
      SpectralData sd = eigendecompose(lap, opt.spectral);
      spectrum = sd.eigenvalues;
      volume = s.graph.vertex_count();
    }
    out.volumes.push_back(volume);
    out.per_stage.push_back(
        occupation_trace_excluding_ground(spectrum, beta, 1.0, opt.zero_mode_tol) / volume);
  }

  if (stages.size() < 3) return out;  // raw values only

  // model comparison over the last stages: finite a + b x (x = 1/L),
  // log-divergent a + b ln(1/x), power-divergent ln v = a + b ln(1/x)
  const std::size_t m = out.per_stage.size();
  std::vector<double> x(m), val(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double L = lattice_route ? (2.0 * stages[i] + 1.0) : static_cast<double>(stages[i]);
    x[i] = 1.0 / L;
    val[i] = out.per_stage[i];
  }
  auto linear_fit = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ys[i] - (intercept + slope * xs[i]);
      rss += r * r;
    }
    return std::tuple<double, double, double>(intercept, slope, rss);
  };

  std::vector<double> lx(m), lv(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx[i] = std::log(1.0 / x[i]);
    lv[i] = std::log(std::max(val[i], 1e-300));
  }
  auto [a_fin, b_fin, rss_fin] = linear_fit(x, val);
  auto [a_log, b_log, rss_log] = linear_fit(lx, val);
  auto [a_pow, b_pow, rss_pow] = linear_fit(lx, lv);
  (void)a_log;
  (void)a_pow;

  const double scale = std::max(1e-300, val.back() * val.back() * m);
  const bool log_divergent = b_log > 0 && rss_log < 0.5 * rss_fin;
  const bool power_divergent = b_pow > 0.2 && rss_pow * scale < 0.5 * rss_fin;
  if (power_divergent) {
    out.infinite = true;
    out.fit_model = "power";
  } else if (log_divergent) {
    out.infinite = true;
    out.fit_model = "log";
  } else {
    out.fit_model = "finite";
    out.extrapolated = a_fin;
    (void)b_fin;
  }
  return out;
}

QuasiFreeState make_normal_state(double beta, double z) {
  if (z <= 0 || z >= 1) throw std::invalid_argument("normal regime needs z in (0, 1)");
  QuasiFreeState s;
  s.regime = Regime::normal;
  s.beta = beta;
  s.z = z;
  return s;
}

QuasiFreeState make_condensed_state(double beta, double condensate_density) {
  if (condensate_density <= 0)
    throw std::invalid_argument("condensed regime requires rho > rho_bar");
  QuasiFreeState s;
  s.regime = Regime::condensed;
  s.beta = beta;
  s.z = 1.0;
  s.condensate = condensate_density;
  return s;
}

namespace {

int support_boundary_distance(const StageGraph& stage, const Eigen::VectorXcd& f,
                              const Eigen::VectorXcd& g) {
  if (stage.boundary.empty()) return stage.graph.vertex_count();
  auto dist = stage.graph.distances_from_set(stage.boundary);
  int best = stage.graph.vertex_count();
  for (int v = 0; v < stage.graph.vertex_count(); ++v)
    if (std::abs(f[v]) > 0 || std::abs(g[v]) > 0) best = std::min(best, dist[v]);
  return best;
}

std::complex<double> chi_flat(const Eigen::VectorXcd& f) { return f.sum(); }

}  // namespace

TwoPointValue two_point(const QuasiFreeState& state, const SpectralData& sd,
                        const Eigen::VectorXcd& f, const Eigen::VectorXcd& g,
                        const StageGraph* stage, int boundary_margin, const ThermoOptions& opt) {
  if (f.size() != sd.eigenvalues.size() || g.size() != sd.eigenvalues.size())
    throw std::invalid_argument("test function size mismatch");
  TwoPointValue out;
  if (stage) {
    out.support_boundary_distance = support_boundary_distance(*stage, f, g);
    out.boundary_warning = out.support_boundary_distance < boundary_margin;
  }

  const Eigen::VectorXcd fhat = sd.eigenvectors.transpose().cast<std::complex<double>>() * f;
  const Eigen::VectorXcd ghat = sd.eigenvectors.transpose().cast<std::complex<double>>() * g;
  std::complex<double> acc = 0;
  if (state.regime == Regime::normal) {
    const double omz = 1.0 - state.z;
    for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
      acc += std::conj(ghat[k]) * fhat[k] * occupation(sd.eigenvalues[k], state.beta, state.z, omz);
  } else {
    for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
      if (sd.eigenvalues[k] <= opt.zero_mode_tol) continue;
      acc += std::conj(ghat[k]) * fhat[k] * occupation(sd.eigenvalues[k], state.beta, 1.0, 0.0);
    }
    acc += state.condensate * chi_flat(f) * std::conj(chi_flat(g));
  }
  out.value = acc;
  return out;
}

double weyl_value(const QuasiFreeState& state, const SpectralData& sd, const Eigen::VectorXcd& f,
                  const ThermoOptions& opt) {
  if (f.size() != sd.eigenvalues.size())
    throw std::invalid_argument("test function size mismatch");
  const Eigen::VectorXcd fhat = sd.eigenvectors.transpose().cast<std::complex<double>>() * f;
  double quad = 0;
  if (state.regime == Regime::normal) {
    for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
      const double occ = occupation(sd.eigenvalues[k], state.beta, state.z, 1.0 - state.z);
      quad += std::norm(fhat[k]) * (1.0 + 2.0 * occ);  // (1+ze^..)/(1-ze^..) = 1 + 2 occ
    }
    return std::exp(-0.25 * quad);
  }
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    if (sd.eigenvalues[k] <= opt.zero_mode_tol) continue;
    const double occ = occupation(sd.eigenvalues[k], state.beta, 1.0, 0.0);
    quad += std::norm(fhat[k]) * (1.0 + 2.0 * occ);
  }
  const double condensate_factor = std::exp(-0.5 * state.condensate * std::norm(chi_flat(f)));
  return condensate_factor * std::exp(-0.25 * quad);
}

std::complex<double> factor_state_value(double eta, double theta, double rho_bar,
                                        const SpectralData& sd, double beta,
                                        const Eigen::VectorXcd& f, const ThermoOptions& opt) {
  if (eta < rho_bar) throw std::invalid_argument("eta must be >= rho_bar");
  const Eigen::VectorXcd fhat = sd.eigenvectors.transpose().cast<std::complex<double>>() * f;
  double quad = 0;
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    if (sd.eigenvalues[k] <= opt.zero_mode_tol) continue;
    const double occ = occupation(sd.eigenvalues[k], beta, 1.0, 0.0);
    quad += std::norm(fhat[k]) * (1.0 + 2.0 * occ);
  }
  const std::complex<double> chi = chi_flat(f);
  const std::complex<double> rotated = std::polar(1.0, theta) * chi;
  const double phase = std::sqrt(eta - rho_bar) * 2.0 * rotated.real();
  return std::polar(std::exp(-0.25 * quad), phase);
}

std::vector<CriticalGreenBound> bound_critical_by_green(const Exhaustion& exh, double beta,
                                                        double z, const std::vector<int>& stages,
                                                        int host_margin, const ThermoOptions& opt) {
  if (z < 0 || z >= 1) throw std::invalid_argument("z must lie in [0, 1)");
  std::vector<CriticalGreenBound> out;
  const double dbar = exh.degree_bound();
  for (int n : stages) {
    CriticalGreenBound b;
    b.stage = n;
    if (z == 0) {
      out.push_back(b);
      continue;
    }
    StageGraph inner = exh.stage(n);
    StageGraph host = exh.stage(n + host_margin);
    OneParticleOperator stage_lap = build_operator(inner.graph, OperatorKind::laplacian);
    OneParticleOperator host_lap = build_operator(host.graph, OperatorKind::laplacian);
    SpectralData sd_stage = eigendecompose(stage_lap, opt.spectral);
    SpectralData sd_host = eigendecompose(host_lap, opt.spectral);

    const double omz = 1.0 - z;
    for (Eigen::Index k = 0; k < sd_stage.eigenvalues.size(); ++k)
      b.lhs += occupation(sd_stage.eigenvalues[k], beta, z, omz);

    b.boundary_term = dbar * static_cast<double>(inner.boundary.size()) *
                      (beta * z / (omz * omz) + z / omz);

    // projected host occupation trace over the inner-stage vertices
    Eigen::MatrixXd host_occ = matfunc(
        sd_host, [&](double x) { return occupation(x, beta, z, omz); });
    // inner vertices embed into the host stage in the same enumeration
    // order for both base kinds
    std::vector<int> embed(inner.graph.vertex_count());
    if (exh.has_lattice_base()) {
      const int Lh = 2 * (n + host_margin) + 1;
      const int nu = exh.lattice().nu();
      const int cs = exh.lattice().cell_size();
      for (int v = 0; v < inner.graph.vertex_count(); ++v) {
        std::int64_t idx = 0;
        for (int i = nu - 1; i >= 0; --i)
          idx = idx * Lh + (inner.vertex_ids[v].cell[i] + n + host_margin);
        embed[v] = static_cast<int>(idx * cs + inner.vertex_ids[v].local);
      }
    } else {
      auto dist = host.graph.distances_from(host.origin);
      int w = 0;
      for (int v = 0; v < host.graph.vertex_count(); ++v)
        if (dist[v] <= n) embed[w++] = v;
    }
    for (int v = 0; v < inner.graph.vertex_count(); ++v)
      b.projected_host_term += host_occ(embed[v], embed[v]);

    b.rhs = b.boundary_term + b.projected_host_term;
    b.holds = b.lhs <= b.rhs + 1e-10 * std::max(1.0, b.rhs);

    for (int v = 0; v < host.graph.vertex_count(); ++v)
      b.sup_occupation_diagonal = std::max(b.sup_occupation_diagonal, host_occ(v, v));
    Eigen::MatrixXd host_green =
        matfunc(sd_host, [&](double x) { return 1.0 / (x + omz); });
    for (int v = 0; v < host.graph.vertex_count(); ++v)
      b.sup_green_diagonal = std::max(b.sup_green_diagonal, host_green(v, v));
    out.push_back(b);
  }
  return out;
}

}  // namespace graphbec
