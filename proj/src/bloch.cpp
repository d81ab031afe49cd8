// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphbec/bloch.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace graphbec {

namespace {

constexpr double kPi = 3.14159265358979323846;

double periodic_delta(double a, double b) {
  double d = std::fmod(a - b, 2 * kPi);
  if (d > kPi) d -= 2 * kPi;
  if (d < -kPi) d += 2 * kPi;
  return d;
}

double periodic_inf_dist(const QuasiMomentum& a, const QuasiMomentum& b) {
  double m = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(periodic_delta(a[i], b[i])));
  return m;
}

Eigen::VectorXd check_potential(const PeriodicLattice& lat, const Eigen::VectorXd& v) {
  if (v.size() == 0) return Eigen::VectorXd::Zero(lat.cell_size());
  if (v.size() != lat.cell_size())
    throw std::invalid_argument("potential must be defined on the fundamental domain");
  if (!v.allFinite()) throw std::invalid_argument("potential has non-finite entries");
  return v;
}

Eigen::VectorXd degree_potential(const PeriodicLattice& lat) {
  Eigen::VectorXd d(lat.cell_size());
  for (int a = 0; a < lat.cell_size(); ++a) d[a] = lat.cell_degree(a);
  return d;
}

}  // namespace

TwistedOperator twisted_matrix(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                               const QuasiMomentum& p) {
  if (p.size() != lat.nu()) throw std::invalid_argument("quasi-momentum dimension mismatch");
  Eigen::VectorXd pot = check_potential(lat, v);
  const int n = lat.cell_size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [a, b] : lat.internal_edges()) {
    m(a, b) += 1.0;
    m(b, a) += 1.0;
  }
  for (const auto& e : lat.bridge_edges()) {
    double theta = 0;
    for (int i = 0; i < lat.nu(); ++i) theta += p[i] * e.offset[i];
    const std::complex<double> phase(std::cos(theta), std::sin(theta));
    m(e.a, e.b) += phase;
    m(e.b, e.a) += std::conj(phase);
  }
  m.diagonal() -= pot.cast<std::complex<double>>();
  return TwistedOperator{std::move(m), p};
}

Eigen::VectorXd twisted_spectrum(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                 const QuasiMomentum& p) {
  TwistedOperator t = twisted_matrix(lat, v, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t.matrix, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double BlochBand::top_at(const QuasiMomentum& p) const {
  return twisted_spectrum(lattice, v, p).maxCoeff();
}

BlochBand band_top(const PeriodicLattice& lat, const Eigen::VectorXd& v, int grid_resolution) {
  if (grid_resolution < 8) throw std::invalid_argument("grid resolution must be >= 8");
  int G = grid_resolution + (grid_resolution % 2);  // even, so 0 is a corner
  const int nu = lat.nu();
  BlochBand band;
  band.lattice = lat;
  band.v = check_potential(lat, v);
  band.grid_resolution = G;

  std::int64_t points = 1;
  for (int i = 0; i < nu; ++i) points *= G;
  band.e_top.resize(points);

  const double h = 2 * kPi / G;
  std::vector<int> idx(nu, 0);
  std::vector<std::int64_t> max_points;
  double best = -std::numeric_limits<double>::infinity();
  QuasiMomentum p(nu);
  for (std::int64_t flat = 0; flat < points; ++flat) {
    for (int i = 0; i < nu; ++i) p[i] = -kPi + idx[i] * h;
    band.e_top[flat] = band.top_at(p);
    best = std::max(best, band.e_top[flat]);
    for (int i = 0; i < nu; ++i) {
      if (++idx[i] < G) break;
      idx[i] = 0;
    }
  }

  const QuasiMomentum zero = QuasiMomentum::Zero(nu);
  const double e0 = band.top_at(zero);
  const double tol = 1e-8 * std::max(1.0, std::abs(e0));
  if (best > e0 + tol) {
    std::ostringstream msg;
    msg << "band top exceeds E(0): E(p)=" << best << " vs E(0)=" << e0
        << " (construction bug)";
    throw std::runtime_error(msg.str());
  }
  band.E = e0;

  // maximizer set: grid points within tol of E, clustered by adjacency
  std::vector<std::int64_t> flat_max;
  for (std::int64_t flat = 0; flat < points; ++flat)
    if (band.E - band.e_top[flat] < tol) flat_max.push_back(flat);

  auto decode = [&](std::int64_t flat) {
    QuasiMomentum q(nu);
    for (int i = 0; i < nu; ++i) {
      q[i] = -kPi + (flat % G) * h;
      flat /= G;
    }
    return q;
  };

  std::vector<bool> used(flat_max.size(), false);
  for (std::size_t i = 0; i < flat_max.size(); ++i) {
    if (used[i]) continue;
    QuasiMomentum center = decode(flat_max[i]);
    int cluster = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < flat_max.size(); ++j) {
      if (used[j]) continue;
      if (periodic_inf_dist(center, decode(flat_max[j])) < 1.5 * h) {
        used[j] = true;
        ++cluster;
        band.maximizer_set_degenerate = true;  // wider than a single grid point
      }
    }
    band.maximizers.push_back(center);
  }

  // quadratic fit of E - E(p) near each maximizer: axis and diagonal
  // directions, radii in [h, 4h], least squares for the symmetric form
  if (!band.maximizer_set_degenerate) {
    std::vector<QuasiMomentum> dirs;
    for (int i = 0; i < nu; ++i) {
      QuasiMomentum d = QuasiMomentum::Zero(nu);
      d[i] = 1;
      dirs.push_back(d);
    }
    for (int i = 0; i < nu; ++i)
      for (int j = i + 1; j < nu; ++j) {
        QuasiMomentum d = QuasiMomentum::Zero(nu);
        d[i] = 1;
        d[j] = 1;
        dirs.push_back(d / std::sqrt(2.0));
        d[j] = -1;
        dirs.push_back(d / std::sqrt(2.0));
      }
    const QuasiMomentum& c = band.maximizers.front();
    const int unknowns = nu * (nu + 1) / 2;
    std::vector<double> radii = {h, 2 * h, 3 * h, 4 * h};
    Eigen::MatrixXd A(static_cast<int>(dirs.size() * radii.size()), unknowns);
    Eigen::VectorXd b(A.rows());
    int row = 0;
    for (const auto& d : dirs)
      for (double r : radii) {
        QuasiMomentum q = c + r * d;
        b[row] = band.E - band.top_at(q);
        int col = 0;
        for (int i = 0; i < nu; ++i)
          for (int j = i; j < nu; ++j) {
            const double pi_ = r * d[i], pj_ = r * d[j];
            A(row, col++) = (i == j) ? pi_ * pj_ : 2 * pi_ * pj_;
          }
        ++row;
      }
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    band.curvature_form = Eigen::MatrixXd::Zero(nu, nu);
    int col = 0;
    for (int i = 0; i < nu; ++i)
      for (int j = i; j < nu; ++j) {
        band.curvature_form(i, j) = coef[col];
        band.curvature_form(j, i) = coef[col];
        ++col;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qf(band.curvature_form, Eigen::EigenvaluesOnly);
    band.curvature = qf.eigenvalues().maxCoeff();
  }
  return band;
}

BzIntegral bz_integrate(int nu, const std::function<double(const QuasiMomentum&)>& f,
                        const std::vector<QuasiMomentum>& centers, const BzIntegralOptions& opt) {
  if (nu < 1) throw std::invalid_argument("dimension must be >= 1");
  BzIntegral out;
  const int G = opt.base_per_axis + (opt.base_per_axis % 2);
  const double h = 2 * kPi / G;

  // center boxes: halfwidth R aligned to whole base cells, shrunk to
  // keep distinct boxes disjoint
  int r_cells = std::max(1, G / 8);
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      const double sep = periodic_inf_dist(centers[i], centers[j]);
      while (r_cells > 1 && 2 * r_cells * h > sep - h / 2) --r_cells;
    }
  const double R = r_cells * h;

  // snap centers to grid corners (maximizers come quantized already)
  std::vector<QuasiMomentum> snapped;
  for (const auto& c : centers) {
    QuasiMomentum s(nu);
    for (int i = 0; i < nu; ++i) s[i] = std::round((c[i] + kPi) / h) * h - kPi;
    snapped.push_back(s);
  }

  // base grid over [-pi, pi]^nu, skipping cells inside any center box
  std::vector<int> idx(nu, 0);
  std::int64_t cells = 1;
  for (int i = 0; i < nu; ++i) cells *= G;
  QuasiMomentum p(nu);
  for (std::int64_t flat = 0; flat < cells; ++flat) {
    for (int i = 0; i < nu; ++i) p[i] = -kPi + (idx[i] + 0.5) * h;
    bool inside = false;
    for (const auto& c : snapped) inside = inside || periodic_inf_dist(p, c) < R - 1e-12;
    if (!inside) out.value += f(p) * std::pow(h, nu);
    for (int i = 0; i < nu; ++i) {
      if (++idx[i] < G) break;
      idx[i] = 0;
    }
  }

  // dyadic shell stacks around each center
  const int m = opt.shell_per_axis + (opt.shell_per_axis % 2);
  std::vector<int> sidx(nu, 0);
  std::int64_t shell_cells = 1;
  for (int i = 0; i < nu; ++i) shell_cells *= 2 * m;

  for (const auto& c : snapped) {
    double r = R;
    int shell = 0;
    double prev_sum = 0;
    while (shell < opt.max_shells && r > opt.min_shell_radius) {
      if (opt.delta > 0 && r < 0.25 * std::sqrt(opt.delta)) break;
      const double cw = r / m;  // cell width; inner half-box exactly tiled
      double sum = 0;
      std::fill(sidx.begin(), sidx.end(), 0);
      for (std::int64_t flat = 0; flat < shell_cells; ++flat) {
        bool outer = false;
        for (int i = 0; i < nu; ++i) {
          p[i] = -r + (sidx[i] + 0.5) * cw;
          outer = outer || std::abs(p[i]) > r / 2;
        }
        if (outer) {
          QuasiMomentum q = c + p;
          sum += f(q) * std::pow(cw, nu);
        }
        for (int i = 0; i < nu; ++i) {
          if (++sidx[i] < 2 * m) break;
          sidx[i] = 0;
        }
      }
      out.shell_sums.push_back(sum);
      prev_sum = sum;
      out.value += sum;
      r /= 2;
      ++shell;
    }
    // innermost box: saturated integrand (delta > 0) -> plain midpoint;
    // otherwise geometric extrapolation of the shell sums
    if (opt.delta > 0 || r <= opt.min_shell_radius) {
      double sum = 0;
      const double cw = 2 * r / (2 * m);
      std::fill(sidx.begin(), sidx.end(), 0);
      for (std::int64_t flat = 0; flat < shell_cells; ++flat) {
        for (int i = 0; i < nu; ++i) p[i] = -r + (sidx[i] + 0.5) * cw;
        QuasiMomentum q = c + p;
        sum += f(q) * std::pow(cw, nu);
        for (int i = 0; i < nu; ++i) {
          if (++sidx[i] < 2 * m) break;
          sidx[i] = 0;
        }
      }
      out.value += sum;
    } else if (out.shell_sums.size() >= 2) {
      const std::size_t n = out.shell_sums.size();
      const double q = out.shell_sums[n - 1] / std::max(out.shell_sums[n - 2], 1e-300);
      if (q < 0.95) {
        out.core_estimate = out.shell_sums[n - 1] * q / (1 - q);
        out.value += out.core_estimate;
        out.core_extrapolated = true;
      }
    }
    (void)prev_sum;
  }
  return out;
}

BecCriterion bec_criterion(const BlochBand& band) {
  BecCriterion out;
  if (band.maximizer_set_degenerate) {
    out.verdict = BecVerdict::degenerate_review;
    out.note = "maximizer set is not a finite point set at grid resolution";
    return out;
  }
  const int nu = band.lattice.nu();
  const double scale = std::pow(2 * kPi, nu);

  auto gap_integrand = [&](double delta) {
    return [&band, delta](const QuasiMomentum& p) {
      const double gap = band.E - band.top_at(p);
      return 1.0 / (std::max(gap, 0.0) + delta);
    };
  };

  BzIntegralOptions opt;
  opt.base_per_axis = std::min(band.grid_resolution, 16);
  opt.shell_per_axis = 8;

  // delta-refinement study
  for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
    opt.delta = delta;
    BzIntegral integral = bz_integrate(nu, gap_integrand(delta), band.maximizers, opt);
    out.delta_values.push_back(delta);
    out.integral_values.push_back(integral.value / scale);
  }

  // shell diagnostics at delta = 0
  opt.delta = 0;
  opt.max_shells = 24;
  BzIntegral at_zero = bz_integrate(nu, gap_integrand(0.0), band.maximizers, opt);
  const auto& shells = at_zero.shell_sums;
  const std::size_t per_center = shells.size() / std::max<std::size_t>(1, band.maximizers.size());
  double ratio = 0;
  int counted = 0;
  for (std::size_t c = 0; c < band.maximizers.size(); ++c) {
    // trailing ratios of this center's stack
    const std::size_t base = c * per_center;
    for (std::size_t s = per_center / 2; s + 1 < per_center; ++s) {
      if (shells[base + s] > 0) {
        ratio += shells[base + s + 1] / shells[base + s];
        ++counted;
      }
    }
  }
  if (counted > 0) ratio /= counted;
  out.shell_ratio = ratio;

  const auto& I = out.integral_values;
  const bool cauchy = std::abs(I[3] - I[2]) <= 0.01 * std::abs(I[3]);
  if (ratio < 0.9 && cauchy) {
    out.verdict = BecVerdict::bec_possible;
    out.integral = at_zero.value / scale;
    out.note = "band-gap integral stabilized; shell sums geometric";
    return out;
  }

  // divergence model: growth of I(delta) against log(1/delta) and
  // delta^{-1/2}
  const double dlog = (I[3] - I[2]) / std::log(10.0);
  const double prev_dlog = (I[2] - I[1]) / std::log(10.0);
  const double sqrt_ratio = I[3] / std::max(I[2], 1e-300);
  out.verdict = BecVerdict::no_bec;
  if (sqrt_ratio > 2.0) {
    out.divergence_model = "inverse-sqrt";  // ~ delta^{-1/2}, quadratic top in 1d
  } else if (dlog > 0 && std::abs(dlog - prev_dlog) < 0.25 * std::abs(dlog)) {
    out.divergence_model = "log";  // ~ log(1/delta), quadratic top in 2d
  } else {
    out.divergence_model = "power";
  }
  out.note = "band-gap integral diverges as delta -> 0";
  return out;
}

double critical_density_periodic(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                 double beta, int grid_resolution) {
  if (beta <= 0) throw std::invalid_argument("beta must be positive");
  BlochBand band = band_top(lat, v, grid_resolution);
  BecCriterion crit = bec_criterion(band);
  if (crit.verdict != BecVerdict::bec_possible)
    throw std::invalid_argument("occupation integral requires a convergent band-gap integral");

  const int nu = lat.nu();
  const int cell = lat.cell_size();
  auto occupation = [&](const QuasiMomentum& p) {
    Eigen::VectorXd spec = twisted_spectrum(band.lattice, band.v, p);
    double sum = 0;
    for (int k = 0; k < cell; ++k) {
      const double x = beta * std::max(band.E - spec[k], 0.0);
      if (x < 1e-14) continue;  // measure-zero band touching, handled by shells
      sum += 1.0 / std::expm1(x);
    }
    return sum / cell;
  };

  BzIntegralOptions opt;
  opt.base_per_axis = std::max(16, grid_resolution);
  opt.shell_per_axis = 24;
  opt.max_shells = 32;
  BzIntegral integral = bz_integrate(nu, occupation, band.maximizers, opt);
  return integral.value / std::pow(2 * kPi, nu);
}

DiamagneticCheck diamagnetic_check(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                   double beta, const QuasiMomentum& p,
                                   const Eigen::VectorXcd& f) {
  if (beta < 0) throw std::invalid_argument("beta must be nonnegative");
  Eigen::VectorXd pot = check_potential(lat, v);
  const QuasiMomentum zero = QuasiMomentum::Zero(lat.nu());
  const double E = twisted_spectrum(lat, pot, zero).maxCoeff();

  auto heat_form = [&](const QuasiMomentum& q, const Eigen::VectorXcd& g) {
    TwistedOperator t = twisted_matrix(lat, pot, q);
    Eigen::MatrixXcd hmat = -t.matrix;
    hmat.diagonal().array() += E;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hmat);
    Eigen::VectorXcd ghat = es.eigenvectors().adjoint() * g;
    double acc = 0;
    for (Eigen::Index k = 0; k < ghat.size(); ++k)
      acc += std::exp(-beta * es.eigenvalues()[k]) * std::norm(ghat[k]);
    return acc;
  };

  DiamagneticCheck out;
  out.lhs = heat_form(p, f);
  out.rhs = heat_form(zero, f.cwiseAbs().cast<std::complex<double>>());
  out.holds = out.lhs <= out.rhs + 1e-12 * std::max(1.0, std::abs(out.rhs));
  return out;
}

DegenerateGauge degenerate_gauge(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                 const QuasiMomentum& p0, int verify_grid, double tol) {
  DegenerateGauge out;
  Eigen::VectorXd pot = check_potential(lat, v);
  const int nu = lat.nu();
  const QuasiMomentum zero = QuasiMomentum::Zero(nu);
  const double E = twisted_spectrum(lat, pot, zero).maxCoeff();
  const double e_p0 = twisted_spectrum(lat, pot, p0).maxCoeff();
  if (std::abs(E - e_p0) > 1e-8 * std::max(1.0, std::abs(E))) {
    std::ostringstream msg;
    msg << "E(p0) = " << e_p0 << " is not within tolerance of E = " << E;
    out.message = msg.str();
    return out;
  }

  TwistedOperator t0 = twisted_matrix(lat, pot, p0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t0.matrix);
  Eigen::VectorXcd top = es.eigenvectors().col(lat.cell_size() - 1);
  // global phase: make the first component real positive, so p0 = 0
  // yields the identity
  std::complex<double> anchor = top[0] / std::abs(top[0]);
  top /= anchor;

  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(lat.cell_size(), lat.cell_size());
  for (int a = 0; a < lat.cell_size(); ++a) {
    const double mag = std::abs(top[a]);
    if (mag < 1e-10) {
      std::ostringstream msg;
      msg << "top eigenvector vanishes at cell vertex " << a
          << "; inconsistent degeneracy (Perron positivity fails)";
      out.message = msg.str();
      return out;
    }
    const std::complex<double> phase = top[a] / mag;
    W(a, a) = std::conj(phase);
  }

  // verify W A~(p) W* = A~(p - p0) on the grid
  double worst = 0;
  std::vector<int> idx(nu, 0);
  std::int64_t points = 1;
  for (int i = 0; i < nu; ++i) points *= verify_grid;
  QuasiMomentum p(nu);
  for (std::int64_t flat = 0; flat < points; ++flat) {
    for (int i = 0; i < nu; ++i) p[i] = -kPi + idx[i] * (2 * kPi / verify_grid);
    Eigen::MatrixXcd lhs =
        W * twisted_matrix(lat, Eigen::VectorXd::Zero(lat.cell_size()), p).matrix * W.adjoint();
    QuasiMomentum shifted = p - p0;
    Eigen::MatrixXcd rhs =
        twisted_matrix(lat, Eigen::VectorXd::Zero(lat.cell_size()), shifted).matrix;
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    for (int i = 0; i < nu; ++i) {
      if (++idx[i] < verify_grid) break;
      idx[i] = 0;
    }
  }
  out.residual = worst;
  if (worst > tol) {
    std::ostringstream msg;
    msg << "conjugation identity fails: residual " << worst << " > " << tol;
    out.message = msg.str();
    return out;
  }
  out.W = W;
  out.message = "ok";
  return out;
}

PeriodicGroundState periodic_ground_state(const PeriodicLattice& lat, const Eigen::VectorXd& v) {
  if (!lat.quotient_connected())
    throw std::invalid_argument("ground state needs a connected fundamental domain");
  Eigen::VectorXd pot = check_potential(lat, v);
  TwistedOperator t0 = twisted_matrix(lat, pot, QuasiMomentum::Zero(lat.nu()));
  Eigen::MatrixXd real0 = t0.matrix.real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(real0);
  const int n = lat.cell_size();
  Eigen::VectorXd omega = es.eigenvectors().col(n - 1);
  if (omega.sum() < 0) omega = -omega;
  if (omega.minCoeff() <= 0)
    throw std::runtime_error("periodic ground state has a nonpositive entry");
  omega /= omega.norm();  // cell normalization: sum of squares over V0 is 1
  PeriodicGroundState gs;
  gs.M = omega.maxCoeff() / omega.minCoeff();
  gs.residual = (real0 * omega - es.eigenvalues()[n - 1] * omega).cwiseAbs().maxCoeff();
  gs.omega = std::move(omega);
  return gs;
}

std::complex<double> chi_tilde(const PeriodicGroundState& gs,
                               const std::vector<std::pair<LatticeVertex, std::complex<double>>>& f) {
  std::complex<double> acc = 0;
  for (const auto& [vertex, value] : f) acc += gs.omega[vertex.local] * value;
  return acc;
}

std::complex<double> chi_tilde_finite(const PeriodicLattice& lat, const Eigen::VectorXd& v, int l,
                                      const std::vector<std::pair<LatticeVertex, std::complex<double>>>& f) {
  Eigen::VectorXd pot = check_potential(lat, v);
  LatticeTruncation trunc = truncate(lat, l, BoundaryCondition::periodic);
  const Graph& g = trunc.graph;
  Eigen::MatrixXd av = Eigen::MatrixXd::Zero(g.vertex_count(), g.vertex_count());
  for (const auto& [i, j] : g.edges()) {
    av(i, j) = 1;
    av(j, i) = 1;
  }
  for (int i = 0; i < g.vertex_count(); ++i) av(i, i) -= pot[trunc.vertex_ids[i].local];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(av);
  Eigen::VectorXd omega_l = es.eigenvectors().col(g.vertex_count() - 1);
  if (omega_l.sum() < 0) omega_l = -omega_l;

  const int L = trunc.cells_per_axis;
  std::int64_t cells = 1;
  for (int i = 0; i < lat.nu(); ++i) cells *= L;

  auto wrap_index = [&](const LatticeVertex& vert) {
    std::int64_t idx = 0;
    for (int i = lat.nu() - 1; i >= 0; --i) {
      int c = ((vert.cell[i] % L) + L + l) % L;  // shift by +l maps [-l, l] -> [0, L)
      idx = idx * L + c;
    }
    return static_cast<int>(idx * lat.cell_size() + vert.local);
  };

  std::complex<double> acc = 0;
  for (const auto& [vertex, value] : f) acc += omega_l[wrap_index(vertex)] * value;
  return std::sqrt(static_cast<double>(cells)) * acc;
}

GroundStateComparison ground_state_compare(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                           int grid_resolution) {
  Eigen::VectorXd pot = check_potential(lat, v);
  Eigen::VectorXd dpot = degree_potential(lat);
  PeriodicGroundState gs = periodic_ground_state(lat, pot);

  GroundStateComparison out;
  out.M = gs.M;

  const int nu = lat.nu();
  int G = std::max(8, grid_resolution);
  G += G % 2;
  const double h = 2 * kPi / G;
  const QuasiMomentum zero = QuasiMomentum::Zero(nu);
  const double Ev0 = twisted_spectrum(lat, pot, zero).maxCoeff();
  const double Ed0 = twisted_spectrum(lat, dpot, zero).maxCoeff();

  out.sandwich_holds = true;
  std::vector<int> idx(nu, 0);
  std::int64_t points = 1;
  for (int i = 0; i < nu; ++i) points *= G;
  QuasiMomentum p(nu);
  double worst = 0;
  for (std::int64_t flat = 0; flat < points; ++flat) {
    for (int i = 0; i < nu; ++i) p[i] = -kPi + idx[i] * h;
    const double gv = Ev0 - twisted_spectrum(lat, pot, p).maxCoeff();
    const double gd = Ed0 - twisted_spectrum(lat, dpot, p).maxCoeff();
    const double lo = gd / out.M;
    const double hi = gd * out.M;
    const double slack = 1e-10 * std::max(1.0, gd);
    if (gv < lo - slack || gv > hi + slack) {
      out.sandwich_holds = false;
      worst = std::max({worst, lo - gv, gv - hi});
    }
    for (int i = 0; i < nu; ++i) {
      if (++idx[i] < G) break;
      idx[i] = 0;
    }
  }
  out.worst_violation = worst;

  // Rayleigh route: the gap E(0) - E(p) equals the smallest eigenvalue
  // of the Omega-weighted twisted form against the Omega^2 weight.
  QuasiMomentum sample = QuasiMomentum::Constant(nu, h);
  TwistedOperator t = twisted_matrix(lat, pot, sample);
  Eigen::MatrixXcd hmat = -t.matrix;
  hmat.diagonal().array() += Ev0;
  Eigen::MatrixXcd d_omega = gs.omega.cast<std::complex<double>>().asDiagonal();
  Eigen::MatrixXcd weighted = d_omega * hmat * d_omega;
  Eigen::MatrixXcd weight = (gs.omega.array().square().matrix()).cast<std::complex<double>>().asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(weighted, weight);
  const double rayleigh = ges.eigenvalues()[0];
  const double direct = Ev0 - twisted_spectrum(lat, pot, sample).maxCoeff();
  out.rayleigh_residual = std::abs(rayleigh - direct);
  return out;
}

Eigen::VectorXd periodic_stage_spectrum(const PeriodicLattice& lat, const Eigen::VectorXd& v,
                                        int l) {
  if (l < 1) throw std::invalid_argument("stage index must be >= 1");
  Eigen::VectorXd pot = check_potential(lat, v);
  const int nu = lat.nu();
  const int L = 2 * l + 1;
  std::int64_t cells = 1;
  for (int i = 0; i < nu; ++i) cells *= L;
  Eigen::VectorXd all(cells * lat.cell_size());

  std::vector<int> idx(nu, 0);
  QuasiMomentum p(nu);
  Eigen::Index pos = 0;
  for (std::int64_t flat = 0; flat < cells; ++flat) {
    for (int i = 0; i < nu; ++i) p[i] = 2 * kPi * idx[i] / L;
    Eigen::VectorXd spec = twisted_spectrum(lat, pot, p);
    all.segment(pos, spec.size()) = spec;
    pos += spec.size();
    for (int i = 0; i < nu; ++i) {
      if (++idx[i] < L) break;
      idx[i] = 0;
    }
  }
  const double top = all.maxCoeff();
  Eigen::VectorXd h = (top - all.array()).matrix();
  std::sort(h.data(), h.data() + h.size());
  return h;
}

std::vector<std::pair<QuasiMomentum, Eigen::VectorXd>> band_grid(const PeriodicLattice& lat,
                                                                 const Eigen::VectorXd& v,
                                                                 int grid_resolution) {
  Eigen::VectorXd pot = check_potential(lat, v);
  int G = std::max(8, grid_resolution);
  G += G % 2;
  const int nu = lat.nu();
  const double h = 2 * kPi / G;
  std::vector<std::pair<QuasiMomentum, Eigen::VectorXd>> out;
  std::vector<int> idx(nu, 0);
  std::int64_t points = 1;
  for (int i = 0; i < nu; ++i) points *= G;
  QuasiMomentum p(nu);
  for (std::int64_t flat = 0; flat < points; ++flat) {
    for (int i = 0; i < nu; ++i) p[i] = -kPi + idx[i] * h;
    out.emplace_back(p, twisted_spectrum(lat, pot, p));
    for (int i = 0; i < nu; ++i) {
      if (++idx[i] < G) break;
      idx[i] = 0;
    }
  }
  return out;
}

}  // namespace graphbec
