// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphbec/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace graphbec {

namespace {

// ---------------------------------------------------------------------
// PRNG: splitmix64 seeding a xoshiro256** stream per walk index, so that
// every walk is an independent reproducible stream.
// ---------------------------------------------------------------------
std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Xoshiro256 {
  std::uint64_t s[4];
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s) w = splitmix64(x);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
  // unbiased integer in [0, n)
  std::uint32_t below(std::uint32_t n) {
    std::uint64_t threshold = (~std::uint64_t{0} - n + 1) % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return static_cast<std::uint32_t>(r % n);
    }
  }
};

// ---------------------------------------------------------------------
// Stage-based exact evolution of the substochastic operator d^{-1} A.
// ---------------------------------------------------------------------
struct StageWalk {
  const StageGraph stage;
  int origin;
  bool exact;

  StageWalk(StageGraph s, int origin_vertex, bool is_exact)
      : stage(std::move(s)), origin(origin_vertex), exact(is_exact) {}

  // applies u' = d^{-1} A u with the infinite-graph degrees
  void step(std::vector<double>& u, std::vector<double>& scratch) const {
    const Graph& g = stage.graph;
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (int v = 0; v < g.vertex_count(); ++v) {
      double acc = 0;
      for (const int* it = g.neighbors_begin(v); it != g.neighbors_end(v); ++it) acc += u[*it];
      scratch[v] = acc / stage.full_degree[v];
    }
    u.swap(scratch);
  }
};

int find_stage_vertex(const StageGraph& s, const Exhaustion& exh, const LatticeVertex& site) {
  if (exh.has_lattice_base()) {
    for (int v = 0; v < s.graph.vertex_count(); ++v)
      if (s.vertex_ids[v] == site) return v;
    throw std::invalid_argument("site not contained in walk stage");
  }
  if (site.local < 0 || site.local >= s.graph.vertex_count())
    throw std::invalid_argument("site out of range");
  return site.local;
}

// Builds a stage able to carry n_max exact steps from `site`. For
// lattice bases: a free block when it fits the budget, otherwise (no
// defects) a periodic block large enough that wrap-around contributes
// less than opt.torus_wrap_tolerance.
StageWalk make_walk_stage(const Exhaustion& exh, const LatticeVertex& site, int n_max,
                          const WalkOptions& opt) {
  if (!exh.has_lattice_base()) {
    int radius = std::min(exh.max_stage(), n_max + 2);
    StageGraph s = exh.stage(radius);
    int origin = find_stage_vertex(s, exh, site);
    return StageWalk(std::move(s), origin, true);
  }
  const PeriodicLattice& lat = exh.lattice();
  const int K = std::max(1, lat.max_offset());
  int site_norm = 0;
  for (int i = 0; i < lat.nu(); ++i) site_norm = std::max(site_norm, std::abs(site.cell[i]));

  const std::int64_t budget = opt.vertex_budget;
  const int n_free = n_max * K + site_norm + 2;
  if (exh.stage_vertex_count(n_free) <= budget) {
    StageGraph s = exh.stage(n_free);
    int origin = find_stage_vertex(s, exh, site);
    return StageWalk(std::move(s), origin, true);
  }

  if (exh.defects().empty()) {
    // periodic block: wrap needs axis displacement >= L = 2n+1;
    // Hoeffding over n_max steps of size <= K per axis
    const double log_bound = std::log(4.0 * lat.nu() / opt.torus_wrap_tolerance);
    const double L_needed = K * std::sqrt(2.0 * n_max * log_bound);
    int n = static_cast<int>(std::ceil((L_needed - 1.0) / 2.0)) + 1;
    n = std::max(n, min_periodic_truncation(exh.lattice()));
    std::int64_t cells = 1;
    for (int i = 0; i < lat.nu(); ++i) cells *= (2 * n + 1);
    if (cells * lat.cell_size() <= budget) {
      LatticeTruncation trunc = truncate(lat, n, BoundaryCondition::periodic);
      StageGraph s;
      s.index = n;
      s.vertex_ids = std::move(trunc.vertex_ids);
      s.origin = trunc.origin;
      s.full_degree.resize(trunc.graph.vertex_count());
      for (int v = 0; v < trunc.graph.vertex_count(); ++v)
        s.full_degree[v] = trunc.graph.degree(v);
      s.graph = std::move(trunc.graph);
      int origin = find_stage_vertex(s, exh, site);
      return StageWalk(std::move(s), origin, false);
    }
  }

  std::ostringstream msg;
  msg << "stage too small for requested n_max=" << n_max << ": needs "
      << exh.stage_vertex_count(n_free) << " vertices, budget " << budget;
  throw std::invalid_argument(msg.str());
}

// p_N from q_N by inverting the renewal recursion
// q_N = sum_{m=2}^{N} p_m q_{N-m}  (N >= 2, q_0 = 1).
std::vector<double> first_return_from_q(const std::vector<double>& q) {
  const int n_max = static_cast<int>(q.size()) - 1;
  std::vector<double> p(q.size(), 0.0);
  for (int N = 2; N <= n_max; ++N) {
    double conv = 0;
    for (int m = 2; m <= N - 2; ++m) conv += p[m] * q[N - m];
    p[N] = q[N] - conv;
    if (p[N] < 0 && p[N] > -1e-12) p[N] = 0;
  }
  return p;
}

double renewal_residual(const std::vector<double>& q, const std::vector<double>& p) {
  const int n_max = static_cast<int>(q.size()) - 1;
  double worst = 0;
  for (int N = 2; N <= n_max; ++N) {
    double conv = 0;
    for (int m = 2; m <= N; ++m) conv += p[m] * q[N - m];
    worst = std::max(worst, std::abs(q[N] - conv));
  }
  return worst;
}

int lattice_degree_at(const Exhaustion& exh, const LatticeVertex& site) {
  if (!exh.has_lattice_base()) return 0;
  int d = 0;
  for (const auto& nb : exh.lattice().neighbors(site))
    if (exh.defects().empty() || !exh.defects().removed(site, nb)) ++d;
  return d;
}

}  // namespace

double WalkStats::q_sum() const {
  double s = 0;
  for (std::size_t n = 2; n < q.size(); ++n) s += q[n];
  return s;
}

double WalkStats::p_sum() const {
  double s = 0;
  for (std::size_t n = 2; n < p.size(); ++n) s += p[n];
  return s;
}

std::vector<double> zd_return_probs(int nu, int n_max) {
  if (nu < 1) throw std::invalid_argument("dimension must be >= 1");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  // central binomial probabilities b_m = C(2m, m) 4^{-m}
  std::vector<double> central(n_max / 2 + 1);
  central[0] = 1.0;
  for (int m = 1; m <= n_max / 2; ++m)
    central[m] = central[m - 1] * (2.0 * m - 1.0) / (2.0 * m);

  // q^{(1)}_n
  std::vector<double> q(n_max + 1, 0.0);
  for (int m = 0; 2 * m <= n_max; ++m) q[2 * m] = central[m];

  std::vector<double> pmf(n_max + 1);
  std::vector<double> next(n_max + 1, 0.0);
  for (int k = 2; k <= nu; ++k) {
    const double prob = 1.0 / k;  // a given step lands on the newest axis
    std::fill(next.begin(), next.end(), 0.0);
    next[0] = 1.0;
    for (int n = 2; n <= n_max; n += 2) {
      // binomial pmf over j successes out of n at rate prob, computed
      // outward from the mode to dodge underflow at the edges
      const int mode = std::min(n, static_cast<int>((n + 1) * prob));
      double logpmf = std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) -
                      std::lgamma(n - mode + 1.0) + mode * std::log(prob) +
                      (n - mode) * std::log1p(-prob);
      pmf[mode] = std::exp(logpmf);
      for (int j = mode; j < n; ++j)
        pmf[j + 1] = pmf[j] * (static_cast<double>(n - j) / (j + 1)) * (prob / (1 - prob));
      for (int j = mode; j > 0; --j)
        pmf[j - 1] = pmf[j] * (static_cast<double>(j) / (n - j + 1)) * ((1 - prob) / prob);
      double acc = 0;
      for (int j = 0; j <= n; j += 2) acc += pmf[j] * central[j / 2] * q[n - j];
      next[n] = acc;
    }
    q.swap(next);
  }
  return q;
}

WalkStats return_probs(const Exhaustion& exh, int n_max, const WalkOptions& opt) {
  LatticeVertex origin{};
  if (!exh.has_lattice_base()) origin.local = 0;
  return return_probs(exh, origin, n_max, opt);
}

WalkStats return_probs(const Exhaustion& exh, const LatticeVertex& site, int n_max,
                       const WalkOptions& opt) {
  if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");
  WalkStats out;
  out.site = site;

  if (exh.has_lattice_base() && exh.defects().empty() &&
      exh.lattice().is_simple_hypercubic()) {
    out.q = zd_return_probs(exh.lattice().nu(), n_max);
    out.degree = 2 * exh.lattice().nu();
    out.exact = true;
  } else {
    StageWalk sw = make_walk_stage(exh, site, n_max, opt);
    const int nv = sw.stage.graph.vertex_count();
    std::vector<double> u(nv, 0.0), scratch(nv, 0.0);
    u[sw.origin] = 1.0;
    out.q.assign(n_max + 1, 0.0);
    out.q[0] = 1.0;
    for (int N = 1; N <= n_max; ++N) {
      sw.step(u, scratch);
      out.q[N] = u[sw.origin];
    }
    out.degree = sw.stage.full_degree[sw.origin];
    out.exact = sw.exact;
  }
  out.p = first_return_from_q(out.q);
  out.renewal_residual = renewal_residual(out.q, out.p);
  if (out.degree == 0 && exh.has_lattice_base()) out.degree = lattice_degree_at(exh, site);
  return out;
}

TailFit fit_return_tail(const std::vector<double>& q) {
  TailFit fit;
  const int n_max = static_cast<int>(q.size()) - 1;
  if (n_max < 16) return fit;
  fit.window_begin = std::max(8, n_max / 8);

  bool odd_mass = false;
  for (int N = fit.window_begin | 1; N <= n_max; N += 2) odd_mass = odd_mass || q[N] > 1e-300;
  fit.parity_step = odd_mass ? 1 : 2;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int N = fit.window_begin + (fit.window_begin % fit.parity_step); N <= n_max;
       N += fit.parity_step) {
    if (q[N] <= 0) continue;
    const double x = std::log(static_cast<double>(N));
    const double y = std::log(q[N]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  fit.samples = m;
  if (m < 4) return fit;
  const double denom = m * sxx - sx * sx;
  fit.exponent = (m * sxy - sx * sy) / denom;
  fit.amplitude = std::exp((sy - fit.exponent * sx) / m);
  if (fit.exponent < -1.0) {
    // sum_{N > n_max, step s} c N^alpha ~ c n_max^{alpha+1} / (s (-1-alpha))
    fit.tail = fit.amplitude * std::pow(static_cast<double>(n_max), fit.exponent + 1.0) /
               (fit.parity_step * (-1.0 - fit.exponent));
    fit.convergent = true;
  }
  return fit;
}

GreenDiagonal green_diagonal(const Exhaustion& exh, const LatticeVertex& site, double z,
                             int n_max, const WalkOptions& opt) {
  if (z <= 0 || z > 1) throw std::invalid_argument("z must lie in (0, 1]");
  WalkStats ws = return_probs(exh, site, n_max, opt);
  GreenDiagonal out;
  double zn = 1.0;
  double acc = 0.0;
  for (int N = 0; N <= n_max; ++N) {
    acc += zn * ws.q[N];
    zn *= z;
  }
  out.partial = acc / ws.degree;
  if (z < 1.0) {
    out.value = out.partial;  // geometric truncation error <= z^{n+1}/(1-z)/d
    return out;
  }
  TailFit fit = fit_return_tail(ws.q);
  out.growth_exponent = fit.exponent;
  if (fit.convergent) {
    out.tail_estimate = fit.tail / ws.degree;
    out.value = out.partial + out.tail_estimate;
  } else {
    out.diverged = true;
  }
  return out;
}

namespace {

std::vector<LatticeVertex> default_sample(const Exhaustion& exh) {
  std::vector<LatticeVertex> sites;
  if (!exh.has_lattice_base()) {
    sites.push_back(LatticeVertex{0, zero_offset()});
    return sites;
  }
  const auto& lat = exh.lattice();
  for (int a = 0; a < lat.cell_size(); ++a) sites.push_back(LatticeVertex{a, zero_offset()});
  if (!exh.defects().empty()) {
    // defected graphs are inhomogeneous: add sites displaced from the
    // origin along each axis
    for (int i = 0; i < lat.nu() && sites.size() < 8; ++i) {
      LatticeVertex v{0, zero_offset()};
      v.cell[i] = 5;
      sites.push_back(v);
    }
  }
  if (sites.size() > 8) sites.resize(8);
  return sites;
}

}  // namespace

Classification classify(const Exhaustion& exh, std::vector<LatticeVertex> sample_sites,
                        const ClassifyOptions& opt) {
  if (sample_sites.empty()) sample_sites = default_sample(exh);
  Classification out;
  const int horizon = opt.recurrence_horizon_M > 0 ? opt.recurrence_horizon_M : opt.n_max;

  // lower n_max to fit the stage budget instead of failing outright
  int n_max = opt.n_max;
  for (;;) {
    try {
      return_probs(exh, sample_sites.front(), n_max, opt.walk);
      break;
    } catch (const std::invalid_argument&) {
      if (n_max <= 64) throw;
      n_max /= 2;
    }
  }
  out.n_max_used = n_max;

  int transient_votes = 0, recurrent_votes = 0;
  for (const auto& site : sample_sites) {
    WalkStats ws = return_probs(exh, site, n_max, opt.walk);
    TailFit fit = fit_return_tail(ws.q);
    VertexEvidence ev;
    ev.site = site;
    ev.alpha = fit.exponent;
    ev.q_partial_sum = ws.q_sum();
    ev.tail = fit.tail;
    ev.green_tail = ws.degree > 0 ? fit.tail / ws.degree : fit.tail;
    ev.p_bar = ws.p_sum();
    if (fit.convergent) {
      // p and q tails are comparable; bound the unseen first-return mass
      // by the q tail
      ev.epsilon = std::max(0.0, 1.0 - ev.p_bar - fit.tail);
    }
    double partial_to_horizon = 0;
    for (int N = 2; N <= std::min(horizon, n_max); ++N) partial_to_horizon += ws.q[N];
    out.recurrence_K_reached = std::max(out.recurrence_K_reached, partial_to_horizon);

    if (fit.samples >= 4 && fit.exponent < opt.alpha_transient &&
        ev.green_tail < opt.green_tail_threshold) {
      ev.verdict = WalkVerdict::transient;
      ++transient_votes;
    } else if (fit.samples >= 4 && fit.exponent >= opt.alpha_recurrent) {
      ev.verdict = WalkVerdict::recurrent;
      ++recurrent_votes;
    }
    out.evidence.push_back(ev);
  }

  const int n_sites = static_cast<int>(sample_sites.size());
  if (transient_votes == n_sites)
    out.verdict = WalkVerdict::transient;
  else if (recurrent_votes == n_sites)
    out.verdict = WalkVerdict::recurrent;
  else
    out.verdict = WalkVerdict::inconclusive;

  const bool homogeneous =
      exh.has_lattice_base() &&
      (exh.defects().empty() || exh.defects().kind() == DefectRule::Kind::finite_list);
  if (out.verdict == WalkVerdict::transient && homogeneous)
    out.uniform = Uniformity::uniformly_transient;
  else if (out.verdict == WalkVerdict::recurrent && homogeneous)
    out.uniform = Uniformity::uniformly_recurrent;
  else
    out.uniform = Uniformity::not_established;

  if (homogeneous && exh.defects().empty())
    out.note = "periodic lattice: uniformity follows from periodicity";
  else if (!homogeneous)
    out.note = "uniformity sampled only; not established for rule-based defects";
  return out;
}

FirstPassageBound first_passage_bound(const Exhaustion& exh, const LatticeVertex& site_i,
                                      const LatticeVertex& site_j, int n_max,
                                      const WalkOptions& opt) {
  if (site_i == site_j) throw std::invalid_argument("first passage needs distinct vertices");
  ClassifyOptions copt;
  copt.n_max = std::min(n_max, copt.n_max);
  copt.walk = opt;
  Classification cls = classify(exh, {site_j}, copt);
  if (cls.verdict == WalkVerdict::recurrent)
    throw std::invalid_argument("first-passage bound inapplicable: walk is recurrent");

  StageWalk sw = make_walk_stage(exh, site_i, n_max, opt);
  const int vi = find_stage_vertex(sw.stage, exh, site_i);
  const int vj = find_stage_vertex(sw.stage, exh, site_j);
  const int nv = sw.stage.graph.vertex_count();
  const int dj = sw.stage.full_degree[vj];

  // r_N(i -> j): evolve delta_j; entry i after N steps is the arrival
  // probability from i (walk weights accumulate along the path tail).
  std::vector<double> u(nv, 0.0), scratch(nv, 0.0);
  u[vj] = 1.0;
  std::vector<double> r(n_max + 1, 0.0);
  for (int N = 1; N <= n_max; ++N) {
    sw.step(u, scratch);
    r[N] = u[vi];
  }

  // first arrivals r0: evolve delta_i with absorption at j
  std::fill(u.begin(), u.end(), 0.0);
  u[vi] = 1.0;
  std::vector<double> r0(n_max + 1, 0.0);
  for (int N = 1; N <= n_max; ++N) {
    sw.step(u, scratch);
    r0[N] = u[vj];
    u[vj] = 0.0;
  }

  WalkStats wj = return_probs(exh, site_j, n_max, opt);

  FirstPassageBound out;
  for (int N = 1; N <= n_max; ++N) {
    out.r_bar += r[N];
    out.r0_bar += r0[N];
    out.green_offdiag += r[N] / dj;
  }
  TailFit fit = fit_return_tail(wj.q);
  out.epsilon = std::max(1e-12, 1.0 - wj.p_sum() - (fit.convergent ? fit.tail : 0.0));
  out.bound = out.r0_bar / (out.epsilon * dj);
  out.holds = out.green_offdiag <= out.bound + 1e-12;

  // renewal consistency r_N = r0_N + sum_k r_k p_j(N-k)
  double worst = 0;
  for (int N = 1; N <= n_max; ++N) {
    double conv = 0;
    for (int k = 1; k <= N - 2; ++k) conv += r[k] * wj.p[N - k];
    worst = std::max(worst, std::abs(r[N] - (r0[N] + conv)));
  }
  out.renewal_residual = worst;
  return out;
}

MonteCarloWalk monte_carlo_walk(const Exhaustion& exh, const LatticeVertex& site, int n_max,
                                std::int64_t n_walks, std::uint64_t seed) {
  if (n_walks < 1) throw std::invalid_argument("need at least one walk");
  MonteCarloWalk out;
  out.seed = seed;
  out.n_walks = n_walks;
  std::vector<std::int64_t> at(n_max + 1, 0), first(n_max + 1, 0);

  if (exh.has_lattice_base()) {
    const auto& lat = exh.lattice();
    const auto& defects = exh.defects();
    for (std::int64_t w = 0; w < n_walks; ++w) {
      std::uint64_t stream = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(w + 1));
      Xoshiro256 rng(stream);
      LatticeVertex v = site;
      bool returned = false;
      for (int N = 1; N <= n_max; ++N) {
        auto nbrs = lat.neighbors(v);
        if (!defects.empty())
          std::erase_if(nbrs, [&](const LatticeVertex& u) { return defects.removed(v, u); });
        v = nbrs[rng.below(static_cast<std::uint32_t>(nbrs.size()))];
        if (v == site) {
          ++at[N];
          if (!returned) {
            ++first[N];
            returned = true;
          }
        }
      }
    }
  } else {
    StageGraph s = exh.stage(std::min(exh.max_stage(), n_max + 2));
    const Graph& g = s.graph;
    const int start = site.local;
    for (std::int64_t w = 0; w < n_walks; ++w) {
      std::uint64_t stream = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(w + 1));
      Xoshiro256 rng(stream);
      int v = start;
      bool returned = false;
      for (int N = 1; N <= n_max; ++N) {
        const int deg = g.degree(v);
        v = g.neighbors_begin(v)[rng.below(static_cast<std::uint32_t>(deg))];
        if (v == start) {
          ++at[N];
          if (!returned) {
            ++first[N];
            returned = true;
          }
        }
      }
    }
  }

  out.q_hat.resize(n_max + 1, 0.0);
  out.q_stderr.resize(n_max + 1, 0.0);
  out.p_hat.resize(n_max + 1, 0.0);
  out.p_stderr.resize(n_max + 1, 0.0);
  out.q_hat[0] = 1.0;
  const double nw = static_cast<double>(n_walks);
  for (int N = 1; N <= n_max; ++N) {
    const double q = at[N] / nw;
    const double p = first[N] / nw;
    out.q_hat[N] = q;
    out.p_hat[N] = p;
    out.q_stderr[N] = std::sqrt(std::max(q * (1 - q), 1.0 / nw) / nw);
    out.p_stderr[N] = std::sqrt(std::max(p * (1 - p), 1.0 / nw) / nw);
  }
  return out;
}

}  // namespace graphbec
