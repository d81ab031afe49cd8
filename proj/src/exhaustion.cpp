// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphbec/exhaustion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace graphbec {

Exhaustion Exhaustion::from_lattice(PeriodicLattice lattice, DefectRule defects) {
  Exhaustion e;
  e.lattice_ = std::move(lattice);
  e.defects_ = std::move(defects);
  return e;
}

Exhaustion Exhaustion::from_graph(Graph host, int origin) {
  if (host.vertex_count() == 0) throw std::invalid_argument("empty host graph");
  if (origin < 0 || origin >= host.vertex_count())
    throw std::invalid_argument("origin out of range");
  if (!host.is_connected()) throw std::invalid_argument("host graph must be connected");
  Exhaustion e;
  e.host_ = std::move(host);
  e.host_origin_ = origin;
  return e;
}

const PeriodicLattice& Exhaustion::lattice() const {
  if (!lattice_) throw std::logic_error("exhaustion has no lattice base");
  return *lattice_;
}

int Exhaustion::degree_bound() const {
  if (lattice_) return lattice_->degree_bound();
  return host_->max_degree();
}

std::int64_t Exhaustion::stage_vertex_count(int n) const {
  if (lattice_) {
    std::int64_t cells = 1;
    for (int i = 0; i < lattice_->nu(); ++i) cells *= (2 * n + 1);
    return cells * lattice_->cell_size();
  }
  auto dist = host_->distances_from(host_origin_);
  std::int64_t c = 0;
  for (int d : dist) c += (d >= 0 && d <= n);
  return c;
}

int Exhaustion::max_stage() const {
  if (lattice_) return 1 << 20;
  auto dist = host_->distances_from(host_origin_);
  return *std::max_element(dist.begin(), dist.end());
}

StageGraph Exhaustion::stage(int n) const {
  if (n < 1) throw std::invalid_argument("stage index must be >= 1");
  StageGraph s;
  s.index = n;

  if (lattice_) {
    const auto& lat = *lattice_;
    LatticeTruncation trunc = truncate(lat, n, BoundaryCondition::free);
    s.vertex_ids = std::move(trunc.vertex_ids);
    s.origin = trunc.origin;

    const int nv = trunc.graph.vertex_count();
    std::vector<std::pair<int, int>> edges;
    edges.reserve(trunc.graph.edges().size());
    if (defects_.empty()) {
      edges = trunc.graph.edges();
    } else {
      for (const auto& [a, b] : trunc.graph.edges())
        if (!defects_.removed(s.vertex_ids[a], s.vertex_ids[b])) edges.emplace_back(a, b);
    }
    s.graph = Graph(nv, std::move(edges));

    s.full_degree.resize(nv);
    std::vector<bool> is_boundary(nv, false);
    for (int v = 0; v < nv; ++v) {
      int full = 0;
      for (const auto& nb : lat.neighbors(s.vertex_ids[v])) {
        if (!defects_.empty() && defects_.removed(s.vertex_ids[v], nb)) continue;
        ++full;
        bool inside = true;
        for (int i = 0; i < lat.nu(); ++i)
          inside = inside && std::abs(nb.cell[i]) <= n;
        if (!inside) is_boundary[v] = true;
      }
      s.full_degree[v] = full;
    }
    for (int v = 0; v < nv; ++v)
      if (is_boundary[v]) s.boundary.push_back(v);
    return s;
  }

  // Host-graph base: metric ball of radius n around the origin.
  auto dist = host_->distances_from(host_origin_);
  std::vector<int> to_stage(host_->vertex_count(), -1);
  std::vector<int> members;
  for (int v = 0; v < host_->vertex_count(); ++v)
    if (dist[v] >= 0 && dist[v] <= n) {
      to_stage[v] = static_cast<int>(members.size());
      members.push_back(v);
    }
  std::vector<std::pair<int, int>> edges;
  for (const auto& [a, b] : host_->edges())
    if (to_stage[a] >= 0 && to_stage[b] >= 0)
      edges.emplace_back(to_stage[a], to_stage[b]);
  s.graph = Graph(static_cast<int>(members.size()), std::move(edges));
  s.origin = to_stage[host_origin_];
  s.full_degree.resize(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    int v = members[i];
    s.full_degree[i] = host_->degree(v);
    for (const int* it = host_->neighbors_begin(v); it != host_->neighbors_end(v); ++it)
      if (to_stage[*it] < 0) {
        s.boundary.push_back(static_cast<int>(i));
        break;
      }
  }
  return s;
}

double Exhaustion::boundary_volume_ratio(int n) const {
  StageGraph s = stage(n);
  return static_cast<double>(s.boundary.size()) / s.graph.vertex_count();
}

double Exhaustion::defect_density(int n) const {
  if (!lattice_ || defects_.empty()) return 0.0;
  return static_cast<double>(defects_.count_in_box(*lattice_, n)) /
         static_cast<double>(stage_vertex_count(n));
}

std::pair<std::vector<int>, std::vector<int>> Exhaustion::boundary_sets(const StageGraph& s,
                                                                        int m) const {
  if (m < 0) throw std::invalid_argument("augmentation distance must be >= 0");
  std::vector<int> augmented;
  if (s.boundary.empty()) return {s.boundary, augmented};
  auto dist = s.graph.distances_from_set(s.boundary);
  for (int v = 0; v < s.graph.vertex_count(); ++v)
    if (dist[v] >= 0 && dist[v] <= m) augmented.push_back(v);
  return {s.boundary, augmented};
}

ExhaustionCheck check_vanishing_boundary(const Exhaustion& exh, const std::vector<int>& stages,
                                         double threshold) {
  ExhaustionCheck out;
  if (stages.size() < 2) {
    out.message = "need at least two stages";
    return out;
  }
  for (int n : stages) out.ratios.push_back(exh.boundary_volume_ratio(n));
  bool decreasing = true;
  for (std::size_t i = 1; i < out.ratios.size(); ++i)
    decreasing = decreasing && out.ratios[i] < out.ratios[i - 1] + 1e-15;
  const double last = out.ratios.back();
  out.accepted = decreasing && last < threshold;
  std::ostringstream msg;
  msg << "boundary/volume " << (decreasing ? "decreasing" : "not decreasing") << ", final ratio "
      << last << (last < threshold ? " < " : " >= ") << threshold;
  out.message = msg.str();
  return out;
}

std::pair<Exhaustion, DefectedCheck> make_defected(const PeriodicLattice& base,
                                                   const DefectRule& defects,
                                                   const std::vector<int>& stages) {
  if (stages.empty()) throw std::invalid_argument("need at least one stage");
  Exhaustion exh = Exhaustion::from_lattice(base, defects);
  DefectedCheck check;
  for (int n : stages) {
    StageGraph s = exh.stage(n);
    if (!s.graph.is_connected()) {
      std::ostringstream msg;
      msg << "stage " << n << " is disconnected after removing defects";
      throw std::invalid_argument(msg.str());
    }
    check.densities.push_back(exh.defect_density(n));
  }
  bool decreasing_somewhere = false;
  bool nondecreasing = true;
  for (std::size_t i = 1; i < check.densities.size(); ++i) {
    if (check.densities[i] < check.densities[i - 1] - 1e-15) decreasing_somewhere = true;
    if (check.densities[i] < check.densities[i - 1] * 0.999) nondecreasing = false;
  }
  check.positive_density =
      (check.densities.back() > 0) && (nondecreasing || !decreasing_somewhere);
  check.accepted = true;
  check.message = check.positive_density
                      ? "defect density does not vanish along supplied stages; "
                        "unsupported for condensation claims"
                      : "defect density vanishing along supplied stages";
  exh.defect_density_positive_ = check.positive_density;
  return {std::move(exh), check};
}

}  // namespace graphbec
