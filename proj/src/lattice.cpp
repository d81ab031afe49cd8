// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphbec/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace graphbec {

namespace {

bool offset_is_zero(const Offset& k) {
  return std::all_of(k.begin(), k.end(), [](int c) { return c == 0; });
}

Offset negate(const Offset& k) {
  Offset r{};
  for (int i = 0; i < kMaxLatticeDim; ++i) r[i] = -k[i];
  return r;
}

Offset add(const Offset& a, const Offset& b) {
  Offset r{};
  for (int i = 0; i < kMaxLatticeDim; ++i) r[i] = a[i] + b[i];
  return r;
}

/// Canonical form of an undirected bridge: orient so the tuple
/// (a, b, offset) is lexicographically minimal between the edge and its
/// reversal (b, a, -offset).
std::tuple<int, int, Offset> canonical_bridge(int a, int b, const Offset& k) {
  std::tuple<int, int, Offset> fwd(a, b, k);
  std::tuple<int, int, Offset> rev(b, a, negate(k));
  return std::min(fwd, rev);
}

}  // namespace

bool operator==(const LatticeVertex& x, const LatticeVertex& y) {
  return x.local == y.local && x.cell == y.cell;
}

PeriodicLattice::PeriodicLattice(int nu, int fundamental_vertices,
                                 std::vector<std::pair<int, int>> internal_edges,
                                 std::vector<BridgeEdge> bridge_edges)
    : nu_(nu),
      cell_size_(fundamental_vertices),
      internal_edges_(std::move(internal_edges)),
      bridge_edges_(std::move(bridge_edges)) {
  if (nu_ < 1 || nu_ > kMaxLatticeDim) throw std::invalid_argument("lattice dimension out of range");
  if (cell_size_ < 1) throw std::invalid_argument("fundamental domain must be nonempty");
  for (auto& [a, b] : internal_edges_) {
    if (a < 0 || b < 0 || a >= cell_size_ || b >= cell_size_)
      throw std::invalid_argument("internal edge endpoint out of range");
    if (a == b) throw std::invalid_argument("internal self-loop not allowed");
    if (a > b) std::swap(a, b);
  }
  std::sort(internal_edges_.begin(), internal_edges_.end());
  if (std::adjacent_find(internal_edges_.begin(), internal_edges_.end()) != internal_edges_.end())
    throw std::invalid_argument("duplicate internal edge");

  std::set<std::tuple<int, int, Offset>> seen;
  for (const auto& e : bridge_edges_) {
    if (e.a < 0 || e.b < 0 || e.a >= cell_size_ || e.b >= cell_size_)
      throw std::invalid_argument("bridge edge endpoint out of range");
    for (int i = nu_; i < kMaxLatticeDim; ++i)
      if (e.offset[i] != 0) throw std::invalid_argument("bridge offset exceeds lattice dimension");
    if (offset_is_zero(e.offset))
      throw std::invalid_argument("bridge offset must be nonzero (use internal_edges)");
    if (!seen.insert(canonical_bridge(e.a, e.b, e.offset)).second)
      throw std::invalid_argument("duplicate bridge edge");
  }
}

int PeriodicLattice::cell_degree(int a) const {
  int d = 0;
  for (const auto& [x, y] : internal_edges_) d += (x == a) + (y == a);
  for (const auto& e : bridge_edges_) d += (e.a == a) + (e.b == a);
  return d;
}

int PeriodicLattice::degree_bound() const {
  int d = 0;
  for (int a = 0; a < cell_size_; ++a) d = std::max(d, cell_degree(a));
  return d;
}

int PeriodicLattice::max_offset() const {
  int m = 0;
  for (const auto& e : bridge_edges_)
    for (int i = 0; i < nu_; ++i) m = std::max(m, std::abs(e.offset[i]));
  return m;
}

std::vector<LatticeVertex> PeriodicLattice::neighbors(const LatticeVertex& v) const {
  std::vector<LatticeVertex> out;
  for (const auto& [x, y] : internal_edges_) {
    if (x == v.local) out.push_back({y, v.cell});
    if (y == v.local) out.push_back({x, v.cell});
  }
  for (const auto& e : bridge_edges_) {
    if (e.a == v.local) out.push_back({e.b, add(v.cell, e.offset)});
    if (e.b == v.local) out.push_back({e.a, add(v.cell, negate(e.offset))});
  }
  return out;
}

bool PeriodicLattice::quotient_connected() const {
  std::vector<int> parent(cell_size_);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int x, int y) { parent[find(x)] = find(y); };
  for (const auto& [a, b] : internal_edges_) unite(a, b);
  for (const auto& e : bridge_edges_) unite(e.a, e.b);
  for (int a = 1; a < cell_size_; ++a)
    if (find(a) != find(0)) return false;
  return true;
}

bool PeriodicLattice::generates_connected_graph() const {
  if (!quotient_connected()) return false;
  // Spanning tree of the quotient assigns each local vertex a cell shift;
  // every remaining edge closes a cycle whose winding vector is the
  // mismatch. The graph is connected iff those windings generate Z^nu.
  std::vector<bool> visited(cell_size_, false);
  std::vector<Offset> shift(cell_size_, zero_offset());
  std::vector<Offset> windings;

  struct QEdge {
    int a, b;
    Offset k;
  };
  std::vector<QEdge> qedges;
  for (const auto& [a, b] : internal_edges_) qedges.push_back({a, b, zero_offset()});
  for (const auto& e : bridge_edges_) qedges.push_back({e.a, e.b, e.offset});

  visited[0] = true;
  std::vector<int> frontier{0};
  std::vector<bool> used(qedges.size(), false);
  while (!frontier.empty()) {
    std::vector<int> next;
    for (std::size_t ei = 0; ei < qedges.size(); ++ei) {
      if (used[ei]) continue;
      const auto& e = qedges[ei];
      if (visited[e.a] && !visited[e.b]) {
        visited[e.b] = true;
        shift[e.b] = add(shift[e.a], e.k);
        used[ei] = true;
        next.push_back(e.b);
      } else if (visited[e.b] && !visited[e.a]) {
        visited[e.a] = true;
        shift[e.a] = add(shift[e.b], negate(e.k));
        used[ei] = true;
        next.push_back(e.a);
      }
    }
    if (next.empty()) break;
    frontier = std::move(next);
  }
  for (std::size_t ei = 0; ei < qedges.size(); ++ei) {
    if (used[ei]) continue;
    const auto& e = qedges[ei];
    // winding of the fundamental cycle through this edge
    windings.push_back(add(add(shift[e.a], e.k), negate(shift[e.b])));
  }

  // Integer column reduction: windings generate Z^nu iff reduction
  // yields nu pivots all equal to +-1.
  std::vector<std::vector<long long>> rows;
  for (const auto& w : windings) {
    std::vector<long long> r(nu_);
    for (int i = 0; i < nu_; ++i) r[i] = w[i];
    rows.push_back(r);
  }
  int rank = 0;
  for (int col = 0; col < nu_; ++col) {
    // gcd-reduce all rows below `rank` on this column
    int pivot = -1;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if (rows[r][col] != 0) {
        pivot = static_cast<int>(r);
        break;
      }
    if (pivot < 0) return false;  // column not reachable
    std::swap(rows[rank], rows[pivot]);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t r = rank + 1; r < rows.size(); ++r) {
        if (rows[r][col] == 0) continue;
        long long q = rows[r][col] / rows[rank][col];
        for (int c = 0; c < nu_; ++c) rows[r][c] -= q * rows[rank][c];
        if (rows[r][col] != 0) {
          std::swap(rows[rank], rows[r]);
          changed = true;
        }
      }
    }
    if (std::abs(rows[rank][col]) != 1) return false;  // proper sublattice
    ++rank;
  }
  return true;
}

bool PeriodicLattice::is_simple_hypercubic() const {
  if (cell_size_ != 1 || !internal_edges_.empty()) return false;
  if (static_cast<int>(bridge_edges_.size()) != nu_) return false;
  std::vector<bool> axis_seen(nu_, false);
  for (const auto& e : bridge_edges_) {
    int axis = -1;
    for (int i = 0; i < nu_; ++i) {
      if (e.offset[i] == 0) continue;
      if (axis >= 0 || std::abs(e.offset[i]) != 1) return false;
      axis = i;
    }
    if (axis < 0 || axis_seen[axis]) return false;
    axis_seen[axis] = true;
  }
  return true;
}

PeriodicLattice make_zd_lattice(int nu) {
  if (nu < 1) throw std::invalid_argument("dimension must be >= 1");
  std::vector<BridgeEdge> bridges;
  for (int i = 0; i < nu; ++i) {
    BridgeEdge e;
    e.a = 0;
    e.b = 0;
    e.offset[i] = 1;
    bridges.push_back(e);
  }
  return PeriodicLattice(nu, 1, {}, std::move(bridges));
}

LatticeTruncation truncate(const PeriodicLattice& lattice, int n, BoundaryCondition bc) {
  if (n < 1) throw std::invalid_argument("truncation index must be >= 1");
  const int nu = lattice.nu();
  const int L = 2 * n + 1;
  std::int64_t cells = 1;
  for (int i = 0; i < nu; ++i) {
    cells *= L;
    if (cells * lattice.cell_size() > (std::int64_t{1} << 31))
      throw std::invalid_argument("truncation too large");
  }
  const std::int64_t nv = cells * lattice.cell_size();

  auto cell_index = [&](const Offset& k) -> std::int64_t {
    std::int64_t idx = 0;
    for (int i = nu - 1; i >= 0; --i) idx = idx * L + (k[i] + n);
    return idx;
  };
  auto vertex_index = [&](int local, const Offset& k) -> std::int64_t {
    return cell_index(k) * lattice.cell_size() + local;
  };
  auto in_box = [&](const Offset& k) {
    for (int i = 0; i < nu; ++i)
      if (k[i] < -n || k[i] > n) return false;
    return true;
  };
  auto wrap = [&](Offset k) {
    for (int i = 0; i < nu; ++i) {
      int c = (k[i] + n) % L;
      if (c < 0) c += L;
      k[i] = c - n;
    }
    return k;
  };

  std::vector<LatticeVertex> ids(nv);
  {
    Offset k{};
    for (int i = 0; i < nu; ++i) k[i] = -n;
    for (std::int64_t c = 0; c < cells; ++c) {
      for (int a = 0; a < lattice.cell_size(); ++a)
        ids[c * lattice.cell_size() + a] = LatticeVertex{a, k};
      for (int i = 0; i < nu; ++i) {
        if (++k[i] <= n) break;
        k[i] = -n;
      }
    }
  }

  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(nv) * lattice.degree_bound() / 2);
  for (std::int64_t c = 0; c < cells; ++c) {
    const Offset& k = ids[c * lattice.cell_size()].cell;
    for (const auto& [a, b] : lattice.internal_edges())
      edges.emplace_back(static_cast<int>(vertex_index(a, k)),
                         static_cast<int>(vertex_index(b, k)));
    for (const auto& e : lattice.bridge_edges()) {
      Offset target{};
      for (int i = 0; i < kMaxLatticeDim; ++i) target[i] = k[i] + e.offset[i];
      if (bc == BoundaryCondition::free) {
        if (!in_box(target)) continue;
        edges.emplace_back(static_cast<int>(vertex_index(e.a, k)),
                           static_cast<int>(vertex_index(e.b, target)));
      } else {
        Offset wrapped = wrap(target);
        int u = static_cast<int>(vertex_index(e.a, k));
        int v = static_cast<int>(vertex_index(e.b, wrapped));
        if (u == v)
          throw std::invalid_argument(
              "periodic truncation creates a self-loop; increase n");
        edges.emplace_back(u, v);
      }
    }
  }
  if (bc == BoundaryCondition::periodic) {
    auto sorted = edges;
    for (auto& [a, b] : sorted)
      if (a > b) std::swap(a, b);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument(
          "periodic truncation creates a multiple edge; increase n");
  }

  LatticeTruncation out{Graph(static_cast<int>(nv), std::move(edges)), std::move(ids), L, 0};
  out.origin = static_cast<int>(vertex_index(0, zero_offset()));
  return out;
}

int min_periodic_truncation(const PeriodicLattice& lattice, int n_min) {
  for (int n = std::max(1, n_min);; ++n) {
    try {
      truncate(lattice, n, BoundaryCondition::periodic);
      return n;
    } catch (const std::invalid_argument&) {
      if (n > 64) throw;
    }
  }
}

DefectRule DefectRule::none() { return DefectRule(); }

DefectRule DefectRule::finite(std::vector<std::pair<LatticeVertex, LatticeVertex>> removed) {
  DefectRule r;
  r.kind_ = Kind::finite_list;
  r.removed_ = std::move(removed);
  return r;
}

DefectRule DefectRule::comb2d() {
  DefectRule r;
  r.kind_ = Kind::comb2d;
  return r;
}

DefectRule DefectRule::plane_in_z3() {
  DefectRule r;
  r.kind_ = Kind::plane_in_z3;
  return r;
}

bool DefectRule::infinite_support() const {
  return kind_ == Kind::comb2d || kind_ == Kind::plane_in_z3;
}

bool DefectRule::removed(const LatticeVertex& x, const LatticeVertex& y) const {
  switch (kind_) {
    case Kind::none:
      return false;
    case Kind::finite_list:
      for (const auto& [u, v] : removed_)
        if ((u == x && v == y) || (u == y && v == x)) return true;
      return false;
    case Kind::comb2d: {
      // x-direction edge off the x-axis
      if (x.cell[1] != y.cell[1]) return false;
      if (std::abs(x.cell[0] - y.cell[0]) != 1) return false;
      return x.cell[1] != 0;
    }
    case Kind::plane_in_z3: {
      if (std::abs(x.cell[0] - y.cell[0]) != 1) return false;
      if (x.cell[1] != y.cell[1] || x.cell[2] != y.cell[2]) return false;
      return x.cell[2] == 0;
    }
  }
  return false;
}

std::int64_t DefectRule::count_in_box(const PeriodicLattice& lattice, int n) const {
  const std::int64_t L = 2 * n + 1;
  switch (kind_) {
    case Kind::none:
      return 0;
    case Kind::finite_list: {
      std::int64_t c = 0;
      for (const auto& [u, v] : removed_) {
        bool inside = true;
        for (int i = 0; i < lattice.nu(); ++i)
          inside = inside && std::abs(u.cell[i]) <= n && std::abs(v.cell[i]) <= n;
        if (inside) ++c;
      }
      return c;
    }
    case Kind::comb2d:
      // (L-1) x-edges per row, L-1 rows off the axis
      return (L - 1) * (L - 1);
    case Kind::plane_in_z3:
      return (L - 1) * L;
  }
  return 0;
}

PeriodicLattice PeriodicLattice::read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open lattice file: " + path);
  nlohmann::json j;
  in >> j;
  int nu = j.at("nu").get<int>();
  int nv = j.at("fundamental_vertices").get<int>();
  std::vector<std::pair<int, int>> internal;
  for (const auto& e : j.value("internal_edges", nlohmann::json::array()))
    internal.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  std::vector<BridgeEdge> bridges;
  for (const auto& e : j.value("bridge_edges", nlohmann::json::array())) {
    BridgeEdge b;
    b.a = e.at(0).get<int>();
    b.b = e.at(1).get<int>();
    auto off = e.at(2);
    if (static_cast<int>(off.size()) != nu)
      throw std::invalid_argument("bridge offset dimension mismatch");
    for (int i = 0; i < nu; ++i) b.offset[i] = off.at(i).get<int>();
    bridges.push_back(b);
  }
  return PeriodicLattice(nu, nv, std::move(internal), std::move(bridges));
}

std::string PeriodicLattice::to_json() const {
  nlohmann::json j;
  j["nu"] = nu_;
  j["fundamental_vertices"] = cell_size_;
  auto internal = nlohmann::json::array();
  for (const auto& [a, b] : internal_edges_) internal.push_back({a, b});
  j["internal_edges"] = internal;
  auto bridges = nlohmann::json::array();
  for (const auto& e : bridge_edges_) {
    auto off = nlohmann::json::array();
    for (int i = 0; i < nu_; ++i) off.push_back(e.offset[i]);
    bridges.push_back({e.a, e.b, off});
  }
  j["bridge_edges"] = bridges;
  return j.dump(2);
}

}  // namespace graphbec
