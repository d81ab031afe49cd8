// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphbec/graph.hpp"

namespace graphbec {

constexpr int kMaxLatticeDim = 8;

/// Cell offset in Z^nu. Only the first nu components are meaningful.
using Offset = std::array<int, kMaxLatticeDim>;

inline Offset zero_offset() { return Offset{}; }

/// Edge bridging two copies of the fundamental domain: vertex (a, j)
/// connects to vertex (b, j + offset) for every cell j. offset != 0.
struct BridgeEdge {
  int a = 0;
  int b = 0;
  Offset offset = zero_offset();
};

/// Vertex of the infinite lattice graph: local index within the
/// fundamental domain plus a cell coordinate in Z^nu.
struct LatticeVertex {
  int local = 0;
  Offset cell = zero_offset();
};

bool operator==(const LatticeVertex& x, const LatticeVertex& y);

enum class BoundaryCondition { free, periodic };

/// Infinite periodic graph described by a finite fundamental domain and
/// a Z^nu shift action: internal edges live inside one cell, bridge
/// edges connect shifted copies. Immutable after construction.
class PeriodicLattice {
 public:
  PeriodicLattice(int nu, int fundamental_vertices,
                  std::vector<std::pair<int, int>> internal_edges,
                  std::vector<BridgeEdge> bridge_edges);

  int nu() const { return nu_; }
  int cell_size() const { return cell_size_; }
  const std::vector<std::pair<int, int>>& internal_edges() const { return internal_edges_; }
  const std::vector<BridgeEdge>& bridge_edges() const { return bridge_edges_; }

  /// Degree of local vertex a in the infinite graph.
  int cell_degree(int a) const;
  /// sup of vertex degrees over the infinite graph.
  int degree_bound() const;
  /// Largest |offset component| over the bridge edges.
  int max_offset() const;

  /// All lattice neighbors of (a, cell).
  std::vector<LatticeVertex> neighbors(const LatticeVertex& v) const;

  /// Quotient multigraph is connected (ignoring offsets).
  bool quotient_connected() const;
  /// The generated infinite graph is connected: quotient connected and
  /// the cycle winding vectors generate the full Z^nu.
  bool generates_connected_graph() const;

  /// True for a single-vertex cell with exactly the 2*nu unit-axis
  /// bridges of the nearest-neighbor Z^nu lattice.
  bool is_simple_hypercubic() const;

  /// Structured data file (JSON): fields nu, fundamental_vertices,
  /// internal_edges, bridge_edges.
  static PeriodicLattice read_json_file(const std::string& path);
  std::string to_json() const;

 private:
  int nu_ = 1;
  int cell_size_ = 1;
  std::vector<std::pair<int, int>> internal_edges_;
  std::vector<BridgeEdge> bridge_edges_;
};

/// Canonical nearest-neighbor Z^nu lattice: one-vertex cell, one bridge
/// per positive axis direction.
PeriodicLattice make_zd_lattice(int nu);

/// Result of truncating a lattice to the cells |k_i| <= n.
struct LatticeTruncation {
  Graph graph;
  std::vector<LatticeVertex> vertex_ids;  // dense index -> lattice vertex
  int cells_per_axis = 0;                 // 2n+1
  int origin = 0;                         // index of (local 0, cell 0)
};

/// Free mode: induced subgraph on the (2n+1)^nu block of cells.
/// Periodic mode: same vertex set with bridge edges wrapped modulo 2n+1;
/// throws std::invalid_argument when the wrap-around would create a
/// self-loop or multiple edge (caller must increase n).
LatticeTruncation truncate(const PeriodicLattice& lattice, int n, BoundaryCondition bc);

/// Smallest n >= n_min whose periodic truncation is simple.
int min_periodic_truncation(const PeriodicLattice& lattice, int n_min = 1);

/// Defects: removed edges of the infinite lattice, either a finite list
/// or a builtin rule with infinite support.
class DefectRule {
 public:
  enum class Kind {
    none,
    finite_list,   // explicit removed edges
    comb2d,        // Z^2: remove all x-direction edges off the x-axis
    plane_in_z3,   // Z^3: remove x-direction edges in the plane k_z = 0
  };

  DefectRule() = default;
  static DefectRule none();
  static DefectRule finite(std::vector<std::pair<LatticeVertex, LatticeVertex>> removed);
  static DefectRule comb2d();
  static DefectRule plane_in_z3();

  Kind kind() const { return kind_; }
  bool empty() const { return kind_ == Kind::none; }
  /// True when the rule removes infinitely many edges.
  bool infinite_support() const;
  bool removed(const LatticeVertex& x, const LatticeVertex& y) const;
  /// Number of removed edges with both endpoints in the cell block |k_i| <= n.
  std::int64_t count_in_box(const PeriodicLattice& lattice, int n) const;

 private:
  Kind kind_ = Kind::none;
  std::vector<std::pair<LatticeVertex, LatticeVertex>> removed_;
};

}  // namespace graphbec
