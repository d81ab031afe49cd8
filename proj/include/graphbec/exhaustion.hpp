// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphbec/graph.hpp"
#include "graphbec/lattice.hpp"

namespace graphbec {

/// One finite stage of an exhaustion, as a standalone graph plus the
/// data relating it to the infinite graph it approximates.
struct StageGraph {
  Graph graph;
  /// Degree each vertex has in the infinite graph (equals the stage
  /// degree exactly off the boundary).
  std::vector<int> full_degree;
  /// Vertices with an edge into the complement of the stage.
  std::vector<int> boundary;
  int origin = 0;
  /// Lattice coordinates, when the base is a lattice.
  std::vector<LatticeVertex> vertex_ids;
  int index = 0;  // stage index n
};

/// Increasing sequence of finite connected subgraphs exhausting an
/// infinite graph. Two bases are supported: a periodic lattice
/// (optionally with defects), whose stages are the cell blocks
/// |k_i| <= n with free boundary, and an explicit host graph, whose
/// stages are metric balls around a fixed origin.
class Exhaustion {
 public:
  static Exhaustion from_lattice(PeriodicLattice lattice,
                                 DefectRule defects = DefectRule::none());
  static Exhaustion from_graph(Graph host, int origin = 0);

  bool has_lattice_base() const { return lattice_.has_value(); }
  const PeriodicLattice& lattice() const;
  const DefectRule& defects() const { return defects_; }
  bool defect_density_positive() const { return defect_density_positive_; }

  /// Upper bound on vertex degrees of the infinite graph.
  int degree_bound() const;

  StageGraph stage(int n) const;
  /// Largest stage index available (host-graph bases are finite).
  int max_stage() const;
  /// Number of vertices the stage n graph would have.
  std::int64_t stage_vertex_count(int n) const;

  /// |boundary(stage n)| / |stage n|.
  double boundary_volume_ratio(int n) const;
  /// Defect edges inside stage n divided by stage volume.
  double defect_density(int n) const;

  /// (boundary, augmented boundary): vertices of the stage at distance
  /// <= m from the boundary set.
  std::pair<std::vector<int>, std::vector<int>> boundary_sets(const StageGraph& s, int m) const;

 private:
  Exhaustion() = default;

  friend std::pair<Exhaustion, struct DefectedCheck> make_defected(
      const PeriodicLattice& base, const DefectRule& defects, const std::vector<int>& stages);

  std::optional<PeriodicLattice> lattice_;
  DefectRule defects_;
  bool defect_density_positive_ = false;

  std::optional<Graph> host_;
  int host_origin_ = 0;
};

/// Checks the vanishing boundary-volume condition empirically over the
/// supplied stages: ratio decreasing and final value below `threshold`.
struct ExhaustionCheck {
  bool accepted = false;
  std::vector<double> ratios;
  std::string message;
};
ExhaustionCheck check_vanishing_boundary(const Exhaustion& exh, const std::vector<int>& stages,
                                         double threshold = 0.25);

struct DefectedCheck {
  bool accepted = false;
  bool positive_density = false;   // flagged unsupported for condensation claims
  std::vector<double> densities;   // per supplied stage
  std::string message;
};

/// Builds an exhaustion of the defected lattice and validates it over
/// the supplied stages: every stage connected, and the empirical defect
/// density ratio decreasing toward zero (a non-decreasing ratio is
/// reported as positive density).
std::pair<Exhaustion, DefectedCheck> make_defected(const PeriodicLattice& base,
                                                   const DefectRule& defects,
                                                   const std::vector<int>& stages);

}  // namespace graphbec
