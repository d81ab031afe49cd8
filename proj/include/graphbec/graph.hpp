// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace graphbec {

/// Simple undirected graph: no self-loops, no multiple edges.
/// Vertices are dense integers 0..|V|-1. Immutable after construction,
/// safe for concurrent read.
class Graph {
 public:
  Graph() = default;
  /// Validates the edge list (throws std::invalid_argument on loops,
  /// duplicates, or out-of-range endpoints).
  Graph(int vertex_count, std::vector<std::pair<int, int>> edges);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }
  int max_degree() const;

  /// Neighbors of v as a contiguous span into the adjacency array.
  const int* neighbors_begin(int v) const { return adjacency_.data() + offsets_[v]; }
  const int* neighbors_end(int v) const { return adjacency_.data() + offsets_[v + 1]; }

  bool has_edge(int a, int b) const;
  bool is_connected() const;

  /// BFS distances from source; unreachable vertices get -1.
  std::vector<int> distances_from(int source) const;
  /// BFS distances to the nearest vertex of `sources`; -1 if unreachable.
  std::vector<int> distances_from_set(const std::vector<int>& sources) const;

  /// Line-oriented text format: "graph <n>" header, then "edge <i> <j>" lines.
  static Graph read_text(std::istream& in);
  static Graph read_text_file(const std::string& path);
  void write_text(std::ostream& out) const;

 private:
  int vertex_count_ = 0;
  std::vector<std::pair<int, int>> edges_;   // normalized i < j, sorted
  std::vector<int> offsets_;                 // CSR offsets, size n+1
  std::vector<int> adjacency_;               // CSR neighbor lists
};

}  // namespace graphbec
