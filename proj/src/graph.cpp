// Copyright 2026 The graphbec Authors
// SPDX-License-Identifier: Apache-2.0

#include "graphbec/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace graphbec {

Graph::Graph(int vertex_count, std::vector<std::pair<int, int>> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  if (vertex_count_ < 0) throw std::invalid_argument("negative vertex count");
  for (auto& [a, b] : edges_) {
    if (a < 0 || b < 0 || a >= vertex_count_ || b >= vertex_count_)
      throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loop not allowed");
    if (a > b) std::swap(a, b);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw std::invalid_argument("multiple edge not allowed");

  offsets_.assign(vertex_count_ + 1, 0);
  for (const auto& [a, b] : edges_) {
    ++offsets_[a + 1];
    ++offsets_[b + 1];
  }
  for (int v = 0; v < vertex_count_; ++v) offsets_[v + 1] += offsets_[v];
  adjacency_.resize(2 * edges_.size());
  std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [a, b] : edges_) {
    adjacency_[cursor[a]++] = b;
    adjacency_[cursor[b]++] = a;
  }
  for (int v = 0; v < vertex_count_; ++v)
    std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1]);
}

int Graph::max_degree() const {
  int d = 0;
  for (int v = 0; v < vertex_count_; ++v) d = std::max(d, degree(v));
  return d;
}

bool Graph::has_edge(int a, int b) const {
  if (a < 0 || b < 0 || a >= vertex_count_ || b >= vertex_count_) return false;
  return std::binary_search(neighbors_begin(a), neighbors_end(a), b);
}

bool Graph::is_connected() const {
  if (vertex_count_ == 0) return false;
  auto dist = distances_from(0);
  return std::find(dist.begin(), dist.end(), -1) == dist.end();
}

std::vector<int> Graph::distances_from(int source) const {
  return distances_from_set({source});
}

std::vector<int> Graph::distances_from_set(const std::vector<int>& sources) const {
  std::vector<int> dist(vertex_count_, -1);
  std::deque<int> queue;
  for (int s : sources) {
    if (s < 0 || s >= vertex_count_) throw std::invalid_argument("bfs source out of range");
    if (dist[s] == -1) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (const int* it = neighbors_begin(v); it != neighbors_end(v); ++it) {
      if (dist[*it] == -1) {
        dist[*it] = dist[v] + 1;
        queue.push_back(*it);
      }
    }
  }
  return dist;
}

Graph Graph::read_text(std::istream& in) {
  std::string keyword;
  int n = -1;
  if (!(in >> keyword >> n) || keyword != "graph")
    throw std::invalid_argument("graph file must start with 'graph <num_vertices>'");
  std::vector<std::pair<int, int>> edges;
  while (in >> keyword) {
    if (keyword == "edge") {
      int a, b;
      if (!(in >> a >> b)) throw std::invalid_argument("malformed edge line");
      edges.emplace_back(a, b);
    } else if (!keyword.empty() && keyword[0] == '#') {
      std::string rest;
      std::getline(in, rest);
    } else {
      throw std::invalid_argument("unknown keyword in graph file: " + keyword);
    }
  }
  return Graph(n, std::move(edges));
}

Graph Graph::read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file: " + path);
  return read_text(in);
}

void Graph::write_text(std::ostream& out) const {
  out << "graph " << vertex_count_ << "\n";
  for (const auto& [a, b] : edges_) out << "edge " << a << " " << b << "\n";
}

}  // namespace graphbec
