#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace kronred {

/// One directed edge; vertex ids are 1-based.
struct Edge {
  int tail = 0;
  int head = 0;
};

inline bool operator==(const Edge& a, const Edge& b) {
  return a.tail == b.tail && a.head == b.head;
}

/// Directed multigraph on vertices 1..v. Edge order is stable and defines
/// the column order of the incidence matrix. Self-loops are rejected at
/// construction; parallel edges are allowed.
class DirectedGraph {
 public:
  DirectedGraph(int vertex_count, std::vector<Edge> edges);

  int vertex_count() const noexcept { return vertex_count_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// True iff every vertex pair is joined by a path ignoring edge direction.
  bool is_connected() const;

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
};

inline bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
  return a.vertex_count() == b.vertex_count() && a.edges() == b.edges();
}

/// Disjoint split of 1..v into boundary and internal vertices. The boundary
/// must be nonempty. Both sides are kept sorted ascending; that order fixes
/// the row order of the split incidence blocks.
class VertexPartition {
 public:
  VertexPartition(int vertex_count, std::vector<int> boundary_ids);

  int vertex_count() const noexcept { return vertex_count_; }
  const std::vector<int>& boundary() const noexcept { return boundary_; }
  const std::vector<int>& internal() const noexcept { return internal_; }
  bool is_boundary(int vertex_id) const;

 private:
  int vertex_count_;
  std::vector<int> boundary_;
  std::vector<int> internal_;
};

inline bool operator==(const VertexPartition& a, const VertexPartition& b) {
  return a.vertex_count() == b.vertex_count() && a.boundary() == b.boundary();
}

/// v-by-e incidence matrix: column k has -1 at the tail and +1 at the head
/// of edge k.
Eigen::MatrixXd build_incidence(const DirectedGraph& graph);

/// Splits incidence rows into (B_b, B_i), each block ordered by ascending
/// vertex id.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_rows(
    const Eigen::MatrixXd& incidence, const VertexPartition& partition);

/// B diag(w) B^T for strictly positive edge weights w.
Eigen::MatrixXd weighted_laplacian(const Eigen::MatrixXd& incidence,
                                   const Eigen::VectorXd& weights);

}  // namespace kronred
