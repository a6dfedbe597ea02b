#include "kronred/graph.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kronred {

namespace {

// Union-find over 0-based indices.
class DisjointSet {
 public:
  explicit DisjointSet(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

}  // namespace

DirectedGraph::DirectedGraph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  if (vertex_count_ <= 0) {
    throw std::invalid_argument("graph must have at least one vertex");
  }
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    if (e.tail < 1 || e.tail > vertex_count_ || e.head < 1 ||
        e.head > vertex_count_) {
      throw std::invalid_argument("edge " + std::to_string(k + 1) +
                                  " references vertex outside 1.." +
                                  std::to_string(vertex_count_));
    }
    if (e.tail == e.head) {
      throw std::invalid_argument("edge " + std::to_string(k + 1) +
                                  " is a self-loop at vertex " +
                                  std::to_string(e.tail));
    }
  }
}

bool DirectedGraph::is_connected() const {
  DisjointSet sets(vertex_count_);
  for (const Edge& e : edges_) {
    sets.unite(e.tail - 1, e.head - 1);
  }
  const int root = sets.find(0);
  for (int v = 1; v < vertex_count_; ++v) {
    if (sets.find(v) != root) {
      return false;
    }
  }
  return true;
}

VertexPartition::VertexPartition(int vertex_count,
                                 std::vector<int> boundary_ids)
    : vertex_count_(vertex_count), boundary_(std::move(boundary_ids)) {
  if (vertex_count_ <= 0) {
    throw std::invalid_argument("partition requires a positive vertex count");
  }
  std::sort(boundary_.begin(), boundary_.end());
  boundary_.erase(std::unique(boundary_.begin(), boundary_.end()),
                  boundary_.end());
  if (boundary_.empty()) {
    throw std::invalid_argument("boundary vertex set must be nonempty");
  }
  for (int id : boundary_) {
    if (id < 1 || id > vertex_count_) {
      throw std::invalid_argument("boundary vertex " + std::to_string(id) +
                                  " outside 1.." +
                                  std::to_string(vertex_count_));
    }
  }
  internal_.reserve(vertex_count_ - boundary_.size());
  auto it = boundary_.begin();
  for (int v = 1; v <= vertex_count_; ++v) {
    if (it != boundary_.end() && *it == v) {
      ++it;
    } else {
      internal_.push_back(v);
    }
  }
}

bool VertexPartition::is_boundary(int vertex_id) const {
  return std::binary_search(boundary_.begin(), boundary_.end(), vertex_id);
}

Eigen::MatrixXd build_incidence(const DirectedGraph& graph) {
  Eigen::MatrixXd incidence =
      Eigen::MatrixXd::Zero(graph.vertex_count(), graph.edge_count());
  for (int k = 0; k < graph.edge_count(); ++k) {
    const Edge& e = graph.edges()[k];
    incidence(e.tail - 1, k) = -1.0;
    incidence(e.head - 1, k) = 1.0;
  }
  return incidence;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_rows(
    const Eigen::MatrixXd& incidence, const VertexPartition& partition) {
  if (incidence.rows() != partition.vertex_count()) {
    throw std::invalid_argument(
        "incidence row count does not match partition vertex count");
  }
  const auto gather = [&](const std::vector<int>& ids) {
    Eigen::MatrixXd block(static_cast<Eigen::Index>(ids.size()),
                          incidence.cols());
    for (std::size_t r = 0; r < ids.size(); ++r) {
      block.row(static_cast<Eigen::Index>(r)) = incidence.row(ids[r] - 1);
    }
    return block;
  };
  return {gather(partition.boundary()), gather(partition.internal())};
}

Eigen::MatrixXd weighted_laplacian(const Eigen::MatrixXd& incidence,
                                   const Eigen::VectorXd& weights) {
  if (weights.size() != incidence.cols()) {
    throw std::invalid_argument(
        "weight count does not match incidence column count");
  }
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0)) {
      throw std::invalid_argument("edge " + std::to_string(k + 1) +
                                  " has nonpositive weight");
    }
  }
  return incidence * weights.asDiagonal() * incidence.transpose();
}

}  // namespace kronred
