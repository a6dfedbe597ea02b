#include "kronred/reduction.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>
#include <string>

namespace kronred {

namespace {

constexpr double kConditionGuard = 1e-12;  // reciprocal condition threshold
constexpr double kEdgeCut = 1e-12;         // relative off-diagonal edge cutoff

struct IndexSets {
  std::vector<Eigen::Index> boundary;
  std::vector<Eigen::Index> internal;
};

IndexSets zero_based(const VertexPartition& partition) {
  IndexSets sets;
  sets.boundary.reserve(partition.boundary().size());
  for (int id : partition.boundary()) {
    sets.boundary.push_back(id - 1);
  }
  sets.internal.reserve(partition.internal().size());
  for (int id : partition.internal()) {
    sets.internal.push_back(id - 1);
  }
  return sets;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m,
                       const std::vector<Eigen::Index>& rows,
                       const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(rows[i], cols[j]);
    }
  }
  return out;
}

Eigen::LLT<Eigen::MatrixXd> factor_internal_block(const Eigen::MatrixXd& lii) {
  Eigen::LLT<Eigen::MatrixXd> llt(lii);
  if (llt.info() != Eigen::Success || llt.rcond() < kConditionGuard) {
    throw NumericError(
        "internal block is numerically singular; the graph is likely "
        "disconnected or has nonpositive weights");
  }
  return llt;
}

}  // namespace

Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& laplacian,
                                 const VertexPartition& partition) {
  if (laplacian.rows() != laplacian.cols() ||
      laplacian.rows() != partition.vertex_count()) {
    throw std::invalid_argument(
        "laplacian dimensions do not match the partition");
  }
  const IndexSets sets = zero_based(partition);
  Eigen::MatrixXd lbb = gather(laplacian, sets.boundary, sets.boundary);
  if (sets.internal.empty()) {
    return lbb;
  }
  const Eigen::MatrixXd lib = gather(laplacian, sets.internal, sets.boundary);
  const Eigen::MatrixXd lii = gather(laplacian, sets.internal, sets.internal);
  const auto llt = factor_internal_block(lii);
  lbb.noalias() -= lib.transpose() * llt.solve(lib);
  // The elimination of a weighted Laplacian is again a weighted Laplacian;
  // restore the exact symmetry and zero row sums the arithmetic smears.
  lbb = ((lbb + lbb.transpose()) / 2.0).eval();
  for (Eigen::Index i = 0; i < lbb.rows(); ++i) {
    lbb(i, i) = 0.0;
    lbb(i, i) = -lbb.row(i).sum();
  }
  return lbb;
}

WeightedGraph laplacian_to_graph(const Eigen::MatrixXd& reduced_laplacian) {
  const Eigen::Index n = reduced_laplacian.rows();
  if (n == 0 || reduced_laplacian.cols() != n) {
    throw std::invalid_argument("reduced Laplacian must be square and nonempty");
  }
  const double scale = reduced_laplacian.cwiseAbs().maxCoeff();
  const double symmetry =
      (reduced_laplacian - reduced_laplacian.transpose()).cwiseAbs().maxCoeff();
  if (symmetry > 1e-8 * std::max(scale, 1.0)) {
    throw std::invalid_argument("matrix is not symmetric");
  }

  double max_offdiag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      max_offdiag = std::max(max_offdiag, std::abs(reduced_laplacian(i, j)));
    }
  }
  const double cut = kEdgeCut * max_offdiag;

  std::vector<Edge> edges;
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double entry = reduced_laplacian(i, j);
      if (entry > cut) {
        throw std::invalid_argument(
            "positive off-diagonal entry at (" + std::to_string(i + 1) + ", " +
            std::to_string(j + 1) + "); matrix is not a weighted Laplacian");
      }
      if (-entry > cut) {
        edges.push_back({static_cast<int>(i + 1), static_cast<int>(j + 1)});
        weights.push_back(-entry);
      }
    }
  }

  Eigen::VectorXd weight_vec(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weight_vec[static_cast<Eigen::Index>(k)] = weights[k];
  }
  WeightedGraph out{DirectedGraph(static_cast<int>(n), std::move(edges)),
                    std::move(weight_vec)};
  if (!out.graph.is_connected()) {
    throw NumericError(
        "reduced Laplacian is not realizable as a connected graph");
  }
  const Eigen::MatrixXd rebuilt =
      out.weights.size() > 0
          ? weighted_laplacian(build_incidence(out.graph), out.weights)
          : Eigen::MatrixXd::Zero(n, n);
  const double residual = (rebuilt - reduced_laplacian).cwiseAbs().maxCoeff();
  if (residual > std::max(1e-10, 1e-12 * scale * static_cast<double>(n))) {
    throw NumericError("reduced graph reconstruction residual " +
                       std::to_string(residual) + " exceeds tolerance");
  }
  return out;
}

ReducedNetwork kron_reduce(const GeneralizedNetwork& net, double rtol) {
  HomogeneousForm form = homogeneous_form(net, rtol);

  const Eigen::MatrixXd incidence = build_incidence(net.graph);
  const Eigen::MatrixXd laplacian =
      weighted_laplacian(incidence, form.edge_weight);
  const Eigen::MatrixXd schur = schur_complement(laplacian, net.partition);

  WeightedGraph reduced = laplacian_to_graph(schur);
  const int reduced_edges = reduced.graph.edge_count();

  std::vector<Eigen::VectorXd> p_hat(reduced_edges, form.p_tilde);
  std::vector<Eigen::VectorXd> q_hat;
  q_hat.reserve(reduced_edges);
  for (int k = 0; k < reduced_edges; ++k) {
    q_hat.push_back(reduced.weights[k] * form.q_tilde);
  }

  const int nb = static_cast<int>(net.partition.boundary().size());
  std::vector<int> all_boundary(nb);
  for (int v = 1; v <= nb; ++v) {
    all_boundary[v - 1] = v;
  }

  ReducedNetwork out{
      GeneralizedNetwork{reduced.graph, VertexPartition(nb, all_boundary),
                         net.nu, std::move(p_hat), std::move(q_hat)},
      net.partition.boundary(),
      reduced.weights,
      schur,
      std::move(form),
      0.0};
  const Eigen::MatrixXd rebuilt =
      reduced_edges > 0
          ? weighted_laplacian(build_incidence(out.network.graph),
                               out.gamma_hat)
          : Eigen::MatrixXd::Zero(nb, nb);
  out.reconstruction_residual = (rebuilt - schur).cwiseAbs().maxCoeff();
  return out;
}

Eigen::MatrixXd injection_map(const GeneralizedNetwork& net, double rtol) {
  const HomogeneousForm form = homogeneous_form(net, rtol);
  if (net.partition.internal().empty()) {
    throw std::invalid_argument(
        "injection map requires at least one internal vertex");
  }
  const auto [bb, bi] = split_rows(build_incidence(net.graph), net.partition);
  const Eigen::MatrixXd lib = bi * form.edge_weight.asDiagonal() * bb.transpose();
  const Eigen::MatrixXd lii = bi * form.edge_weight.asDiagonal() * bi.transpose();
  const auto llt = factor_internal_block(lii);
  // Current injected internally divides among the terminals; the divider
  // fractions are -L_bi L_ii^{-1}, whose columns sum to one by KCL.
  return -llt.solve(lib).transpose();
}

}  // namespace kronred
