#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "kronred/graph.hpp"
#include "kronred/network.hpp"

namespace kronred {

/// Raised when a linear-algebra step breaks down numerically (singular
/// internal block, unrealizable reduced Laplacian, pole evaluation).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// L_bb - L_bi L_ii^{-1} L_ib over the boundary vertices (ascending id
/// order). With no internal vertices this is L itself. The internal block is
/// factored as SPD; a condition estimate below 1e-12 is reported as a
/// violated precondition upstream.
Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& laplacian,
                                 const VertexPartition& partition);

struct WeightedGraph {
  DirectedGraph graph;
  Eigen::VectorXd weights;
};

/// Reads a weighted graph back off a Laplacian: one edge per vertex pair
/// with a negative off-diagonal entry, weight equal to its magnitude, tail
/// at the smaller id. Entries below 1e-12 times the largest off-diagonal
/// magnitude are treated as absent edges.
WeightedGraph laplacian_to_graph(const Eigen::MatrixXd& reduced_laplacian);

/// Terminal-equivalent network on the boundary vertices alone.
struct ReducedNetwork {
  GeneralizedNetwork network;     // every vertex boundary, ids 1..|V_b|
  std::vector<int> boundary_ids;  // reduced id k (1-based) -> original id
  Eigen::VectorXd gamma_hat;      // weight per reduced edge
  Eigen::MatrixXd schur;          // reduced Laplacian the graph realizes
  HomogeneousForm form;           // shared basis of the original network
  double reconstruction_residual = 0.0;  // max-norm of B W B^T - schur
};

/// Full reduction pipeline: homogeneous form, weighted Laplacian, Schur
/// complement, graph reconstruction, reduced constitutive relations
/// (p_hat = p_tilde, q_hat_k = gamma_hat_k * q_tilde). With no internal
/// vertices the input is returned re-expressed in homogeneous form.
/// Throws NotReducibleError when the rank-1 condition fails.
ReducedNetwork kron_reduce(const GeneralizedNetwork& net,
                           double rtol = kDefaultRank1Rtol);

/// Matrix F mapping internal current injections to equivalent boundary
/// injections: column i gives the fraction of current injected at the i-th
/// internal vertex that exits through each boundary vertex. Every column
/// sums to one. Rows follow ascending boundary ids, columns ascending
/// internal ids.
Eigen::MatrixXd injection_map(const GeneralizedNetwork& net,
                              double rtol = kDefaultRank1Rtol);

}  // namespace kronred
