#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kronred/graph.hpp"

namespace kronred {

/// Default relative tolerance for the numerical rank-1 test.
inline constexpr double kDefaultRank1Rtol = 1e-9;

/// An electrical network whose edges obey linear differential constitutive
/// relations: for edge k,
///   sum_j p[k][j] d^j/dt^j I_k = sum_j q[k][j] d^j/dt^j V_k,
/// with nonnegative coefficient vectors of length nu+1.
struct GeneralizedNetwork {
  DirectedGraph graph;
  VertexPartition partition;
  int nu = 0;
  std::vector<Eigen::VectorXd> p;  // current-side coefficients, one per edge
  std::vector<Eigen::VectorXd> q;  // voltage-side coefficients, one per edge
};

bool operator==(const GeneralizedNetwork& a, const GeneralizedNetwork& b);

/// Checks all structural invariants and returns one message per violation.
/// An empty report means the network is valid. Never throws.
std::vector<std::string> validate(const GeneralizedNetwork& net);

struct Rank1Decomposition {
  Eigen::VectorXd basis;   // nonnegative, largest entry normalized to 1
  Eigen::VectorXd scales;  // strictly positive, vector_k = scales[k] * basis
};

struct Rank1Analysis {
  std::optional<Rank1Decomposition> decomposition;
  double singular_ratio = 0.0;  // sigma_2 / sigma_1 of the stacked vectors
};

/// Numerical rank-1 test on a family of nonnegative nonzero vectors: passes
/// when the second singular value is at most rtol times the first.
Rank1Analysis analyze_rank1(const std::vector<Eigen::VectorXd>& vectors,
                            double rtol);

std::optional<Rank1Decomposition> rank1_check(
    const std::vector<Eigen::VectorXd>& vectors, double rtol);

/// Shared-basis normal form: p_k = lambda_k * p_tilde, q_k = gamma_k * q_tilde,
/// and edge_weight[k] = gamma_k / lambda_k (the diagonal weight used when the
/// network is reduced).
struct HomogeneousForm {
  Eigen::VectorXd p_tilde;
  Eigen::VectorXd q_tilde;
  Eigen::VectorXd lambda;
  Eigen::VectorXd gamma;
  Eigen::VectorXd edge_weight;
};

/// Raised when a network's coefficient families are not collinear, so the
/// reduction construction does not apply.
class NotReducibleError : public std::runtime_error {
 public:
  enum class Side { Current, Voltage };  // p family vs q family

  NotReducibleError(Side side, double singular_ratio);

  Side side() const noexcept { return side_; }
  double singular_ratio() const noexcept { return singular_ratio_; }

 private:
  Side side_;
  double singular_ratio_;
};

/// Extracts the homogeneous form; throws NotReducibleError when either
/// coefficient family has numerical rank above one.
HomogeneousForm homogeneous_form(const GeneralizedNetwork& net,
                                 double rtol = kDefaultRank1Rtol);

/// True iff homogeneous_form succeeds.
bool is_homogeneous(const GeneralizedNetwork& net,
                    double rtol = kDefaultRank1Rtol);

enum class ElementKind { Resistor, Inductor, Capacitor, SeriesRL, SeriesRLC };

struct ElementCoefficients {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
};

/// Coefficient pair for a standard circuit element, zero-padded to length
/// nu+1. Values are positional: {r}, {l}, {c}, {r, l} or {r, l, c}. The
/// series RLC relation is differentiated once so it fits the same form.
ElementCoefficients element(ElementKind kind, std::span<const double> values,
                            int nu);

inline ElementCoefficients element(ElementKind kind,
                                   std::initializer_list<double> values,
                                   int nu) {
  return element(kind, std::span<const double>(values.begin(), values.size()),
                 nu);
}

}  // namespace kronred
