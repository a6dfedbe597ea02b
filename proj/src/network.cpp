#include "kronred/network.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace kronred {

namespace {

std::string side_name(NotReducibleError::Side side) {
  return side == NotReducibleError::Side::Current ? "current" : "voltage";
}

}  // namespace

NotReducibleError::NotReducibleError(Side side, double singular_ratio)
    : std::runtime_error("network is not reducible: " + side_name(side) +
                         "-side coefficient vectors span rank >= 2 "
                         "(second singular ratio " +
                         std::to_string(singular_ratio) + ")"),
      side_(side),
      singular_ratio_(singular_ratio) {}

bool operator==(const GeneralizedNetwork& a, const GeneralizedNetwork& b) {
  if (!(a.graph == b.graph) || !(a.partition == b.partition) || a.nu != b.nu ||
      a.p.size() != b.p.size() || a.q.size() != b.q.size()) {
    return false;
  }
  const auto equal = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return x.size() == y.size() && (x.array() == y.array()).all();
  };
  for (std::size_t k = 0; k < a.p.size(); ++k) {
    if (!equal(a.p[k], b.p[k]) || !equal(a.q[k], b.q[k])) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> validate(const GeneralizedNetwork& net) {
  std::vector<std::string> issues;
  const int e = net.graph.edge_count();

  if (net.partition.vertex_count() != net.graph.vertex_count()) {
    issues.push_back("partition covers " +
                     std::to_string(net.partition.vertex_count()) +
                     " vertices but the graph has " +
                     std::to_string(net.graph.vertex_count()));
  }
  if (net.nu < 0) {
    issues.push_back("differentiation order nu must be nonnegative");
  }
  if (static_cast<int>(net.p.size()) != e ||
      static_cast<int>(net.q.size()) != e) {
    issues.push_back("coefficient list sizes (" + std::to_string(net.p.size()) +
                     ", " + std::to_string(net.q.size()) +
                     ") do not match edge count " + std::to_string(e));
    return issues;  // per-edge checks below would index out of range
  }

  for (int k = 0; k < e; ++k) {
    const auto check = [&](const Eigen::VectorXd& vec, const char* role,
                           const char* zero_label) {
      if (vec.size() != net.nu + 1) {
        issues.push_back("edge " + std::to_string(k + 1) + ": " + role +
                         " coefficient vector has length " +
                         std::to_string(vec.size()) + ", expected " +
                         std::to_string(net.nu + 1));
        return;
      }
      if ((vec.array() < 0.0).any()) {
        issues.push_back("edge " + std::to_string(k + 1) + ": " + role +
                         " coefficient vector has a negative coefficient");
      }
      if (vec.size() > 0 && vec.cwiseAbs().maxCoeff() == 0.0) {
        issues.push_back(std::string(zero_label) + " edge " +
                         std::to_string(k + 1) + ": " + role +
                         " coefficient vector is zero");
      }
    };
    check(net.p[k], "current", "short-circuit");
    check(net.q[k], "voltage", "open-circuit");
  }

  if (!net.graph.is_connected()) {
    issues.push_back("graph is disconnected");
  }
  return issues;
}

Rank1Analysis analyze_rank1(const std::vector<Eigen::VectorXd>& vectors,
                            double rtol) {
  if (vectors.empty()) {
    throw std::invalid_argument("rank-1 test requires at least one vector");
  }
  const Eigen::Index dim = vectors.front().size();
  Eigen::MatrixXd stacked(dim, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != dim) {
      throw std::invalid_argument("rank-1 test requires equal-length vectors");
    }
    stacked.col(static_cast<Eigen::Index>(k)) = vectors[k];
  }
  if (stacked.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("rank-1 test requires nonzero vectors");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();

  Rank1Analysis analysis;
  analysis.singular_ratio = sigma.size() > 1 ? sigma[1] / sigma[0] : 0.0;
  if (analysis.singular_ratio > rtol) {
    return analysis;
  }

  Eigen::VectorXd basis = svd.matrixU().col(0);
  // The dominant direction of a nonnegative family is nonnegative up to a
  // global sign; fix the sign and clear roundoff-scale negatives.
  Eigen::Index max_index = 0;
  basis.cwiseAbs().maxCoeff(&max_index);
  if (basis[max_index] < 0.0) {
    basis = -basis;
  }
  basis = basis.cwiseMax(0.0);
  basis /= basis[max_index];

  const double basis_dot = basis.squaredNorm();
  Eigen::VectorXd scales(static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const double scale = vectors[k].dot(basis) / basis_dot;
    const double residual = (vectors[k] - scale * basis).cwiseAbs().maxCoeff();
    const double magnitude = vectors[k].cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || residual > rtol * std::max(magnitude, 1e-300)) {
      return analysis;  // collinearity failed the per-vector residual check
    }
    scales[static_cast<Eigen::Index>(k)] = scale;
  }
  analysis.decomposition = Rank1Decomposition{std::move(basis),
                                              std::move(scales)};
  return analysis;
}

std::optional<Rank1Decomposition> rank1_check(
    const std::vector<Eigen::VectorXd>& vectors, double rtol) {
  return analyze_rank1(vectors, rtol).decomposition;
}

HomogeneousForm homogeneous_form(const GeneralizedNetwork& net, double rtol) {
  const auto issues = validate(net);
  if (!issues.empty()) {
    std::ostringstream msg;
    msg << "invalid network:";
    for (const auto& issue : issues) {
      msg << " [" << issue << "]";
    }
    throw std::invalid_argument(msg.str());
  }

  Rank1Analysis current = analyze_rank1(net.p, rtol);
  if (!current.decomposition) {
    throw NotReducibleError(NotReducibleError::Side::Current,
                            current.singular_ratio);
  }
  Rank1Analysis voltage = analyze_rank1(net.q, rtol);
  if (!voltage.decomposition) {
    throw NotReducibleError(NotReducibleError::Side::Voltage,
                            voltage.singular_ratio);
  }

  HomogeneousForm form;
  form.p_tilde = std::move(current.decomposition->basis);
  form.q_tilde = std::move(voltage.decomposition->basis);
  form.lambda = std::move(current.decomposition->scales);
  form.gamma = std::move(voltage.decomposition->scales);
  form.edge_weight = form.gamma.cwiseQuotient(form.lambda);
  return form;
}

bool is_homogeneous(const GeneralizedNetwork& net, double rtol) {
  if (!validate(net).empty()) {
    return false;
  }
  if (!analyze_rank1(net.p, rtol).decomposition) {
    return false;
  }
  return analyze_rank1(net.q, rtol).decomposition.has_value();
}

ElementCoefficients element(ElementKind kind, std::span<const double> values,
                            int nu) {
  const auto require = [&](std::size_t count, int min_nu, const char* name) {
    if (values.size() != count) {
      throw std::invalid_argument(std::string(name) + " element takes " +
                                  std::to_string(count) + " value(s), got " +
                                  std::to_string(values.size()));
    }
    for (double v : values) {
      if (!(v > 0.0)) {
        throw std::invalid_argument(std::string(name) +
                                    " element values must be strictly positive");
      }
    }
    if (nu < min_nu) {
      throw std::invalid_argument(std::string(name) + " element requires nu >= " +
                                  std::to_string(min_nu) + ", got " +
                                  std::to_string(nu));
    }
  };

  ElementCoefficients out;
  out.p = Eigen::VectorXd::Zero(nu + 1);
  out.q = Eigen::VectorXd::Zero(nu + 1);
  switch (kind) {
    case ElementKind::Resistor:  // r I = V
      require(1, 0, "resistor");
      out.p[0] = values[0];
      out.q[0] = 1.0;
      break;
    case ElementKind::Inductor:  // l dI/dt = V
      require(1, 1, "inductor");
      out.p[1] = values[0];
      out.q[0] = 1.0;
      break;
    case ElementKind::Capacitor:  // I = c dV/dt
      require(1, 1, "capacitor");
      out.p[0] = 1.0;
      out.q[1] = values[0];
      break;
    case ElementKind::SeriesRL:  // r I + l dI/dt = V
      require(2, 1, "series RL");
      out.p[0] = values[0];
      out.p[1] = values[1];
      out.q[0] = 1.0;
      break;
    case ElementKind::SeriesRLC:
      // I/c + r dI/dt + l d2I/dt2 = dV/dt (series relation differentiated
      // once to clear the integral of the capacitor term).
      require(3, 2, "series RLC");
      out.p[0] = 1.0 / values[2];
      out.p[1] = values[0];
      out.p[2] = values[1];
      out.q[1] = 1.0;
      break;
  }
  return out;
}

}  // namespace kronred
