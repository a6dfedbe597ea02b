#include "kronred/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace kronred {

struct Signal::Node {
  virtual ~Node() = default;
  virtual double derivative(int order, double t) const = 0;
  virtual double max_angular_frequency() const { return 0.0; }
};

namespace {

using NodePtr = std::shared_ptr<const Signal::Node>;

struct ConstantNode final : Signal::Node {
  explicit ConstantNode(double v) : value(v) {}
  double derivative(int order, double) const override {
    return order == 0 ? value : 0.0;
  }
  double value;
};

struct PolynomialNode final : Signal::Node {
  explicit PolynomialNode(std::vector<double> c) : coefficients(std::move(c)) {}
  double derivative(int order, double t) const override {
    // Horner evaluation of the order-th derivative's coefficients.
    const int degree = static_cast<int>(coefficients.size()) - 1;
    if (order > degree) {
      return 0.0;
    }
    double result = 0.0;
    for (int j = degree; j >= order; --j) {
      double falling = 1.0;
      for (int i = 0; i < order; ++i) {
        falling *= static_cast<double>(j - i);
      }
      result = result * t + coefficients[static_cast<std::size_t>(j)] * falling;
    }
    return result;
  }
  std::vector<double> coefficients;
};

struct SinusoidNode final : Signal::Node {
  SinusoidNode(double a, double w, double ph)
      : amplitude(a), omega(w), phase(ph) {}
  double derivative(int order, double t) const override {
    // d^n/dt^n A sin(wt + p) = A w^n sin(wt + p + n pi/2)
    const double shift = static_cast<double>(order) * M_PI / 2.0;
    return amplitude * std::pow(omega, order) *
           std::sin(omega * t + phase + shift);
  }
  double max_angular_frequency() const override { return std::abs(omega); }
  double amplitude, omega, phase;
};

struct ExponentialNode final : Signal::Node {
  ExponentialNode(double a, double r) : amplitude(a), rate(r) {}
  double derivative(int order, double t) const override {
    return amplitude * std::pow(rate, order) * std::exp(rate * t);
  }
  double amplitude, rate;
};

struct SumNode final : Signal::Node {
  SumNode(NodePtr a, NodePtr b) : left(std::move(a)), right(std::move(b)) {}
  double derivative(int order, double t) const override {
    return left->derivative(order, t) + right->derivative(order, t);
  }
  double max_angular_frequency() const override {
    return std::max(left->max_angular_frequency(),
                    right->max_angular_frequency());
  }
  NodePtr left, right;
};

struct ProductNode final : Signal::Node {
  ProductNode(NodePtr a, NodePtr b) : left(std::move(a)), right(std::move(b)) {}
  double derivative(int order, double t) const override {
    // Leibniz rule: (fg)^(n) = sum_k C(n,k) f^(k) g^(n-k)
    double result = 0.0;
    double binomial = 1.0;
    for (int k = 0; k <= order; ++k) {
      result += binomial * left->derivative(k, t) *
                right->derivative(order - k, t);
      binomial = binomial * static_cast<double>(order - k) /
                 static_cast<double>(k + 1);
    }
    return result;
  }
  double max_angular_frequency() const override {
    return std::max(left->max_angular_frequency(),
                    right->max_angular_frequency());
  }
  NodePtr left, right;
};

struct ScaleNode final : Signal::Node {
  ScaleNode(double f, NodePtr c) : factor(f), child(std::move(c)) {}
  double derivative(int order, double t) const override {
    return factor * child->derivative(order, t);
  }
  double max_angular_frequency() const override {
    return child->max_angular_frequency();
  }
  double factor;
  NodePtr child;
};

}  // namespace

Signal::Signal() : node_(std::make_shared<ConstantNode>(0.0)) {}

Signal::Signal(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

double Signal::derivative(int order, double t) const {
  if (order < 0) {
    throw std::invalid_argument("derivative order must be nonnegative");
  }
  return node_->derivative(order, t);
}

double Signal::max_angular_frequency() const {
  return node_->max_angular_frequency();
}

Signal Signal::constant(double value) {
  return Signal(std::make_shared<ConstantNode>(value));
}

Signal Signal::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) {
    throw std::invalid_argument("polynomial requires at least one coefficient");
  }
  return Signal(std::make_shared<PolynomialNode>(std::move(coefficients)));
}

Signal Signal::sinusoid(double amplitude, double angular_frequency,
                        double phase) {
  return Signal(
      std::make_shared<SinusoidNode>(amplitude, angular_frequency, phase));
}

Signal Signal::exponential(double amplitude, double rate) {
  return Signal(std::make_shared<ExponentialNode>(amplitude, rate));
}

Signal operator+(const Signal& a, const Signal& b) {
  return Signal(std::make_shared<SumNode>(a.node_, b.node_));
}

Signal operator*(const Signal& a, const Signal& b) {
  return Signal(std::make_shared<ProductNode>(a.node_, b.node_));
}

Signal operator*(double factor, const Signal& s) {
  return Signal(std::make_shared<ScaleNode>(factor, s.node_));
}

Signal linear_combination(std::span<const double> coefficients,
                          std::span<const Signal> signals) {
  if (coefficients.size() != signals.size()) {
    throw std::invalid_argument(
        "linear combination requires matching coefficient and signal counts");
  }
  Signal result;
  for (std::size_t k = 0; k < signals.size(); ++k) {
    if (coefficients[k] == 0.0) {
      continue;
    }
    result = result + coefficients[k] * signals[k];
  }
  return result;
}

}  // namespace kronred
