#pragma once

#include <memory>
#include <span>
#include <vector>

namespace kronred {

/// A closed-form smooth scalar function of time built from constants,
/// polynomials, sinusoids, exponentials, and finite sums/products of these.
/// Derivatives of any order are evaluated exactly from the expression tree,
/// never by finite differencing. Immutable; cheap to copy.
class Signal {
 public:
  /// The zero signal.
  Signal();

  double value(double t) const { return derivative(0, t); }
  double derivative(int order, double t) const;

  /// Largest angular frequency of any sinusoid in the tree (0 if none);
  /// used for sampling-adequacy warnings.
  double max_angular_frequency() const;

  static Signal constant(double value);
  /// coefficients[j] multiplies t^j.
  static Signal polynomial(std::vector<double> coefficients);
  /// amplitude * sin(angular_frequency * t + phase).
  static Signal sinusoid(double amplitude, double angular_frequency,
                         double phase = 0.0);
  /// amplitude * exp(rate * t).
  static Signal exponential(double amplitude, double rate);

  friend Signal operator+(const Signal& a, const Signal& b);
  friend Signal operator*(const Signal& a, const Signal& b);
  friend Signal operator*(double factor, const Signal& s);

  struct Node;

 private:
  explicit Signal(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

inline Signal operator*(const Signal& s, double factor) { return factor * s; }
inline Signal operator-(const Signal& a, const Signal& b) {
  return a + (-1.0 * b);
}

/// sum_k coefficients[k] * signals[k]; signals are closed under linear
/// combination.
Signal linear_combination(std::span<const double> coefficients,
                          std::span<const Signal> signals);

}  // namespace kronred
