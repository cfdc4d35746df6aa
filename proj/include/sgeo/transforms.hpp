#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgeo/simplex.hpp"

namespace sgeo {

/// Isometric log-ratio coordinates of a p-part composition (p - 1 values).
class IlrCoordinates {
 public:
  explicit IlrCoordinates(std::vector<double> coords);

  std::size_t size() const { return coords_.size(); }
  /// Part count of the composition these coordinates describe.
  std::size_t parts() const { return coords_.size() + 1; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }

 private:
  std::vector<double> coords_;
};

/// u_i = [i(i+1)]^{-1/2} ln(x_1 ... x_i / x_{i+1}^i), i = 1..p-1.
IlrCoordinates ilr(const Composition& x);
Composition ilr_inv(const IlrCoordinates& u);

/// Interval with optionally open ends; infinite bounds are open.
struct Interval {
  double lo;
  double hi;
  bool lo_closed;
  bool hi_closed;

  bool contains(double x) const;
  std::string describe() const;
};

/// Strictly monotone, continuous generating function of a quasi-arithmetic
/// mean, together with its inverse.
class GeneratingFunction {
 public:
  enum class Kind { identity, log, reciprocal, power, symmetric_sine };

  static GeneratingFunction identity();
  static GeneratingFunction log();
  static GeneratingFunction reciprocal();
  /// x^alpha, alpha != 0. Domain [0, inf) for alpha > 0, (0, inf) otherwise.
  static GeneratingFunction power(double alpha);
  /// t + a sin(2 pi t) on [0, 1], |a| < 1/(2 pi). Satisfies phi(1 - t) = 1 - phi(t).
  static GeneratingFunction symmetric_sine(double a);

  /// Parses "identity", "log", "reciprocal", "power:<alpha>", "sine:<a>".
  static GeneratingFunction parse(std::string_view text);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  std::string describe() const;

  Interval domain() const;
  Interval range() const;

  double operator()(double x) const;
  double inverse(double y) const;

 private:
  GeneratingFunction(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_;
  double param_;
};

/// phi^{-1}(sum_i w_i phi(x_i)) with weights summing to one.
double quasi_arithmetic_mean(std::span<const double> values, std::span<const double> weights,
                             const GeneratingFunction& phi);

}  // namespace sgeo
