#include "sgeo/transforms.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sgeo/error.hpp"

namespace sgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_parameter(std::string_view text, std::string_view whole) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw DomainError("bad generating function parameter in '" + std::string(whole) + "'");
  }
  return v;
}

// Inverse of t + a sin(2 pi t) on [0, 1]: Newton steps kept inside a
// shrinking bisection bracket.
double invert_symmetric_sine(double a, double y) {
  const double two_pi = 2.0 * std::numbers::pi;
  double lo = 0.0, hi = 1.0;
  double t = y;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = t + a * std::sin(two_pi * t) - y;
    if (f == 0.0) return t;
    if (f > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    const double slope = 1.0 + two_pi * a * std::cos(two_pi * t);
    double next = t - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 || hi - lo <= 1e-14) return next;
    t = next;
  }
  return t;
}

}  // namespace

IlrCoordinates::IlrCoordinates(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw DomainError("ilr coordinates need at least one value");
  for (double v : coords_) {
    if (!std::isfinite(v)) throw DomainError("ilr coordinates must be finite");
  }
}

IlrCoordinates ilr(const Composition& x) {
  if (!x.strictly_positive()) throw DomainError("ilr: zero part, log-ratio undefined");
  const std::size_t p = x.size();
  std::vector<double> u(p - 1);
  double prefix = 0.0;  // ln x_1 + ... + ln x_i
  for (std::size_t i = 1; i < p; ++i) {
    prefix += std::log(x[i - 1]);
    const double fi = static_cast<double>(i);
    u[i - 1] = (prefix - fi * std::log(x[i])) / std::sqrt(fi * (fi + 1.0));
  }
  return IlrCoordinates(std::move(u));
}

Composition ilr_inv(const IlrCoordinates& u) {
  const std::size_t p = u.parts();
  // clr = sum_i u_i e_i with the orthonormal Helmert-type basis matching ilr().
  std::vector<double> clr(p, 0.0);
  for (std::size_t i = 1; i < p; ++i) {
    const double fi = static_cast<double>(i);
    const double scale = 1.0 / std::sqrt(fi * (fi + 1.0));
    for (std::size_t j = 0; j < i; ++j) clr[j] += u[i - 1] * scale;
    clr[i] -= u[i - 1] * fi * scale;
  }
  double top = clr[0];
  for (double c : clr) top = std::max(top, c);
  std::vector<double> e(p);
  for (std::size_t j = 0; j < p; ++j) e[j] = std::exp(clr[j] - top);
  return closure(e);
}

bool Interval::contains(double x) const {
  if (std::isnan(x)) return false;
  const bool above = lo_closed ? x >= lo : x > lo;
  const bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

std::string Interval::describe() const {
  std::ostringstream s;
  s << (lo_closed ? '[' : '(') << lo << ", " << hi << (hi_closed ? ']' : ')');
  return s.str();
}

GeneratingFunction GeneratingFunction::identity() { return {Kind::identity, 0.0}; }
GeneratingFunction GeneratingFunction::log() { return {Kind::log, 0.0}; }
GeneratingFunction GeneratingFunction::reciprocal() { return {Kind::reciprocal, 0.0}; }

GeneratingFunction GeneratingFunction::power(double alpha) {
  if (!(std::isfinite(alpha) && alpha != 0.0)) throw DomainError("power generating function needs alpha != 0");
  return {Kind::power, alpha};
}

GeneratingFunction GeneratingFunction::symmetric_sine(double a) {
  if (!(std::isfinite(a) && std::abs(a) < 1.0 / (2.0 * std::numbers::pi))) {
    throw DomainError("symmetric sine generating function needs |a| < 1/(2 pi)");
  }
  return {Kind::symmetric_sine, a};
}

GeneratingFunction GeneratingFunction::parse(std::string_view text) {
  if (text == "identity") return identity();
  if (text == "log") return log();
  if (text == "reciprocal") return reciprocal();
  if (text.starts_with("power:")) return power(parse_parameter(text.substr(6), text));
  if (text.starts_with("sine:")) return symmetric_sine(parse_parameter(text.substr(5), text));
  throw DomainError("unknown generating function '" + std::string(text) +
                    "' (identity, log, reciprocal, power:<alpha>, sine:<a>)");
}

std::string GeneratingFunction::describe() const {
  std::ostringstream s;
  s.precision(12);
  switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::log: return "log";
    case Kind::reciprocal: return "reciprocal";
    case Kind::power: s << "power:" << param_; return s.str();
    case Kind::symmetric_sine: s << "sine:" << param_; return s.str();
  }
  return "?";
}

Interval GeneratingFunction::domain() const {
  switch (kind_) {
    case Kind::identity: return {-kInf, kInf, false, false};
    case Kind::log:
    case Kind::reciprocal: return {0.0, kInf, false, false};
    case Kind::power: return {0.0, kInf, param_ > 0.0, false};
    case Kind::symmetric_sine: return {0.0, 1.0, true, true};
  }
  return {};
}

Interval GeneratingFunction::range() const {
  switch (kind_) {
    case Kind::identity:
    case Kind::log: return {-kInf, kInf, false, false};
    case Kind::reciprocal: return {0.0, kInf, false, false};
    case Kind::power: return {0.0, kInf, param_ > 0.0, false};
    case Kind::symmetric_sine: return {0.0, 1.0, true, true};
  }
  return {};
}

double GeneratingFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::identity: return x;
    case Kind::log: return std::log(x);
    case Kind::reciprocal: return 1.0 / x;
    case Kind::power: return std::pow(x, param_);
    case Kind::symmetric_sine: return x + param_ * std::sin(2.0 * std::numbers::pi * x);
  }
  return x;
}

double GeneratingFunction::inverse(double y) const {
  switch (kind_) {
    case Kind::identity: return y;
    case Kind::log: return std::exp(y);
    case Kind::reciprocal: return 1.0 / y;
    case Kind::power: return std::pow(y, 1.0 / param_);
    case Kind::symmetric_sine: return invert_symmetric_sine(param_, y);
  }
  return y;
}

double quasi_arithmetic_mean(std::span<const double> values, std::span<const double> weights,
                             const GeneratingFunction& phi) {
  if (values.empty()) throw DomainError("quasi-arithmetic mean of no values");
  if (values.size() != weights.size()) {
    std::ostringstream msg;
    msg << "quasi-arithmetic mean: " << values.size() << " values but " << weights.size() << " weights";
    throw DomainError(msg.str());
  }
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (std::abs(wsum - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(15);
    msg << "quasi-arithmetic mean: weights sum to " << wsum << ", not 1";
    throw DomainError(msg.str());
  }
  const Interval dom = phi.domain();
  double image = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!dom.contains(values[i])) {
      std::ostringstream msg;
      msg << "quasi-arithmetic mean: value " << i + 1 << " (" << values[i] << ") outside the domain "
          << dom.describe() << " of " << phi.describe();
      throw DomainError(msg.str());
    }
    image += weights[i] * phi(values[i]);
  }
  if (!phi.range().contains(image)) {
    std::ostringstream msg;
    msg << "quasi-arithmetic mean: weighted image " << image << " outside the range " << phi.range().describe()
        << " of " << phi.describe();
    throw DomainError(msg.str());
  }
  return phi.inverse(image);
}

}  // namespace sgeo
