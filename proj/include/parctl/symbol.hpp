#pragma once

#include <memory>
#include <string>

namespace parctl {

/// Scalar symbol lambda -> g(lambda) on (-inf, 0], built from constants,
/// lambda, 1/lambda, exponentials e^{a lambda} (a >= 0), segment integrals and
/// the arithmetic combinations +, -, *, /.
///
/// Evaluation is in long double. For |lambda| < 1e-6 the expression is
/// expanded as a truncated Laurent series about 0, so removable singularities
/// such as (e^{a lambda} - 1)/lambda evaluate to their limits.
class SymbolExpr {
 public:
  struct Node;

  static SymbolExpr constant(long double c);
  static SymbolExpr lambda();
  static SymbolExpr reciprocal();
  static SymbolExpr exp(long double a);
  /// lambda -> int_a^b e^{scale t lambda} dt, evaluated via expm1.
  static SymbolExpr segment_integral(long double a, long double b, long double scale);

  long double operator()(long double lambda) const;

  /// Canonical text form (full precision); equal strings mean equal symbols.
  const std::string& key() const;

  friend SymbolExpr operator+(const SymbolExpr& x, const SymbolExpr& y);
  friend SymbolExpr operator-(const SymbolExpr& x, const SymbolExpr& y);
  friend SymbolExpr operator*(const SymbolExpr& x, const SymbolExpr& y);
  friend SymbolExpr operator/(const SymbolExpr& x, const SymbolExpr& y);
  friend SymbolExpr operator*(long double c, const SymbolExpr& x) { return constant(c) * x; }
  friend SymbolExpr operator+(long double c, const SymbolExpr& x) { return constant(c) + x; }

  const Node& node() const { return *node_; }

 private:
  explicit SymbolExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// lambda -> (e^{scale b lambda} - e^{scale a lambda}) / (scale lambda), with limit b - a at 0.
SymbolExpr symbol_segment_integral(double a, double b, double scale);

}  // namespace parctl
