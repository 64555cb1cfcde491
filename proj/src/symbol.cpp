#include "parctl/symbol.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

constexpr long double kSeriesRadius = 1e-6L;
constexpr int kTerms = 8;

// sum_k c[k] lambda^(val + k), truncated after kTerms coefficients
struct Laurent {
  int val = 0;
  std::array<long double, kTerms> c{};

  bool is_zero() const {
    for (long double x : c)
      if (x != 0) return false;
    return true;
  }

  // shift leading exact zeros into the valuation
  void normalize() {
    if (is_zero()) {
      val = 0;
      return;
    }
    while (c[0] == 0) {
      for (int k = 0; k + 1 < kTerms; ++k) c[k] = c[k + 1];
      c[kTerms - 1] = 0;
      ++val;
    }
  }

  long double at(long double x) const {
    long double s = 0;
    for (int k = kTerms - 1; k >= 0; --k) s = s * x + c[k];
    return s * std::pow(x, static_cast<long double>(val));
  }
};

Laurent add(const Laurent& a, const Laurent& b, long double sign) {
  if (a.is_zero()) {
    Laurent r = b;
    for (auto& x : r.c) x *= sign;
    return r;
  }
  if (b.is_zero()) return a;
  Laurent r;
  r.val = std::min(a.val, b.val);
  for (int k = 0; k < kTerms; ++k) {
    const int ia = k + r.val - a.val;
    const int ib = k + r.val - b.val;
    if (ia >= 0 && ia < kTerms) r.c[k] += a.c[ia];
    if (ib >= 0 && ib < kTerms) r.c[k] += sign * b.c[ib];
  }
  r.normalize();
  return r;
}

Laurent mul(const Laurent& a, const Laurent& b) {
  Laurent r;
  r.val = a.val + b.val;
  for (int i = 0; i < kTerms; ++i)
    for (int j = 0; i + j < kTerms; ++j) r.c[i + j] += a.c[i] * b.c[j];
  r.normalize();
  return r;
}

Laurent div(const Laurent& a, Laurent b) {
  b.normalize();
  if (b.is_zero()) {
    Laurent inf;
    inf.c[0] = std::numeric_limits<long double>::infinity();
    return inf;
  }
  Laurent r;
  r.val = a.val - b.val;
  for (int k = 0; k < kTerms; ++k) {
    long double s = a.c[k];
    for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
    r.c[k] = s / b.c[0];
  }
  r.normalize();
  return r;
}

std::string fmt(long double x) {
  std::ostringstream os;
  os.precision(21);
  os << x;
  return os.str();
}

}  // namespace

struct SymbolExpr::Node {
  enum class Kind { constant, lambda, reciprocal, exp, segment, sum, difference, product, quotient };
  Kind kind;
  long double p0 = 0, p1 = 0, p2 = 0;
  std::shared_ptr<const Node> lhs, rhs;
  std::string key;

  long double eval(long double x) const {
    switch (kind) {
      case Kind::constant: return p0;
      case Kind::lambda: return x;
      case Kind::reciprocal: return 1.0L / x;
      case Kind::exp: return std::exp(p0 * x);
      case Kind::segment: {
        const long double a = p0, b = p1, s = p2;
        if (x == 0) return b - a;
        return std::exp(s * a * x) * std::expm1(s * (b - a) * x) / (s * x);
      }
      case Kind::sum: return lhs->eval(x) + rhs->eval(x);
      case Kind::difference: return lhs->eval(x) - rhs->eval(x);
      case Kind::product: return lhs->eval(x) * rhs->eval(x);
      case Kind::quotient: return lhs->eval(x) / rhs->eval(x);
    }
    return std::numeric_limits<long double>::quiet_NaN();
  }

  Laurent series() const {
    Laurent r;
    switch (kind) {
      case Kind::constant: r.c[0] = p0; r.normalize(); return r;
      case Kind::lambda: r.val = 1; r.c[0] = 1; return r;
      case Kind::reciprocal: r.val = -1; r.c[0] = 1; return r;
      case Kind::exp: {
        long double term = 1;
        for (int k = 0; k < kTerms; ++k) {
          r.c[k] = term;
          term *= p0 / (k + 1);
        }
        r.normalize();
        return r;
      }
      case Kind::segment: {
        // int_a^b (s t)^k / k! dt = s^k (b^{k+1} - a^{k+1}) / (k+1)!
        const long double a = p0, b = p1, s = p2;
        long double sk = 1, fact = 1, ak = a, bk = b;
        for (int k = 0; k < kTerms; ++k) {
          fact *= (k + 1);
          r.c[k] = sk * (bk - ak) / fact;
          sk *= s;
          ak *= a;
          bk *= b;
        }
        r.normalize();
        return r;
      }
      case Kind::sum: return add(lhs->series(), rhs->series(), 1);
      case Kind::difference: return add(lhs->series(), rhs->series(), -1);
      case Kind::product: return mul(lhs->series(), rhs->series());
      case Kind::quotient: return div(lhs->series(), rhs->series());
    }
    return r;
  }
};

namespace {

using Node = SymbolExpr::Node;

std::shared_ptr<const Node> leaf(Node::Kind kind, long double p0, long double p1, long double p2, std::string key) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->p0 = p0;
  n->p1 = p1;
  n->p2 = p2;
  n->key = std::move(key);
  return n;
}

std::shared_ptr<const Node> binary(Node::Kind kind, const Node& a, const Node& b, const char* op,
                                   std::shared_ptr<const Node> pa, std::shared_ptr<const Node> pb) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(pa);
  n->rhs = std::move(pb);
  n->key = "(" + a.key + op + b.key + ")";
  return n;
}

}  // namespace

SymbolExpr SymbolExpr::constant(long double c) {
  if (!std::isfinite(c)) throw InvalidArgument("SymbolExpr::constant: non-finite value");
  return SymbolExpr(leaf(Node::Kind::constant, c, 0, 0, fmt(c)));
}

SymbolExpr SymbolExpr::lambda() { return SymbolExpr(leaf(Node::Kind::lambda, 0, 0, 0, "L")); }

SymbolExpr SymbolExpr::reciprocal() { return SymbolExpr(leaf(Node::Kind::reciprocal, 0, 0, 0, "(1/L)")); }

SymbolExpr SymbolExpr::exp(long double a) {
  if (!(a >= 0)) throw InvalidArgument("SymbolExpr::exp: rate must be >= 0 so that e^{a lambda} <= 1");
  return SymbolExpr(leaf(Node::Kind::exp, a, 0, 0, "exp(" + fmt(a) + "L)"));
}

SymbolExpr SymbolExpr::segment_integral(long double a, long double b, long double scale) {
  if (!(a >= 0) || !(b > a)) throw InvalidArgument("segment_integral: need 0 <= a < b");
  if (!(scale > 0)) throw InvalidArgument("segment_integral: scale must be positive");
  return SymbolExpr(leaf(Node::Kind::segment, a, b, scale,
                         "seg(" + fmt(a) + "," + fmt(b) + "," + fmt(scale) + ")"));
}

long double SymbolExpr::operator()(long double lambda) const {
  if (std::abs(lambda) < kSeriesRadius) {
    const Laurent s = node_->series();
    if (s.val < 0 && !s.is_zero()) return std::numeric_limits<long double>::infinity();
    return s.at(lambda);
  }
  return node_->eval(lambda);
}

const std::string& SymbolExpr::key() const { return node_->key; }

SymbolExpr operator+(const SymbolExpr& x, const SymbolExpr& y) {
  return SymbolExpr(binary(Node::Kind::sum, *x.node_, *y.node_, "+", x.node_, y.node_));
}
SymbolExpr operator-(const SymbolExpr& x, const SymbolExpr& y) {
  return SymbolExpr(binary(Node::Kind::difference, *x.node_, *y.node_, "-", x.node_, y.node_));
}
SymbolExpr operator*(const SymbolExpr& x, const SymbolExpr& y) {
  return SymbolExpr(binary(Node::Kind::product, *x.node_, *y.node_, "*", x.node_, y.node_));
}
SymbolExpr operator/(const SymbolExpr& x, const SymbolExpr& y) {
  return SymbolExpr(binary(Node::Kind::quotient, *x.node_, *y.node_, "/", x.node_, y.node_));
}

SymbolExpr symbol_segment_integral(double a, double b, double scale) {
  return SymbolExpr::segment_integral(a, b, scale);
}

}  // namespace parctl
