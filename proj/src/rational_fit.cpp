// Adaptive barycentric (AAA) fitting in the Moebius coordinate, followed by
// conversion to partial fractions: poles from the barycentric pencil, spurious
// poles dropped, then residues and constant by real least squares in lambda.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "parctl/errors.hpp"
#include "parctl/rational.hpp"

namespace parctl {

namespace {

constexpr int kChebyshev = 2000;
constexpr int kLogSpaced = 200;

struct Grid {
  std::vector<long double> z;
  std::vector<long double> lambda;
  int n_norm = 0;  // leading points entering the norm estimate
};

const Grid& grid() {
  static const Grid g = [] {
    Grid out;
    const long double pi = std::numbers::pi_v<long double>;
    for (int k = 0; k < kChebyshev; ++k) out.z.push_back(std::cos((2 * k + 1) * pi / (2 * kChebyshev)));
    out.z.push_back(1);
    out.n_norm = static_cast<int>(out.z.size());
    for (int j = 0; j < kLogSpaced; ++j) {
      const long double e = -6 + 12.0L * (j + 1) / (kLogSpaced + 1);
      const long double lam = -std::pow(10.0L, e);
      out.z.push_back((lam + 9) / (9 - lam));
    }
    for (long double z : out.z) out.lambda.push_back(z == 1 ? 0.0L : 9 * (z - 1) / (z + 1));
    return out;
  }();
  return g;
}

using Complex = PartialFractionRational::Complex;
using LdMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

long double max_error(const PartialFractionRational& r, const std::vector<long double>& values) {
  const auto& lam = grid().lambda;
  long double err = 0;
  for (std::size_t i = 0; i < lam.size(); ++i) err = std::max(err, std::abs(r.real_value(lam[i]) - values[i]));
  return err;
}

// Real least squares for r0 and residues given poles (upper half-plane and real
// representatives); returns one rational per data column.
SetFitResult least_squares(const std::vector<Complex>& poles, const std::vector<std::vector<long double>>& values,
                           const std::vector<long double>& norms, double tol) {
  const auto& lam = grid().lambda;
  const int n = static_cast<int>(lam.size());
  int cols = 1;
  for (const Complex& p : poles) cols += p.imag() == 0 ? 1 : 2;
  LdMatrix a(n, cols);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1;
    int c = 1;
    for (const Complex& p : poles) {
      const Complex q = 1.0L / (Complex(lam[i], 0) - p);
      if (p.imag() == 0) {
        a(i, c++) = q.real();
      } else {
        a(i, c++) = 2 * q.real();
        a(i, c++) = -2 * q.imag();
      }
    }
  }
  Eigen::Matrix<long double, Eigen::Dynamic, 1> scale(cols);
  for (int c = 0; c < cols; ++c) {
    scale[c] = a.col(c).cwiseAbs().maxCoeff();
    if (scale[c] == 0) scale[c] = 1;
    a.col(c) /= scale[c];
  }
  LdMatrix rhs(n, static_cast<int>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k)
    for (int i = 0; i < n; ++i) rhs(i, static_cast<int>(k)) = values[k][i];
  const Eigen::ColPivHouseholderQR<LdMatrix> qr(a);
  const LdMatrix coef = qr.solve(rhs);

  SetFitResult out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto col = coef.col(static_cast<int>(k));
    std::vector<Complex> ps, rs;
    int c = 1;
    for (const Complex& p : poles) {
      if (p.imag() == 0) {
        ps.push_back(p);
        rs.emplace_back(col[c] / scale[c], 0);
        ++c;
      } else {
        const Complex res(col[c] / scale[c], col[c + 1] / scale[c + 1]);
        ps.push_back(p);
        rs.push_back(res);
        ps.push_back(std::conj(p));
        rs.push_back(std::conj(res));
        c += 2;
      }
    }
    PartialFractionRational r(col[0] / scale[0], std::move(ps), std::move(rs));
    FitReport rep;
    rep.degree = r.degree();
    rep.max_error = max_error(r, values[k]);
    rep.norm = norms[k];
    rep.tol = tol;
    rep.samples = n;
    rep.success = rep.max_error <= tol * norms[k];
    out.rationals.push_back(std::move(r));
    out.reports.push_back(rep);
  }
  return out;
}

long double worst_relative(const SetFitResult& r) {
  long double w = 0;
  for (const auto& rep : r.reports) w = std::max(w, rep.norm > 0 ? rep.max_error / rep.norm : rep.max_error);
  return w;
}

template <class S>
class Aaa {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using Cplx = std::complex<S>;

  Aaa(const std::vector<std::vector<long double>>& values, const std::vector<long double>& norms, double tol)
      : values_(values), norms_(norms), tol_(tol) {
    // training subset: every third Chebyshev point, lambda = 0, every other log-spaced point
    const Grid& g = grid();
    std::vector<int> train;
    for (int i = 0; i < g.n_norm - 1; i += 3) train.push_back(i);
    train.push_back(g.n_norm - 1);
    for (int i = g.n_norm; i < static_cast<int>(g.z.size()); i += 2) train.push_back(i);
    n_ = static_cast<int>(train.size());
    k_ = static_cast<int>(values.size());
    z_.resize(n_);
    f_.resize(n_, k_);
    for (int i = 0; i < n_; ++i) {
      z_[i] = static_cast<S>(g.z[train[i]]);
      for (int k = 0; k < k_; ++k) f_(i, k) = norms[k] > 0 ? static_cast<S>(values[k][train[i]] / norms[k]) : S(0);
    }
  }

  SetFitResult run(int max_degree) {
    std::vector<char> is_support(n_, 0);
    std::vector<int> support;
    Mat r = f_.colwise().mean().replicate(n_, 1);
    Vec w;
    SetFitResult best;
    long double best_err = std::numeric_limits<long double>::infinity();
    auto consider = [&](SetFitResult cand) {
      const long double e = worst_relative(cand);
      if (e < best_err) {
        best_err = e;
        best = std::move(cand);
      }
    };

    for (int m = 1; m <= max_degree + 1; ++m) {
      int j = -1;
      S err = -1;
      for (int i = 0; i < n_; ++i) {
        if (is_support[i]) continue;
        const S e = (f_.row(i) - r.row(i)).cwiseAbs().maxCoeff();
        if (e > err) {
          err = e;
          j = i;
        }
      }
      if (m == 1 && err <= tol_) {
        consider(least_squares({}, values_, norms_, tol_));
        if (best.success()) return best;
      }
      if (j < 0) break;
      support.push_back(j);
      is_support[j] = 1;
      w = weights(support, is_support);
      r = evaluate(support, is_support, w);
      S bary = 0;
      for (int i = 0; i < n_; ++i) bary = std::max(bary, (f_.row(i) - r.row(i)).cwiseAbs().maxCoeff());
      if (m >= 2 && (bary <= tol_ || m == max_degree + 1)) {
        consider(least_squares(poles(support, w), values_, norms_, tol_));
        if (best.success()) return best;
      }
    }
    if (best.rationals.empty()) consider(least_squares({}, values_, norms_, tol_));
    return best;
  }

 private:
  Vec weights(const std::vector<int>& support, const std::vector<char>& is_support) const {
    const int m = static_cast<int>(support.size());
    const int rest = n_ - m;
    Mat loewner(rest * k_, m);
    int row = 0;
    for (int i = 0; i < n_; ++i) {
      if (is_support[i]) continue;
      for (int s = 0; s < m; ++s) {
        const S c = S(1) / (z_[i] - z_[support[s]]);
        for (int k = 0; k < k_; ++k) loewner(k * rest + row, s) = (f_(i, k) - f_(support[s], k)) * c;
      }
      ++row;
    }
    Eigen::JacobiSVD<Mat, Eigen::ColPivHouseholderQRPreconditioner> svd(loewner, Eigen::ComputeFullV);
    return svd.matrixV().col(m - 1);
  }

  Mat evaluate(const std::vector<int>& support, const std::vector<char>& is_support, const Vec& w) const {
    Mat r(n_, k_);
    const int m = static_cast<int>(support.size());
    for (int i = 0; i < n_; ++i) {
      if (is_support[i]) {
        r.row(i) = f_.row(i);
        continue;
      }
      S den = 0;
      Eigen::Matrix<S, 1, Eigen::Dynamic> num = Eigen::Matrix<S, 1, Eigen::Dynamic>::Zero(k_);
      for (int s = 0; s < m; ++s) {
        const S c = w[s] / (z_[i] - z_[support[s]]);
        den += c;
        num += c * f_.row(support[s]);
      }
      r.row(i) = num / den;
    }
    return r;
  }

  // Poles of the barycentric form mapped to lambda, without doublets and
  // without poles on the negative half-line; one representative per conjugate pair.
  std::vector<Complex> poles(const std::vector<int>& support, const Vec& w) const {
    const int m = static_cast<int>(support.size());
    Mat e = Mat::Zero(m + 1, m + 1), b = Mat::Zero(m + 1, m + 1);
    for (int s = 0; s < m; ++s) {
      e(0, s + 1) = w[s];
      e(s + 1, 0) = 1;
      e(s + 1, s + 1) = z_[support[s]];
      b(s + 1, s + 1) = 1;
    }
    Eigen::GeneralizedEigenSolver<Mat> ges(e, b, false);
    const auto alphas = ges.alphas();
    const auto betas = ges.betas();
    const S eps = std::numeric_limits<S>::epsilon();
    std::vector<Complex> out;
    for (int q = 0; q <= m; ++q) {
      const S beta = betas[q];
      const Cplx alpha = alphas[q];
      if (std::abs(beta) <= eps * std::abs(alpha) || beta == S(0)) continue;
      const Cplx p = alpha / beta;
      if (p.imag() < 0) continue;
      // residue of the barycentric form at p (per data column)
      Cplx dprime = 0;
      Eigen::Matrix<Cplx, Eigen::Dynamic, 1> num = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>::Zero(k_);
      for (int s = 0; s < m; ++s) {
        const Cplx c = Cplx(w[s]) / (p - z_[support[s]]);
        dprime -= c / (p - z_[support[s]]);
        for (int k = 0; k < k_; ++k) num[k] += c * f_(support[s], k);
      }
      S res = 0;
      for (int k = 0; k < k_; ++k) res = std::max(res, std::abs(num[k] / dprime));
      if (!(res > 1e3 * eps)) continue;
      const Complex pz(static_cast<long double>(p.real()), static_cast<long double>(p.imag()));
      if (std::abs(pz + 1.0L) < 1e-30L) continue;
      Complex zeta = 9.0L * (pz - 1.0L) / (pz + 1.0L);
      if (std::abs(zeta.imag()) <= 1e-12L * std::abs(zeta)) zeta = Complex(zeta.real(), 0);
      if (zeta.real() <= 0 && std::abs(zeta.imag()) <= 1e-6L * std::max<long double>(1, std::abs(zeta))) continue;
      out.push_back(zeta);
    }
    return out;
  }

  const std::vector<std::vector<long double>>& values_;
  const std::vector<long double>& norms_;
  double tol_;
  int n_ = 0, k_ = 0;
  Vec z_;
  Mat f_;
};

std::vector<long double> sample(const SymbolExpr& g) {
  const auto& lam = grid().lambda;
  std::vector<long double> v(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i) {
    v[i] = g(lam[i]);
    if (!std::isfinite(v[i])) throw InvalidArgument("fit_rational: symbol " + g.key() + " is not bounded on (-inf, 0]");
  }
  return v;
}

long double rms_norm(const std::vector<long double>& v) {
  const int n = grid().n_norm;
  long double s = 0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s / n);
}

}  // namespace

const std::vector<long double>& fit_grid() { return grid().lambda; }

long double sampled_error(const PartialFractionRational& r, const SymbolExpr& g) { return max_error(r, sample(g)); }

SetFitResult fit_rational_set(const std::vector<SymbolExpr>& gs, int max_degree, double tol) {
  if (gs.empty()) throw InvalidArgument("fit_rational_set: no symbols");
  if (max_degree < 0) throw InvalidArgument("fit_rational: degree must be >= 0");
  if (!(tol > 0)) throw InvalidArgument("fit_rational: tol must be positive");
  std::vector<std::vector<long double>> values;
  std::vector<long double> norms;
  for (const auto& g : gs) {
    values.push_back(sample(g));
    norms.push_back(rms_norm(values.back()));
  }
  if (tol < 1e-13) return Aaa<long double>(values, norms, tol).run(max_degree);
  SetFitResult fit = Aaa<double>(values, norms, tol).run(max_degree);
  if (fit.success()) return fit;
  SetFitResult extended = Aaa<long double>(values, norms, tol).run(max_degree);
  return worst_relative(extended) < worst_relative(fit) ? extended : fit;
}

FitResult fit_rational(const SymbolExpr& g, int max_degree, double tol) {
  SetFitResult s = fit_rational_set({g}, max_degree, tol);
  return {std::move(s.rationals.front()), s.reports.front()};
}

}  // namespace parctl
