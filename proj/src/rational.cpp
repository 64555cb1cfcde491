#include "parctl/rational.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

using Complex = PartialFractionRational::Complex;

long double distance_to_half_line(Complex z) {
  return z.real() <= 0 ? std::abs(z.imag()) : std::abs(z);
}

bool near(Complex a, Complex b, long double rel) {
  return std::abs(a - b) <= rel * std::max<long double>(1, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

PartialFractionRational::PartialFractionRational(long double r0, std::vector<Complex> poles,
                                                 std::vector<Complex> residues)
    : r0_(r0) {
  if (poles.size() != residues.size()) throw InvalidArgument("PartialFractionRational: pole/residue count differs");
  for (const Complex& p : poles) {
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) throw InvalidArgument("PartialFractionRational: non-finite pole");
    if (distance_to_half_line(p) <= 1e-8L) {
      std::ostringstream os;
      os << "PartialFractionRational: pole " << static_cast<double>(p.real()) << "+" << static_cast<double>(p.imag())
         << "i lies on (-inf, 0]";
      throw InvalidArgument(os.str());
    }
  }

  // pair up conjugates; on success store them adjacent with exact symmetry
  const std::size_t d = poles.size();
  std::vector<bool> used(d, false);
  std::vector<Complex> p_out, r_out;
  bool closed = true;
  constexpr long double rel = 1e-9L;
  for (std::size_t i = 0; i < d && closed; ++i) {
    if (used[i]) continue;
    const Complex p = poles[i];
    if (std::abs(p.imag()) <= 1e-14L * std::abs(p)) {
      if (std::abs(residues[i].imag()) > rel * std::max<long double>(1, std::abs(residues[i]))) closed = false;
      used[i] = true;
      p_out.emplace_back(p.real(), 0);
      r_out.emplace_back(residues[i].real(), 0);
      continue;
    }
    std::size_t best = d;
    long double best_dist = 0;
    for (std::size_t j = 0; j < d; ++j) {
      if (used[j] || j == i) continue;
      const long double dist = std::abs(poles[j] - std::conj(p));
      if (best == d || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    if (best == d || !near(poles[best], std::conj(p), rel) || !near(residues[best], std::conj(residues[i]), rel)) {
      closed = false;
      break;
    }
    used[i] = used[best] = true;
    Complex pu = 0.5L * (p + std::conj(poles[best]));
    Complex ru = 0.5L * (residues[i] + std::conj(residues[best]));
    if (pu.imag() < 0) {
      pu = std::conj(pu);
      ru = std::conj(ru);
    }
    p_out.push_back(pu);
    r_out.push_back(ru);
    p_out.push_back(std::conj(pu));
    r_out.push_back(std::conj(ru));
  }
  conjugation_closed_ = closed;
  if (closed) {
    poles_ = std::move(p_out);
    residues_ = std::move(r_out);
  } else {
    poles_ = std::move(poles);
    residues_ = std::move(residues);
  }
}

Complex PartialFractionRational::operator()(Complex lambda) const {
  Complex s = r0_;
  for (std::size_t i = 0; i < poles_.size(); ++i) s += residues_[i] / (lambda - poles_[i]);
  return s;
}

long double PartialFractionRational::real_value(long double lambda) const {
  return (*this)(Complex(lambda, 0)).real();
}

double moebius(double z) {
  if (z == -1.0) throw InvalidArgument("moebius: z = -1 is the pole of m");
  return 9.0 * (z - 1.0) / (z + 1.0);
}

double moebius_inv(double lambda) {
  if (lambda == 9.0) throw InvalidArgument("moebius_inv: lambda = 9 is the pole of m^{-1}");
  return (lambda + 9.0) / (9.0 - lambda);
}

PartialFractionRational contour_exp(int n, double t) {
  if (n < 4) throw InvalidArgument("contour_exp: need n >= 4");
  if (!(t > 0)) throw InvalidArgument("contour_exp: need t > 0");
  // z(theta) = mu (1 - sin(alpha - i beta theta)), theta in (-pi, pi), midpoint trapezoid
  const long double pi = std::numbers::pi_v<long double>;
  const long double mu = 2.246L * n, alpha = 1.1721L, beta = 0.3443L;
  const long double h = 2 * pi / n;
  const Complex i(0, 1);
  std::vector<Complex> poles, residues;
  for (int k = 0; k < n; ++k) {
    const long double theta = -pi + (k + 0.5L) * h;
    const Complex arg(alpha, -beta * theta);
    const Complex z = mu * (1.0L - std::sin(arg));
    const Complex dz = mu * i * beta * std::cos(arg);
    // e^x = (1/2 pi i) int e^z / (z - x) dz, term c/(z_k - x) = -c/(x - z_k)
    const Complex c = h * std::exp(z) * dz / (2 * pi * i);
    poles.push_back(z / static_cast<long double>(t));
    residues.push_back(-c / static_cast<long double>(t));
  }
  return PartialFractionRational(0, std::move(poles), std::move(residues));
}

void write_fit_reports_csv(std::ostream& os, const std::vector<FitReport>& reports) {
  os << "degree,error,norm,tol\n";
  const auto old = os.precision(17);
  for (const auto& r : reports) {
    os << r.degree << ',' << static_cast<double>(r.max_error) << ',' << static_cast<double>(r.norm) << ','
       << r.tol << '\n';
  }
  os.precision(old);
}

bool SetFitResult::success() const {
  for (const auto& r : reports)
    if (!r.success) return false;
  return true;
}

FitResult FitCache::get(const SymbolExpr& g, int max_degree, double tol) {
  std::ostringstream key;
  key.precision(17);
  key << g.key() << '|' << max_degree << '|' << tol;
  {
    std::lock_guard lock(mutex_);
    if (auto it = fits_.find(key.str()); it != fits_.end()) return it->second;
  }
  FitResult fit = fit_rational(g, max_degree, tol);
  std::lock_guard lock(mutex_);
  return fits_.emplace(key.str(), std::move(fit)).first->second;
}

std::size_t FitCache::size() const {
  std::lock_guard lock(mutex_);
  return fits_.size();
}

}  // namespace parctl
