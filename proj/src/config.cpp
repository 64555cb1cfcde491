#include "parctl/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

std::vector<std::string> split(const std::string& text, const char* sep) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(sep));
  for (auto& p : parts) boost::trim(p);
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

std::vector<double> numbers(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text, ",")) out.push_back(parse_number(p));
  return out;
}

int integer(const std::string& text) {
  const double v = parse_number(text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

}  // namespace

double parse_number(const std::string& text) {
  std::string s = boost::trim_copy(text);
  double scale = 1.0;
  if (boost::ends_with(s, "pi")) {
    s.resize(s.size() - 2);
    scale = std::numbers::pi;
    if (s.empty() || s == "+") return scale;
    if (s == "-") return -scale;
    if (s.back() == '*') s.pop_back();
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + text + "'");
  }
  if (used != s.size()) throw ConfigError("cannot parse number '" + text + "'");
  return v * scale;
}

FieldDescriptor parse_descriptor(const std::string& text) {
  const std::string s = boost::trim_copy(text);
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : s.substr(colon + 1);
  auto expect = [&](const std::vector<double>& v, std::size_t n) {
    if (v.size() != n) throw ConfigError("descriptor '" + text + "' needs " + std::to_string(n) + " numbers");
  };
  if (kind == "zero") return SampledValues{};
  if (kind == "constant") {
    const auto v = numbers(args);
    expect(v, 1);
    const double c = v[0];
    return PointwiseFunction{[c](const Point2&) { return c; }};
  }
  if (kind == "interval") {
    const auto v = numbers(args);
    expect(v, 2);
    if (!(v[0] < v[1])) throw ConfigError("descriptor '" + text + "': interval needs a < b");
    return IntervalIndicator{v[0], v[1]};
  }
  if (kind == "l1ball") {
    const auto v = numbers(args);
    expect(v, 3);
    if (!(v[2] > 0)) throw ConfigError("descriptor '" + text + "': radius must be positive");
    return L1BallIndicator{{v[0], v[1]}, v[2]};
  }
  if (kind == "gaussian") {
    GaussianSum g;
    for (const auto& bump : split(args, ";")) {
      const auto v = numbers(bump);
      expect(v, 4);
      g.bumps.push_back({{v[0], v[1]}, v[2], v[3]});
    }
    if (g.bumps.empty()) throw ConfigError("descriptor '" + text + "': no gaussian bumps");
    return g;
  }
  throw ConfigError("unknown descriptor kind '" + kind + "' in '" + text + "'");
}

void validate(const RunConfig& c) {
  if (c.dimension != 1 && c.dimension != 2) throw ConfigError("mesh.dimension must be 1 or 2");
  if (!(c.h > 0)) throw ConfigError("mesh.h must be positive");
  if (c.n_el < 0 || c.n_el == 1) throw ConfigError("mesh.n_el must be 0 (derive from h) or >= 2");
  if (!(1.0 + c.diffusion_jump > 0)) throw ConfigError("mesh.diffusion_jump must keep 1 + a > 0");
  if (!(c.horizon > 0)) throw ConfigError("problem.T must be positive");
  if (!(c.alpha > 0)) throw ConfigError("problem.alpha must be positive");
  if (!(c.beta >= 0)) throw ConfigError("problem.beta must be >= 0");
  if (!(0 < c.beta_begin && c.beta_begin < c.beta_end && c.beta_end < 1)) {
    throw ConfigError("problem.beta_window must satisfy 0 < begin < end < 1 (fractions of T)");
  }
  if (c.eps_fractions.empty()) throw ConfigError("problem.eps_fractions is empty");
  for (double e : c.eps_fractions)
    if (!(e > 0 && e <= 1)) throw ConfigError("problem.eps_fractions must lie in (0, 1]");
  if (c.phi_points < 2) throw ConfigError("phi_curve.points must be >= 2");
  if (!(c.phi_mu_min > 0 && c.phi_mu_max > c.phi_mu_min)) throw ConfigError("phi_curve mu range is invalid");
  for (double nu : c.nus)
    if (!(nu >= 0 && nu < 1)) throw ConfigError("sensitivity.nus must lie in [0, 1)");
  if (!(c.sensitivity_eps_fraction > 0 && c.sensitivity_eps_fraction <= 1)) {
    throw ConfigError("sensitivity.eps_fraction must lie in (0, 1]");
  }
  for (int d : c.fit_degrees)
    if (d < 1) throw ConfigError("convergence.fit_degrees must be >= 1");
  for (int n : c.contour_counts)
    if (n < 4) throw ConfigError("convergence.contour_counts must be >= 4");
  if (c.refinements < 1) throw ConfigError("convergence.refinements must be >= 1");
  if (c.threads < 1) throw ConfigError("run.threads must be >= 1");
  for (const auto* d : {&c.w, &c.ystar, &c.f}) parse_descriptor(*d);
}

RunConfig lshape_defaults() {
  RunConfig c;
  c.name = "example2d";
  c.dimension = 2;
  c.h = 1.0 / 30.0;
  c.horizon = 1.0 / 20.0;
  c.w = "l1ball:-0.5,-0.5,0.2";
  c.ystar = "gaussian:0.5,0.5,20,1;0.6,0.1,20,1;0.8,0.4,30,1";
  c.eps_fractions = {0.1, 0.5, 0.9};
  c.refinement_h = 1.0 / 8.0;
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config '" + path + "': " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig c = std::move(base);
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> keys{
      {"experiment.name", [&](const std::string& v) { c.name = v; }},
      {"mesh.dimension", [&](const std::string& v) { c.dimension = integer(v); }},
      {"mesh.h", [&](const std::string& v) { c.h = parse_number(v); }},
      {"mesh.n_el", [&](const std::string& v) { c.n_el = integer(v); }},
      {"mesh.diffusion_jump", [&](const std::string& v) { c.diffusion_jump = parse_number(v); }},
      {"mesh.interface", [&](const std::string& v) { c.interface = parse_number(v); }},
      {"problem.T", [&](const std::string& v) { c.horizon = parse_number(v); }},
      {"problem.alpha", [&](const std::string& v) { c.alpha = parse_number(v); }},
      {"problem.beta", [&](const std::string& v) { c.beta = parse_number(v); }},
      {"problem.beta_window",
       [&](const std::string& v) {
         const auto x = numbers(v);
         if (x.size() != 2) throw ConfigError("problem.beta_window needs two fractions");
         c.beta_begin = x[0];
         c.beta_end = x[1];
       }},
      {"problem.w", [&](const std::string& v) { c.w = v; }},
      {"problem.ystar", [&](const std::string& v) { c.ystar = v; }},
      {"problem.f", [&](const std::string& v) { c.f = v; }},
      {"problem.eps_fractions", [&](const std::string& v) { c.eps_fractions = numbers(v); }},
      {"phi_curve.points", [&](const std::string& v) { c.phi_points = integer(v); }},
      {"phi_curve.mu_min", [&](const std::string& v) { c.phi_mu_min = parse_number(v); }},
      {"phi_curve.mu_max", [&](const std::string& v) { c.phi_mu_max = parse_number(v); }},
      {"sensitivity.nus", [&](const std::string& v) { c.nus = numbers(v); }},
      {"sensitivity.eps_fraction", [&](const std::string& v) { c.sensitivity_eps_fraction = parse_number(v); }},
      {"sensitivity.channels", [&](const std::string& v) { c.channels = split(v, ","); }},
      {"convergence.fit_degrees",
       [&](const std::string& v) {
         c.fit_degrees.clear();
         for (const auto& p : split(v, ",")) c.fit_degrees.push_back(integer(p));
       }},
      {"convergence.contour_counts",
       [&](const std::string& v) {
         c.contour_counts.clear();
         for (const auto& p : split(v, ",")) c.contour_counts.push_back(integer(p));
       }},
      {"convergence.refinements", [&](const std::string& v) { c.refinements = integer(v); }},
      {"convergence.refinement_h", [&](const std::string& v) { c.refinement_h = parse_number(v); }},
      {"output.dir", [&](const std::string& v) { c.output_dir = v; }},
      {"run.seed",
       [&](const std::string& v) {
         try {
           c.seed = std::stoull(v);
         } catch (const std::exception&) {
           throw ConfigError("run.seed must be an unsigned integer");
         }
       }},
      {"run.threads", [&](const std::string& v) { c.threads = integer(v); }},
  };
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config '" + path + "': key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = keys.find(full);
      if (it == keys.end()) throw ConfigError("config '" + path + "': unknown key '" + full + "'");
      try {
        it->second(value.data());
      } catch (const ConfigError& e) {
        throw ConfigError("config '" + path + "', key '" + full + "': " + e.what());
      }
    }
  }
  validate(c);
  return c;
}

}  // namespace parctl
