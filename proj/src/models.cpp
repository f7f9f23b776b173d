#include "modetrans/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "modetrans/error.hpp"

namespace modetrans {

namespace {

double eval_real(const std::vector<double>& c, double x, int deriv = 0) {
  double v = 0.0;
  for (std::size_t n = c.size(); n-- > static_cast<std::size_t>(deriv);) {
    double f = 1.0;
    for (int k = 0; k < deriv; ++k) f *= static_cast<double>(n - k);
    v = v * x + f * c[n];
  }
  return v;
}

}  // namespace

std::vector<double> parse_polynomial(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw Error(Errc::config, "empty polynomial");
  std::vector<double> c;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) { throw Error(Errc::config, "polynomial \"" + text + "\": " + why); };
  while (i < s.size()) {
    double sign = 1.0;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1.0 : 1.0;
      ++i;
    } else if (i != 0) {
      fail("expected + or -");
    }
    if (i >= s.size()) fail("dangling sign");
    double coef = 1.0;
    bool have_num = false;
    if (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.') {
      char* end = nullptr;
      coef = std::strtod(s.c_str() + i, &end);
      const std::size_t used = static_cast<std::size_t>(end - (s.c_str() + i));
      if (used == 0) fail("bad number");
      i += used;
      have_num = true;
      if (i < s.size() && s[i] == '*') ++i;
    }
    int power = 0;
    if (i < s.size() && s[i] == 'x') {
      ++i;
      power = 1;
      if (i < s.size() && s[i] == '^') {
        ++i;
        std::size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (start == i) fail("missing exponent");
        power = std::stoi(s.substr(start, i - start));
      }
    } else if (!have_num) {
      fail("expected a number or x");
    }
    if (static_cast<int>(c.size()) <= power) c.resize(power + 1, 0.0);
    c[power] += sign * coef;
  }
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  return c;
}

std::vector<double> tanh_barrier(double height, double width, double x0, int degree) {
  if (!(width > 0) || !std::isfinite(height) || !std::isfinite(x0)) throw Error(Errc::config, "bad tanh parameters");
  if (degree < 1 || degree > 25 || degree % 2 == 0) throw Error(Errc::config, "tanh degree must be odd, 1..25");
  // tanh' = 1 - tanh^2 fixes the series of tanh s term by term
  std::vector<double> a(degree + 1, 0.0);
  for (int n = 0; n < degree; ++n) {
    double sq = 0.0;
    for (int k = 0; k <= n; ++k) sq += a[k] * a[n - k];
    a[n + 1] = ((n == 0 ? 1.0 : 0.0) - sq) / (n + 1);
  }
  // sum_n a_n ((x - x0) / width)^n re-expanded in powers of x
  std::vector<double> c(degree + 1, 0.0);
  for (int n = 1; n <= degree; ++n) {
    if (a[n] == 0.0) continue;
    const double an = height * a[n] / std::pow(width, n);
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      c[k] += an * binom * std::pow(-x0, n - k);
      binom = binom * (n - k) / (k + 1);
    }
  }
  return c;
}

std::vector<double> parse_potential(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.rfind("tanh(", 0) != 0) return parse_polynomial(text);
  if (s.back() != ')') throw Error(Errc::config, "tanh(...) is missing a closing parenthesis");
  std::stringstream ss(s.substr(5, s.size() - 6));
  std::vector<double> v;
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    v.push_back(std::strtod(item.c_str(), &end));
    if (item.empty() || *end != '\0') throw Error(Errc::config, "tanh argument \"" + item + "\" is not a number");
  }
  if (v.size() != 4 || v[3] != std::floor(v[3])) throw Error(Errc::config, "tanh takes height, width, x0, degree");
  return tanh_barrier(v[0], v[1], v[2], static_cast<int>(v[3]));
}

PencilModel model_dirac(double E, const std::vector<double>& u_coeffs, double p, double x_min, double x_max) {
  if (!(x_max > x_min)) throw Error(Errc::config, "empty interval");
  std::vector<double> f(u_coeffs.size() > 0 ? u_coeffs.size() : 1, 0.0);
  for (std::size_t n = 0; n < u_coeffs.size(); ++n) f[n] = -u_coeffs[n];
  f[0] += E;
  // exactly one simple root of E - U on the interval
  const int scan = 2000;
  int roots = 0;
  double root = 0.0;
  double x_prev = x_min;
  double prev = eval_real(f, x_min);
  for (int k = 1; k <= scan; ++k) {
    const double x = x_min + (x_max - x_min) * k / scan;
    const double v = eval_real(f, x);
    if (prev == 0.0) {
      ++roots;
      root = x_prev;
    } else if (prev * v < 0) {
      ++roots;
      std::uintmax_t iters = 200;
      auto r = boost::math::tools::toms748_solve([&](double y) { return eval_real(f, y); }, x_prev, x, prev, v,
                                                 boost::math::tools::eps_tolerance<double>(52), iters);
      root = 0.5 * (r.first + r.second);
    } else if (v == 0.0 && k == scan) {
      ++roots;
      root = x;
    }
    x_prev = x;
    prev = v;
  }
  if (roots == 0) throw Error(Errc::no_degeneracy, "E - U(x) has no root in the interval");
  if (roots > 1) throw Error(Errc::multiple_crossings, "E - U(x) has several roots in the interval");
  if (std::abs(eval_real(f, root, 1)) < 1e-8) throw Error(Errc::degenerate_slope, "U'(x*) vanishes");

  PencilModel m;
  m.name = "dirac";
  m.x_min = x_min;
  m.x_max = x_max;
  m.metric = CMatrix::Zero(2, 2);
  m.metric(0, 1) = m.metric(1, 0) = 1.0;
  for (double a : f) m.k_coeffs.push_back(CMatrix::Identity(2, 2) * a);
  CMatrix B = CMatrix::Zero(2, 2);
  B(0, 1) = -I * p;
  B(1, 0) = I * p;
  m.b_coeffs.push_back(B);
  return m;
}

PencilModel model_landau_zener(double slope, double gap, double x_min, double x_max, double bias1, double bias2) {
  if (!(slope > 0)) throw Error(Errc::config, "slope must be positive");
  if (!(x_max > x_min)) throw Error(Errc::config, "empty interval");
  PencilModel m;
  m.name = "lz";
  m.x_min = x_min;
  m.x_max = x_max;
  m.metric = CMatrix::Identity(2, 2);
  m.k_coeffs.push_back(CMatrix::Zero(2, 2));
  CMatrix k1 = CMatrix::Zero(2, 2);
  k1(0, 0) = slope;
  k1(1, 1) = -slope;
  m.k_coeffs.push_back(k1);
  CMatrix B(2, 2);
  B << bias1, gap, gap, bias2;
  m.b_coeffs.push_back(B);
  return m;
}

PencilModel model_spectator(const PencilModel& base, const std::vector<Spectator>& extras, double min_gap) {
  validate(base);
  if (extras.empty()) return base;
  const auto d0 = base.dim();
  const auto d = d0 + static_cast<Eigen::Index>(extras.size());
  PencilModel m;
  m.name = base.name + "+spectators";
  m.x_min = base.x_min;
  m.x_max = base.x_max;
  m.metric = CMatrix::Zero(d, d);
  m.metric.topLeftCorner(d0, d0) = base.metric;
  for (Eigen::Index s = d0; s < d; ++s) m.metric(s, s) = 1.0;
  for (std::size_t n = 0; n < base.k_coeffs.size(); ++n) {
    CMatrix k = CMatrix::Zero(d, d);
    k.topLeftCorner(d0, d0) = base.k_coeffs[n];
    if (n == 0)
      for (std::size_t s = 0; s < extras.size(); ++s) k(d0 + s, d0 + s) = extras[s].offset;
    m.k_coeffs.push_back(k);
  }
  const std::size_t nb = std::max<std::size_t>(1, base.b_coeffs.size());
  for (std::size_t n = 0; n < nb; ++n) {
    CMatrix b = CMatrix::Zero(d, d);
    if (n < base.b_coeffs.size()) b.topLeftCorner(d0, d0) = base.b_coeffs[n];
    if (n == 0) {
      for (std::size_t s = 0; s < extras.size(); ++s) {
        for (Eigen::Index r = 0; r < d0; ++r) {
          b(d0 + s, r) = extras[s].coupling;
          b(r, d0 + s) = extras[s].coupling;
        }
      }
    }
    m.b_coeffs.push_back(b);
  }
  const int scan = 400;
  for (int k = 0; k <= scan; ++k) {
    const double x = base.x_min + (base.x_max - base.x_min) * k / scan;
    const SpectralFrame f = solve_pencil(base, x);
    for (const auto& s : extras) {
      for (Eigen::Index j = 0; j < f.size(); ++j) {
        if (std::abs(f.beta(j) - s.offset) < min_gap) {
          throw Error(Errc::spectral_gap, "spectator level at " + std::to_string(s.offset) +
                                              " is not separated from the crossing pair");
        }
      }
    }
  }
  return m;
}

}  // namespace modetrans
