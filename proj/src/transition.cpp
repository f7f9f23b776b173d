#include "modetrans/transition.hpp"

#include <algorithm>
#include <cmath>

#include "modetrans/error.hpp"
#include "modetrans/pcf.hpp"
#include "modetrans/special.hpp"

namespace modetrans {

namespace {

double wrap(double a) {
  a = std::fmod(a + pi, 2.0 * pi);
  if (a < 0) a += 2.0 * pi;
  return a - pi;
}

int check_nu(cplx nu) {
  if (!std::isfinite(nu.real()) || !std::isfinite(nu.imag())) throw Error(Errc::domain, "nu is not finite");
  if (std::abs(nu.real()) > 1e-12 * std::max(1.0, std::abs(nu))) {
    throw Error(Errc::domain, "nu must be purely imaginary");
  }
  return nu.imag() >= 0 ? 1 : -1;
}

// sqrt(nu) on the branch e^{i pi w / 4} sqrt|nu|
cplx sqrt_nu(double abs_nu, int w) { return std::polar(std::sqrt(abs_nu), pi * w / 4.0); }

}  // namespace

TransitionMatrix transition_matrix(cplx nu) {
  const int w = check_nu(nu);
  nu = cplx(0.0, nu.imag());
  TransitionMatrix tm{nu, w, Matrix2c::Identity()};
  const double a = std::abs(nu);
  if (a == 0.0) return tm;
  const double la = std::log(a);
  const cplx s = std::sqrt(2.0 * pi) * sqrt_nu(a, w);
  const cplx t11 = std::exp(I * pi * nu);
  const cplx t12 = I * s * std::exp(I * pi * nu / 2.0 + nu - nu * la - log_gamma(1.0 - nu));
  const cplx t21 = s * std::exp(I * pi * nu / 2.0 - nu + nu * la - log_gamma(1.0 + nu));
  tm.t << t11, t12, t21, t11;
  return tm;
}

TransitionMatrix transition_matrix(cplx nu, int w) {
  if (w != 1 && w != -1) throw Error(Errc::domain, "w must be +1 or -1");
  TransitionMatrix tm = transition_matrix(nu);
  if (std::abs(tm.nu) > 0.0 && tm.w != w) throw Error(Errc::domain, "sign of Im nu does not match w");
  tm.w = w;
  return tm;
}

PolarForm polar_form(cplx nu) {
  const int w = check_nu(nu);
  nu = cplx(0.0, nu.imag());
  const double a = std::abs(nu);
  PolarForm pf;
  pf.mag11 = std::exp(-pi * a * w);
  if (a == 0.0) return pf;
  const double m = std::sqrt(-std::expm1(-2.0 * pi * a)) * std::exp(-pi * a * (w - 1) / 2.0);
  pf.mag12 = pf.mag21 = m;
  pf.theta_gamma = w * a * (std::log(a) - 1.0) + pi * w / 4.0;
  pf.theta_prime = wrap(log_gamma(1.0 + nu).imag() - pf.theta_gamma);
  return pf;
}

Matrix2c asymptotic_limit(int w) {
  Matrix2c m;
  if (w > 0) {
    m << 0.0, -1.0, 1.0, 0.0;
  } else {
    m << 1.0, 1.0, 1.0, 1.0;
  }
  return m;
}

double limit_deviation(const TransitionMatrix& tm) {
  Matrix2c t = tm.t;
  if (tm.w < 0) t *= std::exp(-pi * std::abs(tm.nu));
  return (t - asymptotic_limit(tm.w)).cwiseAbs().maxCoeff();
}

Scattering reflection_transmission(const TransitionMatrix& tm) {
  if (tm.w > 0) {
    throw Error(Errc::interpretation,
                "reflection/transmission needs N1 N2 < 0; for w = +1 use renumbered()");
  }
  // det T = 1; forming it from the entries cancels e^{2 pi |nu|} terms
  return {-tm.t(1, 0) / tm.t(1, 1), 1.0 / tm.t(1, 1)};
}

Matrix2c renumbered(const TransitionMatrix& tm) {
  Matrix2c j;
  j << 0.0, 1.0, -1.0, 0.0;
  return tm.t * j;
}

MatchCoefficients match_coefficients(cplx nu, cplx A, cplx B) {
  const int w = check_nu(nu);
  nu = cplx(0.0, nu.imag());
  const double a = std::abs(nu);
  const cplx sn = sqrt_nu(a, w);
  const cplx izeta = a > 0 ? -nu / 2.0 + nu * std::log(a) / 2.0 : cplx(0.0);
  const cplx xm1 = xi_m1(nu);
  const cplx e5 = std::exp(I * 5.0 * pi * nu / 4.0);
  const cplx e3 = std::exp(I * 3.0 * pi * nu / 4.0);
  const cplx e1 = std::exp(-I * pi * nu / 4.0);
  MatchCoefficients m;
  m.minus << -I * sn * A * xm1 * e5 * std::exp(-izeta), (A * e3 + B * e1) * std::exp(izeta);
  m.plus << I * sn * B * xm1 * e5 * std::exp(-izeta), (A * e1 + B * e3) * std::exp(izeta);
  return m;
}

Matrix2c transition_from_matching(const MatchCoefficients& a, const MatchCoefficients& b) {
  Matrix2c cm, cp;
  cm << a.minus, b.minus;
  cp << a.plus, b.plus;
  return cp * cm.inverse();
}

double FluxResiduals::max() const {
  return std::max({det, flux1, flux2, cross, t21_relation, t22_relation});
}

FluxResiduals flux_residuals(const Matrix2c& t, double n1, double n2) {
  auto rel = [](cplx diff, double scale) { return std::abs(diff) / std::max(1.0, scale); };
  FluxResiduals r;
  const cplx a = t(0, 0) * t(1, 1), b = t(0, 1) * t(1, 0);
  r.det = rel(a - b - 1.0, std::max(std::abs(a), std::abs(b)));
  const double f11 = std::norm(t(0, 0)) * n1, f21 = std::norm(t(1, 0)) * n2;
  r.flux1 = rel(f11 + f21 - n1, std::max(std::abs(f11), std::abs(f21)));
  const double f12 = std::norm(t(0, 1)) * n1, f22 = std::norm(t(1, 1)) * n2;
  r.flux2 = rel(f12 + f22 - n2, std::max(std::abs(f12), std::abs(f22)));
  const cplx c1 = std::conj(t(0, 0)) * t(0, 1) * n1, c2 = std::conj(t(1, 0)) * t(1, 1) * n2;
  r.cross = rel(c1 + c2, std::max(std::abs(c1), std::abs(c2)));
  r.t21_relation = rel(t(1, 0) + std::conj(t(0, 1)) * n1 / n2, std::abs(t(1, 0)));
  r.t22_relation = rel(t(1, 1) - std::conj(t(0, 0)), std::abs(t(1, 1)));
  return r;
}

double unitarity_defect(const Matrix2c& t) {
  return (t.adjoint() * t - Matrix2c::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace modetrans
