#include "modetrans/inner.hpp"

#include <algorithm>
#include <cmath>

#include "modetrans/adiabatic.hpp"
#include "modetrans/error.hpp"

namespace modetrans {

namespace {

cplx coupling(const CrossingData& d) { return d.b12 / (d.sigma * d.n1); }

}  // namespace

InnerValue inner_leading(const CrossingData& d, cplx A, cplx B, double tau, const PcfOptions& opts) {
  const cplx nu = d.nu;
  const cplx t = d.sigma * (tau + d.b);
  const PcfValue p = dnu_pair(nu, t, opts);
  const PcfValue m = dnu_pair(nu, -t, opts);
  const cplx k = -I * coupling(d);
  InnerValue v;
  v.a2 = A * p.d_nu + B * m.d_nu;
  v.a1 = k * (A * p.d_nu_m1 - B * m.d_nu_m1);
  // d/dt D_{nu-1}(t) = (t/2) D_{nu-1}(t) - D_nu(t)
  const cplx dm1_p = 0.5 * t * p.d_nu_m1 - p.d_nu;
  const cplx dm1_m = -0.5 * t * m.d_nu_m1 - m.d_nu;
  v.da2 = d.sigma * (A * p.d_nu_p - B * m.d_nu_p);
  v.da1 = d.sigma * k * (A * dm1_p + B * dm1_m);
  v.vec = v.a1 * d.frame.col(0) + v.a2 * d.frame.col(1);
  return v;
}

double inner_system_residual(const CrossingData& d, const InnerValue& v, double tau) {
  const double u = tau + d.b;
  const cplx r1 = -I * v.da1 + u * d.q * v.a1 - d.b12 / d.n1 * v.a2;
  const cplx r2 = -I * v.da2 - d.b21 / d.n2 * v.a1 - u * d.q * v.a2;
  return std::max(std::abs(r1), std::abs(r2)) / (1.0 + std::abs(v.a1) + std::abs(v.a2));
}

double inner_a2_residual(const CrossingData& d, cplx A, cplx B, double tau) {
  const double h = 1e-4 * std::max(1.0, std::abs(tau));
  const cplx dp = inner_leading(d, A, B, tau + h).da2;
  const cplx dm = inner_leading(d, A, B, tau - h).da2;
  const cplx dp2 = inner_leading(d, A, B, tau + 2 * h).da2;
  const cplx dm2 = inner_leading(d, A, B, tau - 2 * h).da2;
  const cplx dd = (8.0 * (dp - dm) - (dp2 - dm2)) / (12.0 * h);
  const InnerValue v = inner_leading(d, A, B, tau);
  const double u = tau + d.b;
  const cplx r = dd + (u * u * d.q * d.q - I * d.q + d.nu * d.sigma * d.sigma) * v.a2;
  const double scale = 1.0 + std::abs(v.a2) * (1.0 + u * u * d.q * d.q);
  return std::abs(r) / scale;
}

InnerFull inner_full(const CrossingData& d, cplx A, cplx B, double tau, double hbar, double gamma_p) {
  if (!(hbar > 0)) throw Error(Errc::domain, "hbar must be positive");
  InnerFull f;
  f.vec = inner_leading(d, A, B, tau).vec * std::polar(1.0, central_phase(d, tau, hbar));
  f.in_zone = std::abs(tau) <= std::pow(hbar, -1.0 / 6.0 + gamma_p);
  return f;
}

InnerAsymptote inner_asymptote(const CrossingData& d, cplx A, cplx B, Side side) {
  const cplx nu = d.nu;
  const cplx e5 = std::exp(I * 5.0 * pi * nu / 4.0);
  const cplx e3 = std::exp(I * 3.0 * pi * nu / 4.0);
  const cplx e1 = std::exp(-I * pi * nu / 4.0);
  const cplx k = I * xi_m1(nu) * coupling(d) * e5;
  if (side == Side::minus) return {-k * A, A * e3 + B * e1};
  return {k * B, A * e1 + B * e3};
}

Vector2c asymptote_values(const CrossingData& d, const InnerAsymptote& as, double tau) {
  const double u = tau + d.b;
  const double lg = std::log(std::abs(std::sqrt(2.0 * d.q) * u));
  const double ph = d.q * u * u / 2.0;
  Vector2c v;
  v << as.c1 * std::exp(-I * ph - d.nu * lg), as.c2 * std::exp(I * ph + d.nu * lg);
  return v;
}

}  // namespace modetrans
