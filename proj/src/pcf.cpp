#include "modetrans/pcf.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "modetrans/error.hpp"
#include "modetrans/special.hpp"

namespace modetrans {

namespace {

using lcplx = std::complex<long double>;

const double sqrt_pi = std::sqrt(pi);
const double sqrt_two_pi = std::sqrt(2.0 * pi);

}  // namespace

PcfPoint dnu_series(cplx nu, cplx t) {
  // D_nu(0) and D_nu'(0).
  const cplx c0 = std::pow(2.0, nu / 2.0) * sqrt_pi * rgamma((1.0 - nu) / 2.0);
  const cplx c1 = -std::pow(2.0, (nu + 1.0) / 2.0) * sqrt_pi * rgamma(-nu / 2.0);

  // (n+2)(n+1) c_{n+2} = -(nu + 1/2) c_n + c_{n-2} / 4
  const lcplx lnu(nu.real(), nu.imag());
  const lcplx lt(t.real(), t.imag());
  const lcplx a = -(lnu + 0.5L);
  lcplx cm2 = 0, cm1 = 0;          // c_{n-2}, c_{n-1}
  lcplx cn = lcplx(c0.real(), c0.imag());
  lcplx cn1 = lcplx(c1.real(), c1.imag());
  lcplx tp = 1;                    // t^n
  lcplx sum = 0, dsum = 0;
  long double peak = 0, total = 0, dtotal = 0;
  const long double at = std::abs(lt);
  int quiet = 0;
  for (int n = 0; n < 4000; n += 2) {
    // terms n and n+1, derivative terms n c_n t^{n-1}
    const lcplx term0 = cn * tp;
    const lcplx term1 = cn1 * tp * lt;
    sum += term0 + term1;
    lcplx dterm = static_cast<long double>(n + 1) * cn1 * tp;
    if (n > 0) dterm += static_cast<long double>(n) * cn * tp / lt;
    dsum += dterm;
    const long double mag = std::abs(term0) + std::abs(term1);
    total += mag;
    dtotal += std::abs(dterm);
    peak = std::max(peak, mag);
    if (n > 8 && mag <= 1e-22L * std::max(peak, std::abs(sum))) {
      if (++quiet >= 2) break;
    } else {
      quiet = 0;
    }
    // advance: c_{n+2} and c_{n+3}
    const lcplx cn2 = (a * cn + 0.25L * cm2) / static_cast<long double>((n + 2) * (n + 1));
    const lcplx cn3 = (a * cn1 + 0.25L * cm1) / static_cast<long double>((n + 3) * (n + 2));
    cm2 = cn;
    cm1 = cn1;
    cn = cn2;
    cn1 = cn3;
    tp *= lt * lt;
    if (at == 0) break;
  }
  // seeds come from double-precision Gamma values whose accuracy drops with |nu|
  const long double seed_eps = 4e-16L * (1.0L + 0.25L * std::norm(lnu));
  long double est = std::abs(sum) > 0 ? seed_eps * total / std::abs(sum) : 1.0L;
  if (at > 0 && std::abs(dsum) > 0) est = std::max(est, seed_eps * dtotal / std::abs(dsum));
  return {cplx(static_cast<double>(sum.real()), static_cast<double>(sum.imag())),
          cplx(static_cast<double>(dsum.real()), static_cast<double>(dsum.imag())),
          static_cast<double>(std::min(est, 1.0L))};
}

namespace {

struct AsymSum {
  cplx sum, dsum;
  double est;
};

// Weniger delta transform of sum a_j with remainder estimates a_{j+1};
// needs a.size() >= n + 2. A vanishing term means the series terminates.
lcplx weniger(const std::vector<lcplx>& a, int n) {
  lcplx s = 0;
  for (int j = 0; j <= n + 1; ++j) {
    if (a[j] == lcplx(0)) return s;
    s += a[j];
  }
  lcplx num = 0, den = 0, part = 0;
  long double binom = 1;
  for (int j = 0; j <= n; ++j) {
    part += a[j];
    long double ratio = 1;
    for (int m = 0; m <= n - 2; ++m) ratio *= (1.0L + j + m) / (1.0L + n + m);
    const long double c = ((j % 2) ? -1.0L : 1.0L) * binom * ratio;
    num += c * part / a[j + 1];
    den += c / a[j + 1];
    binom = binom * (n - j) / (j + 1);
  }
  return num / den;
}

// sum_k coef_k t^{-2k} and its t-derivative. next(k) gives coef_k / coef_{k-1}.
template <class Ratio>
AsymSum asym_sum(cplx t, int order, Ratio next) {
  const cplx inv2 = 1.0 / (t * t);
  if (order <= 0) {
    cplx term = 1.0, sum = 1.0, dsum = 0.0;
    double last = 1.0, omitted = 0.0;
    for (int k = 1; k < 60; ++k) {
      term *= next(k) * inv2;
      const double mag = std::abs(term);
      if (k > 3 && (mag > last || mag < 1e-18 * std::abs(sum))) {
        omitted = mag;
        break;
      }
      sum += term;
      dsum += -2.0 * k * term / t;
      last = mag;
    }
    return {sum, dsum, omitted / std::abs(sum)};
  }
  const int n = order;
  std::vector<lcplx> a(n + 3), d(n + 3);
  const lcplx linv2(inv2.real(), inv2.imag()), lt(t.real(), t.imag());
  a[0] = 1;
  d[0] = 0;
  for (int k = 1; k <= n + 2; ++k) {
    const cplx r = next(k);
    a[k] = a[k - 1] * lcplx(r.real(), r.imag()) * linv2;
    d[k] = -2.0L * k * a[k] / lt;
  }
  const lcplx s1 = weniger(a, n), s0 = weniger(a, n - 1);
  // derivative series starts at k = 1
  const std::vector<lcplx> dd(d.begin() + 1, d.end());
  const lcplx ds1 = weniger(dd, n), ds0 = weniger(dd, n - 1);
  double est = static_cast<double>(std::abs(s1 - s0) / std::abs(s1));
  const long double dscale = std::max(std::abs(ds1), std::abs(s1) / std::abs(lt));
  est = std::max(est, static_cast<double>(std::abs(ds1 - ds0) / dscale));
  return {cplx(static_cast<double>(s1.real()), static_cast<double>(s1.imag())),
          cplx(static_cast<double>(ds1.real()), static_cast<double>(ds1.imag())), std::max(est, 1e-16)};
}

}  // namespace

PcfPoint dnu_asymptotic(cplx nu, cplx t, int order) {
  if (std::abs(t) == 0.0) throw Error(Errc::domain, "asymptotic expansion at t = 0");
  // The transform converges to a lateral sum when the late terms of a branch
  // share a phase (its Stokes direction), so it is used only away from it.
  auto branch_order = [&](cplx late_ratio) { return std::abs(std::arg(late_ratio)) < pi / 3 ? 0 : order; };
  // t^nu e^{-t^2/4} sum a_k t^{-2k},  a_k / a_{k-1} = -(nu - 2k + 2)(nu - 2k + 1) / (2k)
  const AsymSum b1 = asym_sum(t, branch_order(-1.0 / (t * t)), [&](int k) {
    return -(nu - (2.0 * k - 2.0)) * (nu - (2.0 * k - 1.0)) / (2.0 * k);
  });
  const cplx lt = std::log(t);
  const cplx e1 = std::exp(nu * lt - t * t / 4.0);
  cplx val = e1 * b1.sum;
  cplx der = e1 * ((nu / t - t / 2.0) * b1.sum + b1.dsum);
  double err = std::abs(val) * b1.est, derr = std::abs(der) * b1.est;

  // The e^{t^2/4} branch is present past the Stokes lines arg t = +-pi/2.
  const double arg = std::arg(t);
  if (arg >= pi / 2 || arg <= -pi / 2) {
    const cplx coef = arg > 0 ? xi(nu) * std::exp(2.0 * pi * I * nu) : xi(nu);
    if (coef != 0.0) {
      // t^{-nu-1} e^{t^2/4} sum b_k t^{-2k},  b_k / b_{k-1} = (nu + 2k - 1)(nu + 2k) / (2k)
      const AsymSum b2 = asym_sum(t, branch_order(1.0 / (t * t)), [&](int k) {
        return (nu + (2.0 * k - 1.0)) * (nu + 2.0 * k) / (2.0 * k);
      });
      const cplx e2 = coef * std::exp(-(nu + 1.0) * lt + t * t / 4.0);
      const cplx v2 = e2 * b2.sum;
      const cplx d2 = e2 * ((-(nu + 1.0) / t + t / 2.0) * b2.sum + b2.dsum);
      val += v2;
      der += d2;
      err += std::abs(v2) * b2.est;
      derr += std::abs(d2) * b2.est;
    }
  }
  const double est = std::max(err / std::abs(val), derr / std::abs(der));
  return {val, der, std::isfinite(est) ? std::min(est, 1.0) : 1.0};
}

const char* regime_name(PcfRegime r) {
  switch (r) {
    case PcfRegime::series:
      return "series";
    case PcfRegime::asymptotic:
      return "asymptotic";
    case PcfRegime::integrated:
      return "integrated";
  }
  return "unknown";
}

PcfValue dnu_integrated(cplx nu, cplx t, double r_start, const PcfOptions& opts) {
  namespace ode = boost::numeric::odeint;
  const double r = std::abs(t);
  if (!(r_start > r)) throw Error(Errc::domain, "integration must start outside |t|");
  const cplx dir = r > 0 ? t / r : cplx(1.0, 0.0);
  const cplx t0 = r_start * dir;
  const PcfPoint p = dnu_asymptotic(nu, t0, opts.order);
  const PcfPoint m = dnu_asymptotic(nu - 1.0, t0, opts.order);
  // y = (D_nu, D_nu', D_{nu-1}, D_{nu-1}', v, v') with v a second solution of the nu equation
  std::vector<cplx> y{p.value, p.derivative, m.value, m.derivative, 0.0, 1.0};
  auto rhs = [&](const std::vector<cplx>& x, std::vector<cplx>& dx, double s) {
    const cplx tt = s * dir;
    const cplx q0 = tt * tt / 4.0 - nu - 0.5, q1 = q0 + 1.0;
    dx[0] = dir * x[1];
    dx[1] = dir * q0 * x[0];
    dx[2] = dir * x[3];
    dx[3] = dir * q1 * x[2];
    dx[4] = dir * x[5];
    dx[5] = dir * q0 * x[4];
  };
  // fixed steps, so the result is a smooth function of t; the count depends on r_start only
  const int steps = std::max(400, static_cast<int>(std::ceil(r_start * r_start / 0.08)));
  ode::runge_kutta_fehlberg78<std::vector<cplx>> stepper;
  ode::integrate_n_steps(stepper, rhs, y, r_start, -(r_start - r) / steps, steps);
  // an error in D_nu'(r_start) excites v, which may outgrow D_nu on the way in
  const double grow = std::abs(p.derivative) * std::abs(y[4]) / std::abs(y[0]);
  const double start_err = std::max(p.est_error, m.est_error);
  const double est = std::max(start_err, 1e-16) * (1.0 + grow) + 1e-13;
  return {y[0], y[2], y[1], PcfRegime::integrated, std::min(est, 1.0)};
}

PcfValue dnu_pair(cplx nu, cplx t, const PcfOptions& opts) {
  if (!std::isfinite(nu.real()) || !std::isfinite(nu.imag()) || !std::isfinite(t.real()) ||
      !std::isfinite(t.imag())) {
    throw Error(Errc::domain, "non-finite argument to D_nu");
  }
  if (std::abs(nu.imag()) > 50.0) throw Error(Errc::domain, "|Im nu| > 50 is outside the supported range");
  const double r = std::abs(t);
  const bool try_series = r <= opts.series_max;
  // below the turning point |t| = 2 sqrt(|nu| + 1) the expansion is not asymptotic
  const bool try_asym = r >= std::max(opts.asymptotic_min, 2.0 * std::sqrt(std::abs(nu) + 1.0)) || !try_series;
  PcfValue s{}, a{};
  if (try_series) {
    const auto p = dnu_series(nu, t);
    const auto m = dnu_series(nu - 1.0, t);
    s = {p.value, m.value, p.derivative, PcfRegime::series, std::max(p.est_error, m.est_error)};
  }
  if (try_asym) {
    const auto p = dnu_asymptotic(nu, t, opts.order);
    const auto m = dnu_asymptotic(nu - 1.0, t, opts.order);
    a = {p.value, m.value, p.derivative, PcfRegime::asymptotic, std::max(p.est_error, m.est_error)};
  }
  if (try_series && try_asym && s.est_error <= 0.1 * opts.overlap_tol && a.est_error <= 0.1 * opts.overlap_tol) {
    auto rel = [](cplx x, cplx y) { return std::abs(x - y) / std::max(std::abs(x), std::abs(y)); };
    const double gap = std::max(rel(s.d_nu, a.d_nu), rel(s.d_nu_m1, a.d_nu_m1));
    if (gap > opts.overlap_tol) {
      throw Error(Errc::precision, "series and asymptotic values of D_nu disagree by " + std::to_string(gap));
    }
  }
  PcfValue best = s.est_error <= a.est_error ? s : a;
  if (!try_series) best = a;
  if (!try_asym) best = s;
  if (best.est_error > 1e-10) {
    double r0 = std::max(12.0, 2.0 * std::sqrt(std::abs(nu) + 1.0) + 6.0);
    if (r0 > r) {
      while (r0 < 80.0 && std::max(dnu_asymptotic(nu, r0 * t / r, opts.order).est_error,
                                   dnu_asymptotic(nu - 1.0, r0 * t / r, opts.order).est_error) > 1e-14) {
        r0 += 4.0;
      }
      const PcfValue g = dnu_integrated(nu, t, r0, opts);
      // the estimate is only trusted while D_nu is not swamped on the way in
      if (g.est_error < 1e-6 && g.est_error < best.est_error) best = g;
    }
  }
  if (best.est_error > opts.max_error) {
    throw Error(Errc::precision, "no regime evaluates D_nu to " + std::to_string(opts.max_error) + " here");
  }
  return best;
}

cplx dnu(cplx nu, cplx t, const PcfOptions& opts) { return dnu_pair(nu, t, opts).d_nu; }

cplx xi(cplx nu) { return -sqrt_two_pi * std::exp(-I * pi * nu) * rgamma(-nu); }

cplx xi_m1(cplx nu) { return sqrt_two_pi * std::exp(-I * pi * nu) * rgamma(1.0 - nu); }

cplx pcf_wronskian(cplx nu) { return sqrt_two_pi * rgamma(-nu); }

}  // namespace modetrans
