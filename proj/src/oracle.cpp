#include "modetrans/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "modetrans/error.hpp"
#include "modetrans/transition.hpp"

namespace modetrans {

namespace {

using State = std::vector<cplx>;

struct Rhs {
  std::vector<CMatrix> coeffs;  // (i/hbar) G^{-1} (K_n + sqrt(hbar) B_n)
  IntegratorOptions opts;
  double hbar;
  mutable CVector tmp;

  void operator()(const State& y, State& dy, double x) const {
    const auto d = static_cast<Eigen::Index>(y.size());
    Eigen::Map<const CVector> yv(y.data(), d);
    Eigen::Map<CVector> dv(dy.data(), d);
    tmp = coeffs.back() * yv;
    for (auto n = static_cast<long>(coeffs.size()) - 2; n >= 0; --n) tmp = x * tmp + coeffs[n] * yv;
    if (opts.strip_phase) tmp -= (I / hbar) * (opts.strip_beta0 + opts.strip_slope * (x - opts.strip_x0)) * yv;
    dv = tmp;
  }
};

double strip_angle(const IntegratorOptions& o, double hbar, double x_from, double x) {
  auto F = [&](double s) { return o.strip_beta0 * s + 0.5 * o.strip_slope * (s - o.strip_x0) * (s - o.strip_x0); };
  return (F(x) - F(x_from)) / hbar;
}

}  // namespace

TrajectoryRecord integrate(const PencilModel& model, double hbar, double x_from, double x_to, const CVector& psi0,
                           const IntegratorOptions& opts) {
  validate(model);
  if (!(hbar > 0)) throw Error(Errc::domain, "hbar must be positive");
  if (!(opts.tol >= 1e-13 && opts.tol <= 1e-5)) throw Error(Errc::domain, "integration tolerance out of range");
  if (psi0.size() != model.dim()) throw Error(Errc::domain, "initial state has the wrong dimension");
  const auto d = model.dim();
  const CMatrix Ginv = model.metric.inverse();
  Rhs rhs{{}, opts, hbar, CVector(d)};
  const std::size_t deg = std::max(model.k_coeffs.size(), model.b_coeffs.size());
  for (std::size_t n = 0; n < deg; ++n) {
    CMatrix c = CMatrix::Zero(d, d);
    if (n < model.k_coeffs.size()) c += model.k_coeffs[n];
    if (n < model.b_coeffs.size()) c += std::sqrt(hbar) * model.b_coeffs[n];
    rhs.coeffs.push_back((I / hbar) * (Ginv * c));
  }

  TrajectoryRecord rec;
  rec.hbar = hbar;
  rec.tol = opts.tol;
  State y(psi0.data(), psi0.data() + d);
  const cplx f0 = g_inner(psi0, psi0, model.metric);
  const double f0abs = std::max(std::abs(f0), 1e-300);
  auto observer = [&](const State& s, double x) {
    Eigen::Map<const CVector> v(s.data(), d);
    const cplx fl = v.dot(model.metric * v);
    rec.max_flux_drift = std::max(rec.max_flux_drift, std::abs(fl - f0) / f0abs);
    if (opts.keep_samples) {
      rec.x.push_back(x);
      CVector p = v;
      if (opts.strip_phase) p *= std::polar(1.0, strip_angle(opts, hbar, x_from, x));
      rec.psi.push_back(p);
      rec.flux.push_back(fl);
    }
  };

  namespace ode = boost::numeric::odeint;
  using Stepper = ode::runge_kutta_fehlberg78<State, double, State, double>;
  const double scale = psi0.norm();
  auto stepper = ode::make_controlled<Stepper>(opts.tol * scale, opts.tol);
  const double span = x_to - x_from;
  const double dx0 = (span >= 0 ? 1.0 : -1.0) * std::min(std::abs(span), hbar * 1e-2);
  try {
    rec.steps = ode::integrate_adaptive(stepper, std::cref(rhs), y, x_from, x_to, dx0, observer);
  } catch (const std::exception& e) {
    throw Error(Errc::stiffness, std::string("integration failed: ") + e.what() +
                                     "; try a larger hbar or a shorter interval");
  }
  if (rec.steps > opts.max_steps) throw Error(Errc::stiffness, "step budget exceeded");
  Eigen::Map<const CVector> v(y.data(), d);
  rec.final_state = v;
  if (opts.strip_phase) rec.final_state *= std::polar(1.0, strip_angle(opts, hbar, x_from, x_to));
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!std::isfinite(rec.final_state(i).real()) || !std::isfinite(rec.final_state(i).imag())) {
      throw Error(Errc::stiffness, "integration produced non-finite values");
    }
  }
  return rec;
}

Projection project_onto_modes(const AdiabaticContext& ctx, const CVector& psi, double x, Side side,
                              ModeBasis basis) {
  const CMatrix& G = ctx.model->metric;
  const CVector p1 = leading_mode(ctx, 1, side, x, basis);
  const CVector p2 = leading_mode(ctx, 2, side, x, basis);
  Projection pr;
  pr.k1 = g_inner(p1, psi, G) / g_inner(p1, p1, G);
  pr.k2 = g_inner(p2, psi, G) / g_inner(p2, p2, G);
  pr.residual = (psi - pr.k1 * p1 - pr.k2 * p2).norm() / std::max(psi.norm(), 1e-300);
  return pr;
}

double endpoint_offset(const CrossingData& data, double hbar, const OracleOptions& opts) {
  return std::max(opts.c_endpoint * std::pow(hbar, 0.5 - opts.gamma), exclusion_radius(data, hbar) * (1.0 + 1e-9));
}

EmpiricalTransition empirical_transition(const PencilModel& model, const CrossingData& data, double hbar,
                                         const OracleOptions& opts) {
  AdiabaticContext ctx(model, data, hbar, opts.gamma, opts.phase);
  const double off = endpoint_offset(data, hbar, opts);
  EmpiricalTransition e;
  e.hbar = hbar;
  e.x_left = std::max(data.x_star - off, model.x_min);
  e.x_right = std::min(data.x_star + off, model.x_max);
  IntegratorOptions io;
  io.tol = opts.tol;
  io.keep_samples = false;
  io.strip_phase = opts.strip_phase;
  io.strip_beta0 = data.beta0;
  io.strip_slope = data.beta_av1;
  io.strip_x0 = data.x_star;
  for (int j = 1; j <= 2; ++j) {
    const CVector psi0 = leading_mode(ctx, j, Side::minus, e.x_left, opts.basis);
    const TrajectoryRecord rec = integrate(model, hbar, e.x_left, e.x_right, psi0, io);
    e.max_flux_drift = std::max(e.max_flux_drift, rec.max_flux_drift);
    e.steps += rec.steps;
    const Projection pr = project_onto_modes(ctx, rec.final_state, e.x_right, Side::plus, opts.basis);
    e.m(0, j - 1) = pr.k1;
    e.m(1, j - 1) = pr.k2;
    e.residual[j - 1] = pr.residual;
    if (pr.residual > opts.leakage_bound) e.leakage_warning = true;
  }
  return e;
}

SweepResult hbar_sweep(const PencilModel& model, const CrossingData& data, std::vector<double> hbars,
                       const OracleOptions& opts) {
  if (hbars.empty()) throw Error(Errc::config, "empty hbar list");
  std::sort(hbars.begin(), hbars.end(), std::greater<>());
  SweepResult r;
  r.asymptotic = transition_matrix(data.nu, data.w).t;
  std::vector<double> hs, es;
  for (double h : hbars) {
    SweepRow row;
    row.hbar = h;
    row.emp = empirical_transition(model, data, h, opts);
    const Matrix2c diff = row.emp.m - r.asymptotic;
    row.err = diff.cwiseAbs().maxCoeff();
    row.err_t11 = std::abs(diff(0, 0));
    row.err_t12 = std::abs(diff(0, 1));
    row.err_t21 = std::abs(diff(1, 0));
    row.err_t22 = std::abs(diff(1, 1));
    hs.push_back(h);
    es.push_back(row.err);
    r.rows.push_back(row);
  }
  for (std::size_t i = 1; i < es.size(); ++i)
    if (es[i] > es[i - 1]) r.monotone = false;
  const bool floor = *std::max_element(es.begin(), es.end()) < 1e-9;
  if (hs.size() >= 2 && !floor) {
    r.slope = loglog_slope(hs, es);
    r.slope_fitted = true;
  }
  return r;
}

}  // namespace modetrans
