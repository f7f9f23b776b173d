// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "modetrans/adiabatic.hpp"
#include "modetrans/crossing.hpp"
#include "modetrans/error.hpp"
#include "modetrans/inner.hpp"
#include "modetrans/models.hpp"
#include "modetrans/oracle.hpp"
#include "modetrans/pcf.hpp"
#include "modetrans/special.hpp"
#include "modetrans/transition.hpp"

using namespace modetrans;

namespace {

int failures = 0;
double worst_drift = 0.0;
int trajectories = 0;

void report(int n, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %2d %s: %s (%s)\n", n, ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void run(int n, const char* name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    report(n, name, ok, detail);
  } catch (const std::exception& e) {
    report(n, name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void note_drift(const EmpiricalTransition& e) {
  worst_drift = std::max(worst_drift, e.max_flux_drift);
  trajectories += 2;
}

Scattering empirical_scattering(const Matrix2c& m) { return {-m(1, 0) / m(1, 1), m.determinant() / m(1, 1)}; }

// Dirac E = 0, U = x, p = 1.
std::pair<bool, std::string> dirac_transmission() {
  const PencilModel model = model_dirac(0.0, {0.0, 1.0}, 1.0);
  const CrossingData d = analyze_crossing(model);
  const Scattering as = reflection_transmission(transition_matrix(d.nu, d.w));
  const double t_exact = std::exp(-pi / 2.0);
  const double r_exact = std::sqrt(1.0 - std::exp(-pi));
  bool ok = std::abs(std::abs(as.transmission) - t_exact) < 1e-12 && std::abs(std::abs(as.reflection) - r_exact) < 1e-12;
  ok = ok && std::abs(t_exact - 0.207880) < 1e-5 && std::abs(r_exact - 0.978161) < 1e-5;
  std::string detail = "asymptotic |Tc| = " + fmt("%.6f", std::abs(as.transmission)) +
                       " |R| = " + fmt("%.6f", std::abs(as.reflection));
  for (auto [h, c] : {std::pair{1e-3, 5.0}, std::pair{1e-4, 2.0}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const EmpiricalTransition e = empirical_transition(model, d, h);
    const double secs = seconds_since(t0);
    note_drift(e);
    const Scattering s = empirical_scattering(e.m);
    const double et = std::abs(std::abs(s.transmission) - t_exact);
    const double er = std::abs(std::abs(s.reflection) - r_exact);
    const double bound = c * std::sqrt(h);
    ok = ok && et <= bound && er <= bound && secs <= 30.0;
    detail += "; hbar " + fmt("%g", h) + ": dT = " + fmt("%.2e", et) + " dR = " + fmt("%.2e", er) +
              " bound " + fmt("%.3f", bound) + " in " + fmt("%.2f", secs) + " s";
  }
  return {ok, detail};
}

std::pair<bool, std::string> landau_zener() {
  const PencilModel model = model_landau_zener(1.0, 1.0);
  const CrossingData d = analyze_crossing(model);
  const double m11 = std::abs(transition_matrix(d.nu, d.w).t(0, 0));
  const SweepResult s = hbar_sweep(model, d, {1e-2, 1e-3, 1e-4});
  for (const auto& r : s.rows) note_drift(r.emp);
  const bool ok = std::abs(m11 - std::exp(-pi / 2.0)) < 1e-12 && s.monotone && s.slope_fitted && s.slope >= 0.3;
  std::string detail = "|t11| = " + fmt("%.6f", m11) + "; errors";
  for (const auto& r : s.rows) detail += " " + fmt("%.2e", r.err);
  detail += "; slope " + fmt("%.3f", s.slope) + (s.monotone ? ", monotone" : ", not monotone");
  detail += "; oracle |m11| at 1e-4 = " + fmt("%.6f", std::abs(s.rows.back().emp.m(0, 0)));
  return {ok, detail};
}

std::pair<bool, std::string> algebra() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0, worst_unit = 0.0;
  for (int w : {1, -1}) {
    for (int k = 0; k < 50; ++k) {
      const double mag = 1e-6 * std::pow(1e7, k / 49.0);
      const TransitionMatrix tm = transition_matrix(cplx(0.0, w * mag));
      const double n2 = w > 0 ? 1.0 : -1.0;
      worst = std::max(worst, flux_residuals(tm.t, 1.0, n2).max());
      if (w > 0) worst_unit = std::max(worst_unit, unitarity_defect(tm.t));
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst <= 1e-12 && worst_unit <= 1e-12 && secs < 1.0;
  return {ok, "max identity residual " + fmt("%.2e", worst) + ", unitarity " + fmt("%.2e", worst_unit) + ", " +
                  fmt("%.3f", secs) + " s"};
}

std::pair<bool, std::string> limits() {
  double small = 0.0, large = 0.0;
  for (int w : {1, -1}) {
    const TransitionMatrix a = transition_matrix(cplx(0.0, w * 1e-7));
    small = std::max(small, (a.t - Matrix2c::Identity()).cwiseAbs().maxCoeff());
    large = std::max(large, limit_deviation(transition_matrix(cplx(0.0, w * 5.0))));
  }
  const bool ok = small <= 1e-3 && large <= 2e-2;
  return {ok, "|T - I| at 1e-7 = " + fmt("%.2e", small) + ", limit deviation at 5 = " + fmt("%.2e", large)};
}

// Value from one fixed regime, so a stencil never straddles a regime change.
cplx regime_eval(cplx nu, cplx t, PcfRegime r) {
  if (r == PcfRegime::series) return dnu_series(nu, t).value;
  if (r == PcfRegime::asymptotic) return dnu_asymptotic(nu, t).value;
  return dnu_integrated(nu, t, 24.0).d_nu;
}

std::pair<bool, std::string> pcf_quality() {
  const auto t0 = std::chrono::steady_clock::now();
  const double nus[] = {0.1, -0.1, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0};
  const double rays[] = {-pi / 4.0, 3.0 * pi / 4.0};
  const double radii[] = {0.2, 0.9, 1.7, 2.8, 4.0, 5.5, 7.0, 9.0, 11.5, 15.0};
  double ode = 0.0, rec = 0.0;
  int points = 0;
  for (double ni : nus) {
    for (double ray : rays) {
      for (double r : radii) {
        const cplx nu(0.0, ni), t = std::polar(r, ray);
        const PcfValue v = dnu_pair(nu, t);
        // five-point second derivative along the ray inside one regime
        // step a fixed fraction of the local wavelength 4 pi / |t|
        const cplx h = std::polar(8e-3 / std::max(1.0, r / 4.0), ray);
        cplx dd = 0.0;
        const double wts[] = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
        for (int k = -2; k <= 2; ++k) dd += wts[k + 2] * regime_eval(nu, t + double(k) * h, v.regime);
        dd /= h * h;
        const cplx coef = t * t / 4.0 - nu - 0.5;
        ode = std::max(ode, std::abs(dd - coef * v.d_nu) / (std::abs(dd) + std::abs(coef * v.d_nu)));
        const cplx rr = v.d_nu_p + t / 2.0 * v.d_nu - nu * v.d_nu_m1;
        rec = std::max(rec, std::abs(rr) / (std::abs(v.d_nu_p) + std::abs(t / 2.0 * v.d_nu) + std::abs(nu * v.d_nu_m1)));
        ++points;
      }
    }
  }
  double overlap = 0.0;
  for (double ni : {0.5, -0.5}) {
    for (double ray : rays) {
      for (int k = 0; k <= 30; ++k) {
        const cplx nu(0.0, ni), t = std::polar(5.0 + 0.1 * k, ray);
        const cplx s = dnu_series(nu, t).value, a = dnu_asymptotic(nu, t).value;
        overlap = std::max(overlap, std::abs(s - a) / std::abs(a));
      }
    }
  }
  double wr = 0.0;
  for (double ni : {0.5, -0.5, 2.0, -2.0}) {
    const cplx nu(0.0, ni), exact = pcf_wronskian(nu);
    for (double ray : {0.0, -pi / 4.0}) {
      for (int k = 0; k <= 38; ++k) {
        const cplx t = std::polar(0.5 + 0.25 * k, ray);
        const PcfValue p = dnu_pair(nu, t), m = dnu_pair(nu, -t);
        const cplx wt = -p.d_nu * m.d_nu_p - p.d_nu_p * m.d_nu;
        wr = std::max(wr, std::abs(wt - exact) / std::abs(exact));
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = points == 200 && ode <= 1e-8 && rec <= 1e-9 && overlap <= 1e-6 && wr <= 1e-9 && secs < 5.0;
  return {ok, std::to_string(points) + " points: ODE " + fmt("%.2e", ode) + ", recurrence " + fmt("%.2e", rec) +
                  ", overlap " + fmt("%.2e", overlap) + ", Wronskian drift " + fmt("%.2e", wr) + ", " +
                  fmt("%.2f", secs) + " s"};
}

std::pair<bool, std::string> inner_residual() {
  std::mt19937_64 rng(20261014);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const CrossingData models[] = {analyze_crossing(model_dirac(0.0, {0.0, 1.0}, 1.0)),
                                 analyze_crossing(model_landau_zener(1.0, 1.0)),
                                 analyze_crossing(model_dirac(0.0, {0.0, 1.0, 0.0, 0.2}, 1.3))};
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const CrossingData& d = models[k % 3];
    const cplx A(g(rng), g(rng)), B(g(rng), g(rng));
    const double tau = u(rng);
    worst = std::max(worst, inner_system_residual(d, inner_leading(d, A, B, tau), tau));
  }
  bool ok = worst <= 1e-8;
  std::string detail = "max residual " + fmt("%.2e", worst) + "; asymptote exponents";
  for (const CrossingData& d : {models[0], models[1]}) {
    for (Side side : {Side::minus, Side::plus}) {
      const cplx A(0.7, -0.2), B(-0.3, 0.5);
      const InnerAsymptote as = inner_asymptote(d, A, B, side);
      std::vector<double> taus, errs;
      for (int k = 0; k <= 12; ++k) {
        const double tau = side_sign(side) * 10.0 * std::pow(4.0, k / 12.0) - d.b;
        const InnerValue v = inner_leading(d, A, B, tau);
        const Vector2c p = asymptote_values(d, as, tau);
        const double scale = std::abs(as.c1) + std::abs(as.c2);
        taus.push_back(std::abs(tau + d.b));
        errs.push_back(std::max(std::abs(p(0) - v.a1), std::abs(p(1) - v.a2)) / scale);
      }
      const double e = -loglog_slope(taus, errs);
      ok = ok && std::abs(e - 1.0) <= 0.2;
      detail += " " + fmt("%.3f", e);
    }
  }
  return {ok, detail};
}

// Error between the canonical modes and their matching-zone form at
// tau = 2 hbar^{-gamma}; the factor 2 keeps tau outside the exclusion zone.
std::pair<bool, std::string> matching() {
  const double gamma = 0.1;
  bool ok = true;
  std::string detail = "exponents";
  const PencilModel models[] = {model_dirac(0.0, {0.0, 1.0}, 1.0), model_landau_zener(1.0, 1.0)};
  double identity = 0.0;
  for (const PencilModel& model : models) {
    const CrossingData d = analyze_crossing(model);
    double err[2] = {0.0, 0.0};
    const double hs[2] = {1e-3, 1e-4};
    for (int i = 0; i < 2; ++i) {
      const double h = hs[i];
      AdiabaticContext ctx(model, d, h, gamma);
      const double tau0 = 2.0 * std::pow(h, -gamma);
      for (Side side : {Side::minus, Side::plus}) {
        const double tau = side_sign(side) * tau0 - d.b;
        const double x = d.x_star + std::sqrt(h) * tau;
        for (int j = 1; j <= 2; ++j) {
          const CVector exact = leading_mode(ctx, j, side, x);
          const CVector rear = rearranged_outer(d, j, tau, h);
          err[i] = std::max(err[i], (exact - rear).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff());
        }
        // the matched combination of rearranged modes reproduces the inner asymptote
        const cplx A(0.7, -0.2), B(-0.3, 0.5);
        const MatchCoefficients mc = match_coefficients(d.nu, A, B);
        const Vector2c c = side == Side::minus ? mc.minus : mc.plus;
        const InnerAsymptote as = inner_asymptote(d, A, B, side);
        const Vector2c a = asymptote_values(d, as, tau);
        const CVector inner = (a(0) * d.frame.col(0) + a(1) * d.frame.col(1)) * std::polar(1.0, central_phase(d, tau, h));
        const CVector outer = c(0) * rearranged_outer(d, 1, tau, h) + c(1) * rearranged_outer(d, 2, tau, h);
        identity = std::max(identity, (outer - inner).cwiseAbs().maxCoeff() / inner.cwiseAbs().maxCoeff());
      }
    }
    const double e = std::log(err[0] / err[1]) / std::log(10.0);
    ok = ok && std::abs(e - 0.2) <= 0.15;
    detail += " " + model.name + " " + fmt("%.3f", e) + " (" + fmt("%.2e", err[0]) + " -> " + fmt("%.2e", err[1]) + ")";
  }
  ok = ok && identity <= 1e-10;
  detail += "; matched asymptote mismatch " + fmt("%.2e", identity);
  return {ok, detail};
}

std::pair<bool, std::string> spectators() {
  const PencilModel base = model_dirac(0.0, {0.0, 1.0}, 1.0);
  const PencilModel big = model_spectator(base, {{5.0, 0.3}, {-5.0, 0.3}});
  const CrossingData db = analyze_crossing(base), ds = analyze_crossing(big);
  double c_fit = 0.0;
  std::string detail = "dim " + std::to_string(big.dim()) + ";";
  for (double h : {1e-2, 1e-3}) {
    const EmpiricalTransition eb = empirical_transition(base, db, h);
    const EmpiricalTransition es = empirical_transition(big, ds, h);
    note_drift(eb);
    note_drift(es);
    const double diff = (eb.m - es.m).cwiseAbs().maxCoeff();
    c_fit = std::max(c_fit, diff / std::sqrt(h));
    detail += " hbar " + fmt("%g", h) + " diff " + fmt("%.2e", diff) + ";";
  }
  detail += " C = " + fmt("%.3f", c_fit);
  return {c_fit <= 5.0, detail};
}

std::pair<bool, std::string> flux() {
  const bool ok = trajectories > 0 && worst_drift <= 1e-7;
  return {ok, std::to_string(trajectories) + " trajectories at tol 1e-10, worst relative drift " + fmt("%.2e", worst_drift)};
}

std::pair<bool, std::string> spectral_properties() {
  const PencilModel models[] = {model_dirac(0.0, {0.0, 1.0}, 1.0), model_dirac(0.0, {0.0, 1.0, 0.0, 0.2}, 1.3),
                                model_landau_zener(1.0, 1.0),
                                model_spectator(model_dirac(0.0, {0.0, 1.0}, 1.0), {{5.0, 0.3}, {-5.0, 0.3}})};
  double k12 = 0.0, slope_err = 0.0, orth = 0.0;
  for (const PencilModel& m : models) {
    const CrossingData d = analyze_crossing(m);
    const CMatrix kp = matrix_elements(d.frame, poly_eval(m.k_coeffs, d.x_star, 1));
    const double scale = std::max(std::abs(kp(0, 0)), std::abs(kp(1, 1)));
    k12 = std::max(k12, std::abs(kp(0, 1)) / scale);
    for (double x : {-0.7, -0.3, 0.4, 0.8}) {
      const SpectralFrame f = frame_at(m, d, x);
      const Eigen::VectorXd s = eigenvalue_slopes(m, f);
      for (double h : {1e-3, 5e-4}) {
        const SpectralFrame fp = transport(m, f, x + h, h), fm = transport(m, f, x - h, h);
        for (Eigen::Index n = 0; n < f.size(); ++n) {
          const double fd = (fp.beta(n) - fm.beta(n)).real() / (2.0 * h);
          slope_err = std::max(slope_err, std::abs(fd - s(n)) / (h * h));
        }
      }
      const CMatrix gram = f.phi.adjoint() * m.metric * f.phi;
      for (Eigen::Index a = 0; a < f.size(); ++a)
        for (Eigen::Index b = 0; b < f.size(); ++b)
          orth = std::max(orth, std::abs(gram(a, b) - (a == b ? f.norm(a) : 0.0)));
    }
  }
  const bool ok = k12 <= 1e-8 && slope_err <= 10.0 && orth <= 1e-10;
  return {ok, "K'12/K'nn " + fmt("%.2e", k12) + ", slope error / step^2 " + fmt("%.2e", slope_err) +
                  ", G-orthogonality " + fmt("%.2e", orth)};
}

}  // namespace

int main() {
  run(1, "Dirac transmission", dirac_transmission);
  run(2, "Landau-Zener sweep", landau_zener);
  run(3, "transition-matrix algebra", algebra);
  run(4, "limits", limits);
  run(5, "PCF quality", pcf_quality);
  run(6, "inner solution", inner_residual);
  run(7, "matching consistency", matching);
  run(8, "spectator independence", spectators);
  run(9, "flux conservation", flux);
  run(10, "spectral properties", spectral_properties);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}
