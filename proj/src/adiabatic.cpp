#include "modetrans/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "modetrans/error.hpp"

namespace modetrans {

FrameTable::FrameTable(const PencilModel& model, const CrossingData& data, double step)
    : model_(&model), step_(step > 0 ? step : default_track_step(model)) {
  std::vector<SpectralFrame> left, right;
  SpectralFrame cur = data.frame;
  for (double x = data.x_star - step_;; x -= step_) {
    const double xt = std::max(x, model.x_min);
    if (xt >= cur.x) break;
    cur = transport(model, cur, xt, step_);
    left.push_back(cur);
    if (xt == model.x_min) break;
  }
  cur = data.frame;
  for (double x = data.x_star + step_;; x += step_) {
    const double xt = std::min(x, model.x_max);
    if (xt <= cur.x) break;
    cur = transport(model, cur, xt, step_);
    right.push_back(cur);
    if (xt == model.x_max) break;
  }
  frames_.assign(left.rbegin(), left.rend());
  frames_.push_back(data.frame);
  frames_.insert(frames_.end(), right.begin(), right.end());
}

const SpectralFrame& FrameTable::nearest(double x) const {
  auto it = std::lower_bound(frames_.begin(), frames_.end(), x,
                             [](const SpectralFrame& f, double v) { return f.x < v; });
  if (it == frames_.end()) return frames_.back();
  if (it == frames_.begin()) return frames_.front();
  auto prev = std::prev(it);
  return (x - prev->x <= it->x - x) ? *prev : *it;
}

SpectralFrame FrameTable::at(double x) const {
  const SpectralFrame& n = nearest(x);
  if (x == n.x) return n;
  return transport(*model_, n, x, step_);
}

AdiabaticContext::AdiabaticContext(const PencilModel& m, const CrossingData& d, double h, double g,
                                   PhaseModel ph)
    : model(&m), data(d), hbar(h), gamma(g), phase(ph) {
  if (!(hbar > 0)) throw Error(Errc::domain, "hbar must be positive");
  table = std::make_shared<FrameTable>(m, d);
}

namespace {

double split_point(const AdiabaticContext& ctx) { return ctx.data.x_star - std::sqrt(ctx.hbar) * ctx.data.b; }

EigPair label(const AdiabaticContext& ctx, double x, cplx e0, cplx e1) {
  const bool first_upper = e0.real() > e1.real() || (e0.real() == e1.real() && e0.imag() >= e1.imag());
  const cplx upper = first_upper ? e0 : e1;
  const cplx lower = first_upper ? e1 : e0;
  if (x < split_point(ctx)) return {upper, lower};
  return {lower, upper};
}

EigPair exact_pair(const AdiabaticContext& ctx, double x) {
  const PencilModel& m = *ctx.model;
  CMatrix K = poly_eval(m.k_coeffs, x);
  if (!m.b_coeffs.empty()) K += std::sqrt(ctx.hbar) * poly_eval(m.b_coeffs, x);
  const CMatrix M = m.metric.partialPivLu().solve(K);
  // scaled, so samples next to x* do not reach subnormal entries
  const double scale = M.norm();
  if (scale == 0.0) return label(ctx, x, 0.0, 0.0);
  Eigen::ComplexEigenSolver<CMatrix> es(M / scale, false);
  if (es.info() != Eigen::Success) throw Error(Errc::defective, "eigensolver failed");
  const CVector ev = es.eigenvalues() * scale;
  if (ev.size() == 2) return label(ctx, x, ev(0), ev(1));
  const SpectralFrame& anchor = ctx.table->nearest(x);
  std::vector<std::pair<double, Eigen::Index>> dist;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    dist.emplace_back(std::min(std::abs(ev(i) - anchor.beta(0)), std::abs(ev(i) - anchor.beta(1))), i);
  }
  std::partial_sort(dist.begin(), dist.begin() + 2, dist.end());
  return label(ctx, x, ev(dist[0].second), ev(dist[1].second));
}

EigPair main_pair(const AdiabaticContext& ctx, double x) {
  const double r = std::pow(ctx.hbar, 0.5 - ctx.gamma);
  if (std::abs(x - ctx.data.x_star) >= r) return outer_eigs(*ctx.model, ctx.table->at(x), ctx.hbar);
  return inner_main(ctx.data, (x - ctx.data.x_star) / std::sqrt(ctx.hbar), ctx.hbar);
}

template <class F>
double integrate_pieces(F f, double a, double b, std::vector<double> breaks) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double c : breaks)
    if (c > a && c < b) pts.push_back(c);
  pts.push_back(b);
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] - pts[i] <= 0) continue;
    double err = 0.0, l1 = 0.0;
    const double v = ts.integrate(f, pts[i], pts[i + 1], 1e-12, &err, &l1);
    if (!std::isfinite(v)) throw Error(Errc::quadrature, "phase quadrature failed; refine the model interval");
    total += v;
  }
  return sign * total;
}

std::vector<double> breakpoints(const AdiabaticContext& ctx) {
  std::vector<double> br{split_point(ctx)};
  if (ctx.data.w < 0) {
    br.push_back(kappa(ctx.data, Side::minus, ctx.hbar).real());
    br.push_back(kappa(ctx.data, Side::plus, ctx.hbar).real());
  }
  if (ctx.phase == PhaseModel::main) {
    const double r = std::pow(ctx.hbar, 0.5 - ctx.gamma);
    br.push_back(ctx.data.x_star - r);
    br.push_back(ctx.data.x_star + r);
  }
  return br;
}

}  // namespace

EigPair pair_eigs(const AdiabaticContext& ctx, double x) {
  return ctx.phase == PhaseModel::exact ? exact_pair(ctx, x) : main_pair(ctx, x);
}

double lower_limit(const AdiabaticContext& ctx, Side side) { return kappa(ctx.data, side, ctx.hbar).real(); }

double phase_sum(const AdiabaticContext& ctx, double x) {
  auto f = [&](double s) {
    const auto e = pair_eigs(ctx, s);
    return (e.mode1 + e.mode2).real();
  };
  return integrate_pieces(f, split_point(ctx), x, breakpoints(ctx));
}

double phase_diff(const AdiabaticContext& ctx, Side side, double x) {
  auto f = [&](double s) {
    const auto e = pair_eigs(ctx, s);
    return (e.mode1 - e.mode2).real();
  };
  return integrate_pieces(f, lower_limit(ctx, side), x, breakpoints(ctx));
}

double mode_phase(const AdiabaticContext& ctx, int j, Side side, double x) {
  if (j != 1 && j != 2) throw Error(Errc::domain, "mode index must be 1 or 2");
  const double s = phase_sum(ctx, x);
  const double d = phase_diff(ctx, side, x);
  return (s + (j == 1 ? d : -d)) / (2.0 * ctx.hbar);
}

double default_validity_radius(const AdiabaticContext& ctx) { return exclusion_radius(ctx.data, ctx.hbar); }

namespace {

void check_outer_point(const AdiabaticContext& ctx, int j, Side side, double x) {
  if (j != 1 && j != 2) throw Error(Errc::domain, "mode index must be 1 or 2");
  const double off = (x - ctx.data.x_star) * side_sign(side);
  if (off <= 0) throw Error(Errc::validity, "x is on the other side of the crossing");
  if (off < default_validity_radius(ctx)) throw Error(Errc::validity, "x is inside the exclusion zone");
}

CVector mode_vector(const AdiabaticContext& ctx, int j, double x, ModeBasis basis) {
  SpectralFrame f = ctx.table->at(x);
  if (basis == ModeBasis::unperturbed) return f.col(j - 1) / std::sqrt(std::abs(f.norm(j - 1)));
  SpectralFrame p = solve_perturbed(*ctx.model, x, ctx.hbar);
  align_to(p, f, ctx.model->metric);
  if (!p.is_real(j - 1)) throw Error(Errc::validity, "perturbed mode is not real at x");
  return p.col(j - 1) / std::sqrt(std::abs(p.norm(j - 1)));
}

}  // namespace

CVector leading_mode(const AdiabaticContext& ctx, int j, Side side, double x, ModeBasis basis) {
  check_outer_point(ctx, j, side, x);
  return mode_vector(ctx, j, x, basis) * std::polar(1.0, mode_phase(ctx, j, side, x));
}

double mode_residual(const AdiabaticContext& ctx, int j, Side side, double x) {
  check_outer_point(ctx, j, side, x);
  const PencilModel& m = *ctx.model;
  const double h = 1e-5 * (m.x_max - m.x_min);
  const CVector v = mode_vector(ctx, j, x, ModeBasis::unperturbed);
  const SpectralFrame f = ctx.table->at(x);
  SpectralFrame fp = transport(m, f, x + h, h), fm = transport(m, f, x - h, h);
  const CVector dv = (fp.col(j - 1) - fm.col(j - 1)) / (2.0 * h);
  const auto e = pair_eigs(ctx, x);
  const cplx beta = j == 1 ? e.mode1 : e.mode2;
  CMatrix K = poly_eval(m.k_coeffs, x);
  if (!m.b_coeffs.empty()) K += std::sqrt(ctx.hbar) * poly_eval(m.b_coeffs, x);
  const CVector r = -I * ctx.hbar * (m.metric * dv) + beta.real() * (m.metric * v) - K * v;
  return r.norm() / (std::max(K.norm(), 1e-300) * v.norm());
}

double central_phase(const CrossingData& d, double tau, double hbar) {
  const double u = tau + d.b;
  return d.beta0 * u / std::sqrt(hbar) + d.beta_av0 * u + 0.5 * d.beta_av1 * (tau * tau - d.b * d.b);
}

CVector rearranged_outer(const CrossingData& d, int j, double tau, double hbar) {
  if (j != 1 && j != 2) throw Error(Errc::domain, "mode index must be 1 or 2");
  const double u = tau + d.b;
  if (u == 0.0) throw Error(Errc::domain, "rearranged mode at tau = -b");
  const double lg = std::log(std::abs(std::sqrt(2.0 * d.q) * u));
  const double s = j == 1 ? 1.0 : -1.0;
  const cplx ph = std::exp(I * (central_phase(d, tau, hbar) + s * d.zeta - s * d.q * u * u / 2.0) - s * d.nu * lg);
  const auto c = j - 1;
  return d.frame.col(c) * (ph / std::sqrt(std::abs(d.frame.norm(c))));
}

namespace {

struct Levels {
  std::vector<cplx> theta, c;
  std::vector<CVector> phi;
};

// Terms up to n_max at frame f; dphi[m] is d/dx Phi[m] where available.
Levels build_levels(const PencilModel& model, const SpectralFrame& f, int a, int n_max,
                    const std::vector<CVector>& dphi) {
  const int k = 1 - a;
  const auto d = f.size();
  const CMatrix& G = model.metric;
  const CMatrix K = poly_eval(model.k_coeffs, f.x);
  const CMatrix B = model.b_coeffs.empty() ? CMatrix::Zero(d, d) : poly_eval(model.b_coeffs, f.x);
  const CVector pa = f.col(a), pk = f.col(k);
  const double na = f.norm(a), nk = f.norm(k);
  const cplx gap = f.beta(a) - f.beta(k);
  Levels L;
  L.theta.push_back(f.beta(a));
  L.c.push_back(0.0);
  L.phi.push_back(pa);
  for (int n = 1; n <= n_max; ++n) {
    const CVector bp = B * L.phi[n - 1];
    CVector gd = CVector::Zero(d);
    if (n >= 2) gd = G * dphi.at(n - 2);
    const cplx th = (pa.dot(bp) + I * pa.dot(gd)) / na;
    L.theta.push_back(th);
    cplx acc = 0.0;
    for (int i = 1; i <= n - 1; ++i) acc += L.theta[i] * L.c[n - i];
    const cplx cn = (pk.dot(bp) - nk * acc + I * pk.dot(gd)) / (gap * nk);
    L.c.push_back(cn);
    CVector rhs = -bp - I * gd;
    for (int i = 1; i <= n; ++i) rhs += L.theta[i] * (G * L.phi[n - i]);
    const CVector perp = complement_solve(K, G, f, f.beta(a), rhs);
    L.phi.push_back(cn * pk + perp);
  }
  return L;
}

}  // namespace

HigherTerms higher_terms(const PencilModel& model, const SpectralFrame& frame, int j, int n_max, double fd_step) {
  if (j != 1 && j != 2) throw Error(Errc::domain, "mode index must be 1 or 2");
  if (n_max < 0 || n_max > 3) throw Error(Errc::domain, "higher_terms supports orders 0..3");
  const int a = j - 1;
  const double h = fd_step > 0 ? fd_step : 1e-4 * (model.x_max - model.x_min);
  std::vector<CVector> dphi;
  if (n_max >= 2) {
    const int need = n_max - 2;
    const SpectralFrame fp = transport(model, frame, frame.x + h, h);
    const SpectralFrame fm = transport(model, frame, frame.x - h, h);
    const Levels lp = build_levels(model, fp, a, need, {});
    const Levels lm = build_levels(model, fm, a, need, {});
    for (int m = 0; m <= need; ++m) dphi.push_back((lp.phi[m] - lm.phi[m]) / (2.0 * h));
  }
  const Levels L = build_levels(model, frame, a, n_max, dphi);
  return {frame.x, L.theta, L.c, L.phi};
}

HigherTerms higher_terms(const AdiabaticContext& ctx, int j, int n_max, double x) {
  return higher_terms(*ctx.model, ctx.table->at(x), j, n_max);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw Error(Errc::domain, "slope fit needs two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(std::abs(x[i])), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error(Errc::domain, "degenerate slope fit");
  return (n * sxy - sx * sy) / den;
}

SingularityReport singularity_estimate(const AdiabaticContext& ctx, int j, int n,
                                       const std::vector<double>& offsets, Side side, double slack) {
  SingularityReport r;
  r.order = n;
  std::vector<double> th, ph, cc;
  for (double off : offsets) {
    const auto t = higher_terms(ctx, j, n, ctx.data.x_star + side_sign(side) * off);
    th.push_back(std::abs(t.theta[n]));
    ph.push_back(t.phi[n].norm());
    cc.push_back(std::abs(t.c[n]));
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto fit = [&](const std::vector<double>& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    return mx < 1e-13 ? nan : loglog_slope(offsets, v);
  };
  r.theta_slope = n == 0 ? 0.0 : fit(th);
  r.phi_slope = n == 0 ? 0.0 : fit(ph);
  r.c_slope = n == 0 ? 0.0 : fit(cc);
  r.vanishing = std::isnan(r.theta_slope) && std::isnan(r.phi_slope);
  const bool th_ok = std::isnan(r.theta_slope) || std::abs(r.theta_slope + (n - 1)) <= slack || n == 0;
  const bool ph_ok = std::isnan(r.phi_slope) || std::abs(r.phi_slope + n) <= slack;
  r.ok = th_ok && ph_ok;
  return r;
}

double berry_phase(const std::vector<SpectralFrame>& frames, const CMatrix& G, Eigen::Index j) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    const cplx ov = g_inner(frames[k].phi.col(j), frames[k + 1].phi.col(j), G) / frames[k].norm(j);
    acc += std::arg(ov);
  }
  return acc;
}

}  // namespace modetrans
