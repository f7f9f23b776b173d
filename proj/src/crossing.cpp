#include "modetrans/crossing.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "modetrans/error.hpp"

namespace modetrans {

namespace {

double wrap(double a) {
  a = std::fmod(a + pi, 2.0 * pi);
  if (a < 0) a += 2.0 * pi;
  return a - pi;
}

struct Bracket {
  std::size_t k;
  Eigen::Index a, b;
};

}  // namespace

Degeneracy locate_degeneracy(const PencilModel& model, int scan_points) {
  validate(model);
  std::vector<double> grid(scan_points + 1);
  for (int k = 0; k <= scan_points; ++k) {
    grid[k] = model.x_min + (model.x_max - model.x_min) * k / scan_points;
  }
  const auto frames = track_modes(model, grid);
  const auto d = model.dim();

  std::vector<Bracket> found;
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
        const auto& f0 = frames[k];
        const auto& f1 = frames[k + 1];
        if (!f0.is_real(a) || !f0.is_real(b) || !f1.is_real(a) || !f1.is_real(b)) continue;
        const double d0 = (f0.beta(a) - f0.beta(b)).real();
        const double d1 = (f1.beta(a) - f1.beta(b)).real();
        if (d0 * d1 < 0 || d1 == 0.0 || (d0 == 0.0 && k == 0)) found.push_back({k, a, b});
      }
    }
  }
  if (found.empty()) throw Error(Errc::no_degeneracy, "no eigenvalue crossing in [x_min, x_max]");
  if (found.size() > 1) {
    throw Error(Errc::multiple_crossings, std::to_string(found.size()) + " crossings in the interval");
  }
  const auto br = found.front();
  const SpectralFrame& left = frames[br.k];
  auto diff = [&](double x) {
    if (x == left.x) return (left.beta(br.a) - left.beta(br.b)).real();
    const SpectralFrame f = transport(model, left, x, default_track_step(model));
    return (f.beta(br.a) - f.beta(br.b)).real();
  };
  double x_star = left.x;
  if (diff(frames[br.k + 1].x) == 0.0) {
    x_star = frames[br.k + 1].x;
  } else if (diff(left.x) != 0.0) {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(diff, left.x, frames[br.k + 1].x,
                                               boost::math::tools::eps_tolerance<double>(52), iters);
    x_star = 0.5 * (r.first + r.second);
  }
  const SpectralFrame fs = solve_pencil(model, x_star);
  const auto s = eigenvalue_slopes(model, fs);
  // slope difference from the tracked branches near x*
  const double h = 1e-4 * (model.x_max - model.x_min);
  const double xl = std::max(model.x_min, x_star - h), xr = std::min(model.x_max, x_star + h);
  const double q = std::abs(diff(xr) - diff(xl)) / (2.0 * (xr - xl));
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (q < 1e-8 * scale) throw Error(Errc::degenerate_slope, "crossing with vanishing slope difference");
  return {x_star, q};
}

double theta_a_of(cplx b12, double n1, int w) { return std::arg(b12 / n1) + pi / 4.0 * (1 - w); }

SpectralFrame gauge_fix(const SpectralFrame& frame, const CMatrix& B, double* theta_out) {
  SpectralFrame f = frame;
  const cplx b12 = f.phi.col(0).dot(B * f.phi.col(1));
  const int w = f.norm(0) * f.norm(1) > 0 ? 1 : -1;
  double theta = 0.0;
  if (std::abs(b12) > 0.0) theta = theta_a_of(b12, f.norm(0), w);
  f.phi.col(0) *= std::polar(1.0, theta / 2.0);
  f.phi.col(1) *= std::polar(1.0, -theta / 2.0);
  if (theta_out) *theta_out = theta;
  return f;
}

CrossingData crossing_parameters(const PencilModel& model, double x_star) {
  validate(model);
  SpectralFrame f = solve_pencil(model, x_star);
  const auto d = f.size();
  const double scale = std::max(1.0, f.beta.cwiseAbs().maxCoeff());

  Eigen::Index ia = -1, ib = -1;
  double best = 1e300;
  for (Eigen::Index a = 0; a < d; ++a) {
    if (!f.is_real(a)) continue;
    for (Eigen::Index b = a + 1; b < d; ++b) {
      if (!f.is_real(b)) continue;
      const double g = std::abs(f.beta(a) - f.beta(b));
      if (g < best) {
        best = g;
        ia = a;
        ib = b;
      }
    }
  }
  if (ia < 0 || best > 1e-6 * scale) throw Error(Errc::no_degeneracy, "x_star is not a degeneracy point");

  const auto slopes = eigenvalue_slopes(model, f);
  if (slopes(ia) > slopes(ib)) std::swap(ia, ib);
  const double q = 0.5 * (slopes(ib) - slopes(ia));
  if (q < 1e-8 * std::max(1.0, slopes.cwiseAbs().maxCoeff())) {
    throw Error(Errc::degenerate_slope, "crossing with vanishing slope difference");
  }

  // pair first, spectators after in ascending order
  std::vector<Eigen::Index> order{ia, ib};
  for (Eigen::Index a = 0; a < d; ++a)
    if (a != ia && a != ib) order.push_back(a);
  SpectralFrame g;
  g.x = x_star;
  g.beta.resize(d);
  g.phi.resize(d, d);
  g.norm.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    g.beta(k) = f.beta(order[k]);
    g.phi.col(k) = f.phi.col(order[k]);
    g.norm(k) = f.norm(order[k]);
  }
  const double b0 = 0.5 * (g.beta(0).real() + g.beta(1).real());
  g.beta(0) = g.beta(1) = b0;

  const CMatrix B = model.b_coeffs.empty() ? CMatrix::Zero(d, d) : poly_eval(model.b_coeffs, x_star);
  CrossingData c;
  c.x_star = x_star;
  c.beta0 = b0;
  c.frame = gauge_fix(g, B, &c.theta_a_raw);
  c.n1 = c.frame.norm(0);
  c.n2 = c.frame.norm(1);
  c.w = c.n1 * c.n2 > 0 ? 1 : -1;
  c.q = q;

  const CMatrix Be = matrix_elements(c.frame, B);
  c.b11 = Be(0, 0);
  c.b22 = Be(1, 1);
  c.b12 = Be(0, 1);
  c.b21 = Be(1, 0);
  c.theta_a = std::abs(c.b12) > 0 ? wrap(theta_a_of(c.b12, c.n1, c.w)) : 0.0;
  c.b = (c.b22.real() / c.n2 - c.b11.real() / c.n1) / (2.0 * q);
  c.p2 = std::norm(c.b12) / std::abs(c.n1 * c.n2);
  c.p = std::sqrt(c.p2);
  c.nu = I * c.b12 * c.b21 / (2.0 * q * c.n1 * c.n2);
  c.nu = cplx(0.0, c.nu.imag());
  c.sigma = std::polar(std::sqrt(2.0 * q), -pi / 4.0);
  const double an = std::abs(c.nu);
  c.zeta = an > 0 ? ((-c.nu / 2.0 + c.nu * std::log(an) / 2.0) / I).real() : 0.0;

  const CMatrix K1 = matrix_elements(c.frame, poly_eval(model.k_coeffs, x_star, 1));
  c.beta_av0 = 0.5 * (c.b11.real() / c.n1 + c.b22.real() / c.n2);
  c.beta_av1 = 0.5 * (K1(0, 0).real() / c.n1 + K1(1, 1).real() / c.n2);
  for (std::size_t n = 0; n < model.k_coeffs.size(); ++n) {
    c.taylor_k.push_back(taylor_coeff(model.k_coeffs, x_star, static_cast<int>(n)));
  }
  return c;
}

CrossingData analyze_crossing(const PencilModel& model) {
  return crossing_parameters(model, locate_degeneracy(model).x_star);
}

cplx kappa(const CrossingData& c, Side side, double hbar) {
  const double s = side_sign(side);
  const double h = std::sqrt(hbar);
  if (c.w > 0) return c.x_star + h * cplx(-c.b, s * c.p / c.q);
  return c.x_star + h * (-c.b + s * c.p / c.q);
}

SpectralFrame frame_at(const PencilModel& model, const CrossingData& data, double x) {
  if (x == data.x_star) return data.frame;
  return transport(model, data.frame, x, default_track_step(model));
}

CVector complement_solve(const CMatrix& K, const CMatrix& G, const SpectralFrame& frame, cplx beta,
                         const CVector& r) {
  const auto d = K.rows();
  if (d <= 2) return CVector::Zero(d);
  const double scale = std::max(1.0, frame.beta.cwiseAbs().maxCoeff());
  double gap = 1e300;
  for (Eigen::Index s = 2; s < d; ++s) gap = std::min(gap, std::abs(frame.beta(s) - beta));
  if (gap < 1e-8 * scale) throw Error(Errc::spectral_gap, "spectator eigenvalue meets the crossing pair");
  CVector rp = r;
  CMatrix A = K - beta * G;
  for (Eigen::Index j = 0; j < 2; ++j) {
    const CVector gp = G * frame.phi.col(j);
    rp -= gp * (frame.phi.col(j).dot(r) / frame.norm(j));
    const cplx shift = (scale - (frame.beta(j) - beta)) / frame.norm(j);
    A += shift * gp * gp.adjoint();
  }
  CVector y = A.partialPivLu().solve(rp);
  for (Eigen::Index j = 0; j < 2; ++j) {
    y -= frame.phi.col(j) * (g_inner(frame.phi.col(j), y, G) / frame.norm(j));
  }
  return y;
}

EigPair perturbed_eigs_outer(const PencilModel& model, const CrossingData& data, double x, double hbar,
                             double gamma, bool check) {
  if (!(hbar > 0)) throw Error(Errc::domain, "hbar must be positive");
  if (check && std::abs(x - data.x_star) < std::pow(hbar, 0.5 - gamma)) {
    throw Error(Errc::validity, "x is inside the inner zone");
  }
  return outer_eigs(model, frame_at(model, data, x), hbar);
}

EigPair outer_eigs(const PencilModel& model, const SpectralFrame& f, double hbar) {
  const double x = f.x;
  const auto d = f.size();
  const CMatrix B = model.b_coeffs.empty() ? CMatrix::Zero(d, d) : poly_eval(model.b_coeffs, x);
  const CMatrix K = poly_eval(model.k_coeffs, x);
  const CMatrix Be = matrix_elements(f, B);
  cplx out[2];
  for (int j = 0; j < 2; ++j) {
    const int k = 1 - j;
    const cplx bj = f.beta(j), bk = f.beta(k);
    const double nj = f.norm(j), nk = f.norm(k);
    cplx v = bj + std::sqrt(hbar) * Be(j, j) / nj;
    const cplx pair = Be(j, k) * Be(k, j) / ((bj - bk) * nj * nk);
    const CVector perp = complement_solve(K, model.metric, f, bj, -(B * f.phi.col(j)));
    const cplx spect = f.phi.col(j).dot(B * perp) / nj;
    v += hbar * (pair + spect);
    out[j] = v;
  }
  return {out[0], out[1]};
}

InnerEigs perturbed_eigs_inner(const CrossingData& c, double tau, double hbar, double gamma_p, bool check) {
  if (!(hbar > 0)) throw Error(Errc::domain, "hbar must be positive");
  if (check && std::abs(tau) > std::pow(hbar, -1.0 / 6.0 + gamma_p)) {
    throw Error(Errc::validity, "tau is outside the inner zone");
  }
  const double u = tau + c.b;
  const double rad = u * u * c.q * c.q + c.p2 * c.w;
  const cplx root = rad >= 0 ? cplx(std::sqrt(rad), 0.0) : cplx(0.0, std::sqrt(-rad));
  const double base = c.beta_av(tau);
  const double h = std::sqrt(hbar);
  return {c.beta0 + h * (base + root), c.beta0 + h * (base - root), rad < 0};
}

InnerEigs perturbed_eigs_inner_large(const CrossingData& c, double tau, double hbar) {
  const double u = std::abs(tau + c.b);
  if (u == 0.0) throw Error(Errc::domain, "large-tau form at tau = -b");
  const cplx root = c.q * u - I * c.nu / u;
  const double h = std::sqrt(hbar);
  const double base = c.beta_av(tau);
  return {c.beta0 + h * (base + root), c.beta0 + h * (base - root), false};
}

EigPair inner_main(const CrossingData& c, double tau, double hbar) {
  const auto e = perturbed_eigs_inner(c, tau, hbar, 0.0, false);
  if (tau + c.b < 0) return {e.upper, e.lower};
  return {e.lower, e.upper};
}

MatchingCheck eig_matching_check(const PencilModel& model, const CrossingData& data, double hbar, double gamma,
                                 double gamma_p) {
  const double lo = std::pow(hbar, -gamma);
  const double hi = std::pow(hbar, -1.0 / 6.0 + gamma_p);
  if (!(lo < hi)) throw Error(Errc::validity, "outer and inner zones do not overlap for these gamma values");
  MatchingCheck m;
  m.tau = std::sqrt(lo * hi);
  m.x = data.x_star + std::sqrt(hbar) * m.tau;
  const auto outer = perturbed_eigs_outer(model, data, m.x, hbar, gamma, true);
  const auto inner = inner_main(data, m.tau, hbar);
  m.discrepancy = std::max(std::abs(outer.mode1 - inner.mode1), std::abs(outer.mode2 - inner.mode2));
  m.scale = hbar * (1.0 + m.tau * m.tau) + std::sqrt(hbar) * std::pow(m.tau, -3.0);
  return m;
}

double exclusion_radius(const CrossingData& c, double hbar) {
  return 3.0 * std::sqrt(hbar) * std::max(std::abs(c.b) + c.p / c.q, 1.0);
}

}  // namespace modetrans
