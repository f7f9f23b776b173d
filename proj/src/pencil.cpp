#include "modetrans/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "modetrans/error.hpp"

namespace modetrans {

namespace {

bool hermitian(const CMatrix& m, double rel) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= rel * scale;
}

double binom_falling(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= n - i;
  return r;
}

CMatrix hat(const PencilModel& m, double x, double hbar) {
  CMatrix K = poly_eval(m.k_coeffs, x);
  if (!m.b_coeffs.empty()) K += std::sqrt(hbar) * poly_eval(m.b_coeffs, x);
  return K;
}

void g_normalise(CVector& v, const CMatrix& G, double& n_out) {
  const double n = g_inner(v, v, G).real();
  v /= std::sqrt(std::abs(n));
  n_out = n > 0 ? 1.0 : -1.0;
}

}  // namespace

void validate(const PencilModel& model) {
  const auto d = model.metric.rows();
  if (d < 2 || model.metric.cols() != d) throw Error(Errc::domain, "metric must be square, dim >= 2");
  if (model.k_coeffs.empty()) throw Error(Errc::domain, "K has no coefficients");
  for (const auto* set : {&model.k_coeffs, &model.b_coeffs}) {
    for (const auto& c : *set) {
      if (c.rows() != d || c.cols() != d) throw Error(Errc::domain, "coefficient shape mismatch");
      if (!hermitian(c, 1e-12)) throw Error(Errc::domain, "coefficient matrix is not Hermitian");
    }
  }
  if (!hermitian(model.metric, 1e-12)) throw Error(Errc::domain, "metric is not Hermitian");
  if (!(model.x_min < model.x_max)) throw Error(Errc::domain, "empty interval");
  Eigen::JacobiSVD<CMatrix> svd(model.metric);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * s(0)) throw Error(Errc::metric_singular, "metric is not invertible");
}

CMatrix poly_eval(const std::vector<CMatrix>& coeffs, double x, int deriv) {
  if (coeffs.empty()) return CMatrix();
  CMatrix r = CMatrix::Zero(coeffs[0].rows(), coeffs[0].cols());
  for (int n = static_cast<int>(coeffs.size()) - 1; n >= deriv; --n) {
    r = r * x + binom_falling(n, deriv) * coeffs[n];
  }
  return r;
}

CMatrix taylor_coeff(const std::vector<CMatrix>& coeffs, double x0, int n) {
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return poly_eval(coeffs, x0, n) / fact;
}

PencilEval eval_pencil(const PencilModel& model, double x, double hbar) {
  if (x < model.x_min || x > model.x_max) throw Error(Errc::domain, "x outside the model interval");
  if (!(hbar >= 0)) throw Error(Errc::domain, "hbar must be non-negative");
  PencilEval e;
  e.K = poly_eval(model.k_coeffs, x);
  e.B = model.b_coeffs.empty() ? CMatrix::Zero(model.dim(), model.dim()) : poly_eval(model.b_coeffs, x);
  e.G = model.metric;
  e.Khat = e.K + std::sqrt(hbar) * e.B;
  return e;
}

cplx g_inner(const CVector& u, const CVector& v, const CMatrix& G) { return u.dot(G * v); }

SpectralFrame solve_pencil(const CMatrix& K, const CMatrix& G, const CMatrix* Kp, double x,
                           const PencilTolerances& tol) {
  const auto d = K.rows();
  Eigen::PartialPivLU<CMatrix> lu(G);
  const CMatrix A = lu.solve(K);
  Eigen::ComplexEigenSolver<CMatrix> es(A);
  if (es.info() != Eigen::Success) throw Error(Errc::defective, "eigensolver failed");

  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), 0);
  const CVector& lam = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (lam(a).real() != lam(b).real()) return lam(a).real() < lam(b).real();
    return lam(a).imag() < lam(b).imag();
  });

  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double gnorm = G.cwiseAbs().rowwise().sum().maxCoeff();
  const double knorm = K.cwiseAbs().rowwise().sum().maxCoeff();

  SpectralFrame f;
  f.x = x;
  f.beta.resize(d);
  f.phi.resize(d, d);
  f.norm = Eigen::VectorXd::Zero(d);
  std::vector<bool> real(d);
  Eigen::VectorXd width = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    f.beta(i) = lam(order[i]);
    f.phi.col(i) = es.eigenvectors().col(order[i]);
    real[i] = std::abs(f.beta(i).imag()) <= 1e-9 * scale;
  }

  // Clusters of close real eigenvalues are resolved inside their invariant
  // subspace, where the vectors returned by the solver are unreliable.
  const double cluster_gap = 1e-6 * scale;
  Eigen::Index i = 0;
  while (i < d) {
    Eigen::Index j = i + 1;
    if (real[i]) {
      while (j < d && real[j] && (f.beta(j).real() - f.beta(j - 1).real()) < cluster_gap) ++j;
    }
    const auto m = j - i;
    if (m == 1) {
      if (real[i]) {
        CVector v = f.phi.col(i);
        const double n = g_inner(v, v, G).real();
        if (std::abs(n) < tol.metric_floor * v.squaredNorm() * gnorm) {
          throw Error(Errc::metric_degenerate, "(phi, G phi) vanishes for a real eigenvalue");
        }
        g_normalise(v, G, f.norm(i));
        f.phi.col(i) = v;
        f.beta(i) = f.beta(i).real();
      } else {
        f.phi.col(i).normalize();
      }
      i = j;
      continue;
    }

    CMatrix V = f.phi.middleCols(i, m);
    Eigen::SelfAdjointEigenSolver<CMatrix> ms(V.adjoint() * G * V);
    const auto& lamg = ms.eigenvalues();
    if (lamg.cwiseAbs().minCoeff() < tol.metric_floor * lamg.cwiseAbs().maxCoeff()) {
      throw Error(Errc::metric_degenerate, "metric degenerate on a cluster subspace");
    }
    Eigen::VectorXd eta = lamg.array().sign();
    CMatrix W = V * ms.eigenvectors() * lamg.cwiseAbs().cwiseSqrt().cwiseInverse().asDiagonal();

    auto restricted = [&](const CMatrix& M) {
      const CMatrix R = eta.asDiagonal() * (W.adjoint() * M * W);
      Eigen::ComplexEigenSolver<CMatrix> rs(R);
      return rs;
    };
    auto rs = restricted(K);
    const auto& rv = rs.eigenvalues();
    double spread = 0.0;
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = a + 1; b < m; ++b) spread = std::max(spread, std::abs(rv(a) - rv(b)));
    CMatrix C = rs.eigenvectors();
    if (Kp != nullptr && spread < tol.degeneracy * scale) {
      auto ps = restricted(*Kp);
      C = ps.eigenvectors();
    }
    CMatrix U = W * C;
    // Gram-Schmidt in the G form.
    for (Eigen::Index a = 0; a < m; ++a) {
      CVector v = U.col(a);
      for (Eigen::Index b = 0; b < a; ++b) {
        const CVector u = U.col(b);
        v -= (g_inner(u, v, G) / f.norm(i + b)) * u;
      }
      const double n = g_inner(v, v, G).real();
      if (std::abs(n) < tol.metric_floor * v.squaredNorm() * gnorm) {
        throw Error(Errc::metric_degenerate, "(phi, G phi) vanishes inside a cluster");
      }
      g_normalise(v, G, f.norm(i + a));
      U.col(a) = v;
    }
    std::vector<std::pair<double, Eigen::Index>> rq;
    for (Eigen::Index a = 0; a < m; ++a) {
      const CVector v = U.col(a);
      rq.emplace_back((v.dot(K * v) / g_inner(v, v, G)).real(), a);
    }
    std::sort(rq.begin(), rq.end());
    Eigen::VectorXd nrm = f.norm.segment(i, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      f.beta(i + a) = rq[a].first;
      f.phi.col(i + a) = U.col(rq[a].second);
      f.norm(i + a) = nrm(rq[a].second);
      width(i + a) = rq.back().first - rq.front().first;
    }
    i = j;
  }

  for (Eigen::Index a = 0; a < d; ++a) {
    const CVector v = f.phi.col(a);
    const double r = (K * v - f.beta(a) * (G * v)).norm();
    const double bound = std::max(tol.residual, width(a) / scale) * (knorm + std::abs(f.beta(a)) * gnorm) * v.norm();
    if (r > bound) {
      std::ostringstream os;
      os << "eigen-residual " << r << " exceeds " << bound << " at x = " << x;
      throw Error(Errc::defective, os.str());
    }
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    if (!f.is_real(a)) continue;
    for (Eigen::Index b = a + 1; b < d; ++b) {
      if (!f.is_real(b)) continue;
      const double o = std::abs(g_inner(f.phi.col(a), f.phi.col(b), G));
      if (o > tol.orthogonality * gnorm * f.phi.col(a).norm() * f.phi.col(b).norm() * 10.0) {
        throw Error(Errc::near_degeneracy, "G-orthogonality lost between modes");
      }
    }
  }
  return f;
}

SpectralFrame solve_pencil(const PencilModel& model, double x, const PencilTolerances& tol) {
  const CMatrix K = poly_eval(model.k_coeffs, x);
  const CMatrix Kp = poly_eval(model.k_coeffs, x, 1);
  return solve_pencil(K, model.metric, &Kp, x, tol);
}

SpectralFrame solve_perturbed(const PencilModel& model, double x, double hbar, const PencilTolerances& tol) {
  const CMatrix K = hat(model, x, hbar);
  CMatrix Kp = poly_eval(model.k_coeffs, x, 1);
  if (model.b_coeffs.size() > 1) Kp += std::sqrt(hbar) * poly_eval(model.b_coeffs, x, 1);
  return solve_pencil(K, model.metric, &Kp, x, tol);
}

CMatrix matrix_elements(const SpectralFrame& frame, const CMatrix& M) {
  return frame.phi.adjoint() * M * frame.phi;
}

double align_to(SpectralFrame& f, const SpectralFrame& ref, const CMatrix& G) {
  const auto d = f.size();
  Eigen::MatrixXd ov(d, d);
  const CMatrix Gf = G * f.phi;
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (ref.is_real(r) && f.is_real(c)) {
        ov(r, c) = std::abs(ref.phi.col(r).dot(Gf.col(c)));
      } else {
        ov(r, c) = std::abs(ref.phi.col(r).dot(f.phi.col(c))) / (ref.phi.col(r).norm() * f.phi.col(c).norm());
      }
    }
  }
  std::vector<Eigen::Index> assign(d, -1);
  std::vector<bool> used_r(d, false), used_c(d, false);
  double worst = 1e300;
  for (Eigen::Index step = 0; step < d; ++step) {
    double best = -1;
    Eigen::Index br = 0, bc = 0;
    for (Eigen::Index r = 0; r < d; ++r) {
      if (used_r[r]) continue;
      for (Eigen::Index c = 0; c < d; ++c) {
        if (!used_c[c] && ov(r, c) > best) {
          best = ov(r, c);
          br = r;
          bc = c;
        }
      }
    }
    used_r[br] = used_c[bc] = true;
    assign[br] = bc;
    worst = std::min(worst, best);
  }
  for (Eigen::Index r = 0; r < d; ++r) {
    double second = 0.0;
    for (Eigen::Index c = 0; c < d; ++c)
      if (c != assign[r]) second = std::max(second, ov(r, c));
    if (ov(r, assign[r]) < 0.5 || second > 0.5 * ov(r, assign[r])) {
      throw Error(Errc::tracking, "ambiguous mode continuation at x = " + std::to_string(f.x));
    }
  }
  SpectralFrame out;
  out.x = f.x;
  out.beta.resize(d);
  out.phi.resize(d, d);
  out.norm.resize(d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto c = assign[r];
    out.beta(r) = f.beta(c);
    out.norm(r) = f.norm(c);
    CVector v = f.phi.col(c);
    cplx z = (ref.is_real(r) && f.is_real(c)) ? ref.phi.col(r).dot(G * v) / ref.norm(r) : ref.phi.col(r).dot(v);
    if (std::abs(z) > 0) v *= std::conj(z) / std::abs(z);
    out.phi.col(r) = v;
  }
  f = std::move(out);
  return worst;
}

double default_track_step(const PencilModel& model) { return 1e-3 * (model.x_max - model.x_min); }

namespace {

SpectralFrame step_to(const PencilModel& model, const SpectralFrame& from, double x, int depth) {
  SpectralFrame f = solve_pencil(model, x);
  try {
    align_to(f, from, model.metric);
    return f;
  } catch (const Error& e) {
    if (e.code() != Errc::tracking || depth > 30) throw;
  }
  const double mid = 0.5 * (from.x + x);
  SpectralFrame m = step_to(model, from, mid, depth + 1);
  return step_to(model, m, x, depth + 1);
}

}  // namespace

SpectralFrame transport(const PencilModel& model, const SpectralFrame& from, double x_to, double max_step) {
  if (max_step <= 0) max_step = default_track_step(model);
  const double dist = x_to - from.x;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(dist) / max_step)));
  SpectralFrame cur = from;
  for (int k = 1; k <= n; ++k) {
    const double x = (k == n) ? x_to : from.x + dist * k / n;
    cur = step_to(model, cur, x, 0);
  }
  return cur;
}

std::vector<SpectralFrame> track_modes(const PencilModel& model, const std::vector<double>& grid,
                                       const SpectralFrame* seed, double max_step) {
  std::vector<SpectralFrame> out;
  if (grid.empty()) return out;
  if (max_step <= 0) max_step = default_track_step(model);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw Error(Errc::domain, "grid must be strictly increasing");
  }
  SpectralFrame first = seed ? transport(model, *seed, grid[0], max_step) : solve_pencil(model, grid[0]);
  out.push_back(first);
  for (std::size_t k = 1; k < grid.size(); ++k) out.push_back(transport(model, out.back(), grid[k], max_step));
  return out;
}

CMatrix conversion_coeffs(const PencilModel& model, const SpectralFrame& frame) {
  const CMatrix Kp = matrix_elements(frame, poly_eval(model.k_coeffs, frame.x, 1));
  const auto d = frame.size();
  const double scale = std::max(1.0, frame.beta.cwiseAbs().maxCoeff());
  CMatrix S = CMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!frame.is_real(k)) continue;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j == k) continue;
      const cplx gap = frame.beta(j) - frame.beta(k);
      if (std::abs(gap) < 1e-8 * scale) throw Error(Errc::near_degeneracy, "conversion coefficient at a degeneracy");
      S(k, j) = Kp(k, j) / (gap * frame.norm(k));
    }
  }
  return S;
}

Eigen::VectorXd eigenvalue_slopes(const PencilModel& model, const SpectralFrame& frame) {
  const CMatrix Kp = matrix_elements(frame, poly_eval(model.k_coeffs, frame.x, 1));
  Eigen::VectorXd s = Eigen::VectorXd::Zero(frame.size());
  for (Eigen::Index n = 0; n < frame.size(); ++n) {
    if (frame.is_real(n)) s(n) = Kp(n, n).real() / frame.norm(n);
  }
  return s;
}

}  // namespace modetrans
