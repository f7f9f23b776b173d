#pragma once

#include <string>
#include <vector>

#include "modetrans/types.hpp"

namespace modetrans {

// Polynomial Hermitian pencil K(x) + sqrt(hbar) B(x) with constant metric G.
// K(x) = sum_n k_coeffs[n] x^n, likewise for B.
struct PencilModel {
  std::string name;
  std::vector<CMatrix> k_coeffs;
  std::vector<CMatrix> b_coeffs;
  CMatrix metric;
  double x_min = -1.0;
  double x_max = 1.0;

  Eigen::Index dim() const { return metric.rows(); }
};

// Throws Errc::domain on shape or Hermiticity problems and
// Errc::metric_singular when G is not invertible.
void validate(const PencilModel& model);

// n-th derivative of a matrix polynomial at x.
CMatrix poly_eval(const std::vector<CMatrix>& coeffs, double x, int deriv = 0);

// Taylor coefficient (1/n!) d^n/dx^n at x0.
CMatrix taylor_coeff(const std::vector<CMatrix>& coeffs, double x0, int n);

struct PencilEval {
  CMatrix K, B, G, Khat;
};

PencilEval eval_pencil(const PencilModel& model, double x, double hbar);

struct PencilTolerances {
  double residual = 1e-10;
  double orthogonality = 1e-10;
  double metric_floor = 1e-10;
  double degeneracy = 1e-8;
};

// Eigen-decomposition of K phi = beta G phi at a point.
// Columns of phi are sorted by ascending Re(beta) unless reordered by
// align_to(). Real eigenvalues get |N_j| = 1, norm holds sgn N_j.
// Non-real eigenvalues have norm 0 and Euclidean-normalised vectors.
struct SpectralFrame {
  double x = 0.0;
  CVector beta;
  CMatrix phi;
  Eigen::VectorXd norm;

  Eigen::Index size() const { return beta.size(); }
  bool is_real(Eigen::Index j) const { return norm(j) != 0.0; }
  CVector col(Eigen::Index j) const { return phi.col(j); }
};

// Kp, when given, selects the analytic branch inside degenerate clusters.
SpectralFrame solve_pencil(const CMatrix& K, const CMatrix& G, const CMatrix* Kp, double x,
                           const PencilTolerances& tol = {});

SpectralFrame solve_pencil(const PencilModel& model, double x, const PencilTolerances& tol = {});

// Same for the perturbed pencil K + sqrt(hbar) B.
SpectralFrame solve_perturbed(const PencilModel& model, double x, double hbar,
                              const PencilTolerances& tol = {});

// (u, G v) = u^H G v.
cplx g_inner(const CVector& u, const CVector& v, const CMatrix& G);

// (phi_j, M phi_k) for all j, k.
CMatrix matrix_elements(const SpectralFrame& frame, const CMatrix& M);

// Reorders and rephases the columns of f to continue those of ref:
// column j is the one with the largest G-overlap with ref column j, and
// (ref_j, G f_j) / N_j is made real and positive.
// Returns the smallest matched overlap; throws Errc::tracking when the
// assignment is ambiguous.
double align_to(SpectralFrame& f, const SpectralFrame& ref, const CMatrix& G);

// Parallel transport of a frame from from.x to x_to.
SpectralFrame transport(const PencilModel& model, const SpectralFrame& from, double x_to,
                        double max_step);

std::vector<SpectralFrame> track_modes(const PencilModel& model, const std::vector<double>& grid,
                                       const SpectralFrame* seed = nullptr,
                                       double max_step = 0.0);

double default_track_step(const PencilModel& model);

// S_kj = K'_kj / ((beta_j - beta_k) N_k) off the diagonal. The diagonal is
// zero, which is the parallel-transport gauge produced by transport().
CMatrix conversion_coeffs(const PencilModel& model, const SpectralFrame& frame);

// d beta_n / dx = K'_nn / N_n for the real modes.
Eigen::VectorXd eigenvalue_slopes(const PencilModel& model, const SpectralFrame& frame);

}  // namespace modetrans
