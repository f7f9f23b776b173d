#pragma once

#include <vector>

#include "modetrans/pencil.hpp"

namespace modetrans {

struct Degeneracy {
  double x_star = 0.0;
  double q = 0.0;  // half the slope difference of the crossing pair
};

// Finds the single real crossing of two eigenvalue branches of K phi = beta G phi
// in the model interval. Throws Errc::no_degeneracy, Errc::multiple_crossings
// or Errc::degenerate_slope.
Degeneracy locate_degeneracy(const PencilModel& model, int scan_points = 400);

// Everything the asymptotic formulas need at x*. Columns 0 and 1 of frame are
// modes 1 and 2 (numbered so that q > 0) in the gauge where theta_a = 0;
// the remaining columns are spectators.
struct CrossingData {
  double x_star = 0.0;
  double beta0 = 0.0;
  SpectralFrame frame;
  double n1 = 1.0, n2 = 1.0;
  int w = 1;
  double q = 0.0;
  double b = 0.0;
  double p = 0.0;
  double p2 = 0.0;
  cplx b11, b22, b12, b21;  // B elements at x* in the fixed gauge
  double theta_a_raw = 0.0;
  double theta_a = 0.0;
  cplx nu;
  cplx sigma;
  double zeta = 0.0;        // i zeta = -nu/2 + nu ln|nu| / 2
  double beta_av0 = 0.0;    // beta_av(tau) = beta_av0 + tau * beta_av1
  double beta_av1 = 0.0;
  std::vector<CMatrix> taylor_k;  // K^(n) about x*, full matrices

  double beta_av(double tau) const { return beta_av0 + tau * beta_av1; }
};

CrossingData crossing_parameters(const PencilModel& model, double x_star);

CrossingData analyze_crossing(const PencilModel& model);

// Rephases columns 0 and 1 by e^{+-i theta_a/2} so that B12/N1 = B21/N2 with
// theta_a = 0. Returns the raw theta_a through theta_out.
SpectralFrame gauge_fix(const SpectralFrame& frame, const CMatrix& B, double* theta_out = nullptr);

double theta_a_of(cplx b12, double n1, int w);

// Complex degeneracy points of the perturbed pair, absolute positions.
cplx kappa(const CrossingData& data, Side side, double hbar);

// Frame at x in the fixed gauge, parallel-transported from x*.
SpectralFrame frame_at(const PencilModel& model, const CrossingData& data, double x);

struct EigPair {
  cplx mode1, mode2;
};

// Second-order outer expansion of the perturbed eigenvalues.
// Valid for |x - x*| >= hbar^{1/2 - gamma}; check = false skips the test.
EigPair perturbed_eigs_outer(const PencilModel& model, const CrossingData& data, double x, double hbar,
                             double gamma = 0.2, bool check = true);

// The same expansion with the frame at x supplied by the caller.
EigPair outer_eigs(const PencilModel& model, const SpectralFrame& frame, double hbar);

struct InnerEigs {
  cplx upper, lower;  // beta~_1 (+ root) and beta~_2 (- root)
  bool forbidden = false;
};

// beta~_j = beta0 + sqrt(hbar) (beta_av(tau) +- sqrt((tau+b)^2 Q^2 + p^2 w)).
// Valid for |tau| <= hbar^{-1/6 + gamma_p}.
InnerEigs perturbed_eigs_inner(const CrossingData& data, double tau, double hbar, double gamma_p = 0.05,
                               bool check = true);

// Large-|tau| form with the root expanded about tau + b.
InnerEigs perturbed_eigs_inner_large(const CrossingData& data, double tau, double hbar);

// Inner eigenvalues with the mode labels used by the outer solution: mode 1
// follows the + root for tau + b < 0 and the - root for tau + b > 0.
EigPair inner_main(const CrossingData& data, double tau, double hbar);

struct MatchingCheck {
  double tau = 0.0;
  double x = 0.0;
  double discrepancy = 0.0;
  double scale = 0.0;
};

// Compares outer and inner eigenvalues in the overlap of their zones, on the
// plus side. Throws Errc::validity if the zones do not overlap.
MatchingCheck eig_matching_check(const PencilModel& model, const CrossingData& data, double hbar,
                                 double gamma, double gamma_p);

double exclusion_radius(const CrossingData& data, double hbar);

// Solves (K - beta G) y = P r, where P removes the components along
// G phi_1 and G phi_2, so y lies in the G-orthogonal complement of the pair.
CVector complement_solve(const CMatrix& K, const CMatrix& G, const SpectralFrame& frame, cplx beta,
                         const CVector& r);

}  // namespace modetrans
