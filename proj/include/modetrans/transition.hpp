#pragma once

#include "modetrans/types.hpp"

namespace modetrans {

// Canonical transition matrix c+ = T c- between the mode amplitudes on the
// two sides of the crossing, as a function of nu = i |nu| w.
struct TransitionMatrix {
  cplx nu;
  int w = 1;
  Matrix2c t;
};

// Throws Errc::domain unless nu is purely imaginary. nu = 0 gives T = I.
TransitionMatrix transition_matrix(cplx nu);

// Same, with w given explicitly; needed at nu = 0 where the sign is lost.
// Throws Errc::domain if w disagrees with the sign of Im nu.
TransitionMatrix transition_matrix(cplx nu, int w);

struct PolarForm {
  double mag11 = 1.0;  // |t11| = |t22|
  double mag12 = 0.0;  // |t12|
  double mag21 = 0.0;  // |t21|
  double theta_prime = 0.0;
  double theta_gamma = 0.0;
};

PolarForm polar_form(cplx nu);

// Large-|nu| limits: [[0,-1],[1,0]] for w = +1 and e^{pi|nu|} [[1,1],[1,1]]
// for w = -1. The returned matrix for w = -1 is divided by e^{pi|nu|}.
Matrix2c asymptotic_limit(int w);

// Deviation of T from its large-|nu| limit, entrywise max, with T scaled by
// e^{-pi|nu|} for w = -1.
double limit_deviation(const TransitionMatrix& tm);

struct Scattering {
  cplx reflection;
  cplx transmission;
};

// Only meaningful for w = -1; w = +1 throws Errc::interpretation.
Scattering reflection_transmission(const TransitionMatrix& tm);

// T [[0,1],[-1,0]].
Matrix2c renumbered(const TransitionMatrix& tm);

// Outer amplitudes produced by the inner solution with coefficients (A, B).
struct MatchCoefficients {
  Vector2c minus;
  Vector2c plus;
};

MatchCoefficients match_coefficients(cplx nu, cplx A, cplx B);

// T from two independent matchings, T = [c+_a c+_b][c-_a c-_b]^{-1}.
Matrix2c transition_from_matching(const MatchCoefficients& a, const MatchCoefficients& b);

struct FluxResiduals {
  double det = 0.0;
  double flux1 = 0.0;
  double flux2 = 0.0;
  double cross = 0.0;
  double t21_relation = 0.0;
  double t22_relation = 0.0;

  double max() const;
};

// Residuals of det T = 1, the three flux identities and
// t21 = -conj(t12) N1/N2, t22 = conj(t11), each divided by the size of its
// largest term.
FluxResiduals flux_residuals(const Matrix2c& t, double n1, double n2);

// || T^H T - I ||, for N1 = N2.
double unitarity_defect(const Matrix2c& t);

}  // namespace modetrans
