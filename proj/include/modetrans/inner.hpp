#pragma once

#include "modetrans/crossing.hpp"
#include "modetrans/pcf.hpp"

namespace modetrans {

// Leading inner solution phi0 = a1 phi_1(0) + a2 phi_2(0) with
// a2 = A D_nu(t) + B D_nu(-t), t = sigma (tau + b).
struct InnerValue {
  cplx a1, a2;
  cplx da1, da2;  // d/dtau, from the PCF recurrences
  CVector vec;
};

InnerValue inner_leading(const CrossingData& data, cplx A, cplx B, double tau, const PcfOptions& opts = {});

// Residuals of the two first-order equations for (a1, a2), divided by
// 1 + |a1| + |a2|.
double inner_system_residual(const CrossingData& data, const InnerValue& v, double tau);

// The second-order equation for a2 alone, with a2'' by differencing a2'.
double inner_a2_residual(const CrossingData& data, cplx A, cplx B, double tau);

struct InnerFull {
  CVector vec;
  bool in_zone = true;  // |tau| <= hbar^{-1/6 + gamma_p}
};

InnerFull inner_full(const CrossingData& data, cplx A, cplx B, double tau, double hbar, double gamma_p = 0.05);

// Large-|tau| form: a1 ~ c1 e^{-i Q u^2/2} |sigma u|^{-nu},
// a2 ~ c2 e^{i Q u^2/2} |sigma u|^{nu}, u = tau + b.
struct InnerAsymptote {
  cplx c1, c2;
};

InnerAsymptote inner_asymptote(const CrossingData& data, cplx A, cplx B, Side side);

// (a1, a2) predicted by the asymptote at tau.
Vector2c asymptote_values(const CrossingData& data, const InnerAsymptote& as, double tau);

}  // namespace modetrans
