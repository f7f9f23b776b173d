#pragma once

#include "modetrans/types.hpp"

namespace modetrans {

// Whittaker parabolic cylinder function D_nu(t),
// y'' + (1/2 - t^2/4 + nu) y = 0, decaying along the positive real axis.

struct PcfOptions {
  double series_max = 12.0;     // the Maclaurin series is tried for |t| <= series_max
  double asymptotic_min = 2.0;  // the asymptotic series is tried for |t| >= asymptotic_min
  int order = 20;               // Weniger transform order; 0 sums to the smallest term
  double overlap_tol = 1e-6;    // allowed disagreement where both regimes claim accuracy
  double max_error = 1e-4;      // Errc::precision when no regime does better
};

enum class PcfRegime { series, asymptotic, integrated };

const char* regime_name(PcfRegime r);

struct PcfValue {
  cplx d_nu;
  cplx d_nu_m1;   // D_{nu-1}(t)
  cplx d_nu_p;    // d/dt D_nu(t)
  PcfRegime regime;
  double est_error = 0.0;  // relative
};

// D_nu, D_{nu-1} and D_nu'. The derivative is computed independently of
// D_{nu-1}, so the recurrence D_nu' + (t/2) D_nu - nu D_{nu-1} = 0 is a check.
// Where both regimes are available the one with the smaller error estimate is
// used; throws Errc::precision if both claim overlap_tol and disagree by more.
// If neither reaches 1e-10 the ODE is integrated inward along the ray from a
// radius where the asymptotic value is accurate.
PcfValue dnu_pair(cplx nu, cplx t, const PcfOptions& opts = {});

cplx dnu(cplx nu, cplx t, const PcfOptions& opts = {});

struct PcfPoint {
  cplx value;
  cplx derivative;
  double est_error = 0.0;  // relative
};

// Maclaurin series, summed in extended precision. The error estimate is the
// cancellation factor sum |terms| / |sum| times the seed precision.
PcfPoint dnu_series(cplx nu, cplx t);

// Large-|t| expansion with one or two exponential branches depending on
// arg t. order > 0 sums each 1/t^2 series with the Weniger delta transform
// of that order; order = 0 truncates at the smallest term (at least 3
// correction terms).
PcfPoint dnu_asymptotic(cplx nu, cplx t, int order = 20);

// D_nu and D_{nu-1} by integrating the ODE along the ray from radius r_start
// (asymptotic initial data) to t. The estimate includes the growth of the
// independent solution relative to D_nu along the path.
PcfValue dnu_integrated(cplx nu, cplx t, double r_start, const PcfOptions& opts = {});

// xi_nu = -sqrt(2 pi) e^{-i pi nu} / Gamma(-nu).
cplx xi(cplx nu);

// xi_{nu-1} in the form sqrt(2 pi) e^{-i pi nu} / Gamma(1 - nu), finite at nu = 0.
cplx xi_m1(cplx nu);

// W{D_nu(t), D_nu(-t)} = sqrt(2 pi) / Gamma(-nu).
cplx pcf_wronskian(cplx nu);

}  // namespace modetrans
