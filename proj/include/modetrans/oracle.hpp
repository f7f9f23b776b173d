#pragma once

#include <vector>

#include "modetrans/adiabatic.hpp"

namespace modetrans {

struct IntegratorOptions {
  double tol = 1e-10;
  // Factor out exp((i/hbar) int s(x) dx), s(x) = strip_beta0 + strip_slope (x - strip_x0).
  bool strip_phase = false;
  double strip_beta0 = 0.0;
  double strip_slope = 0.0;
  double strip_x0 = 0.0;
  bool keep_samples = true;
  std::size_t max_steps = 50'000'000;
};

struct TrajectoryRecord {
  double hbar = 0.0;
  double tol = 0.0;
  std::vector<double> x;
  std::vector<CVector> psi;
  std::vector<cplx> flux;
  CVector final_state;
  std::size_t steps = 0;
  double max_flux_drift = 0.0;  // max |flux - flux(x_from)| / |flux(x_from)|
};

// Integrates psi' = (i/hbar) G^{-1} (K + sqrt(hbar) B) psi from x_from to x_to.
TrajectoryRecord integrate(const PencilModel& model, double hbar, double x_from, double x_to, const CVector& psi0,
                           const IntegratorOptions& opts = {});

struct Projection {
  cplx k1, k2;
  double residual = 0.0;
};

Projection project_onto_modes(const AdiabaticContext& ctx, const CVector& psi, double x, Side side,
                              ModeBasis basis = ModeBasis::perturbed);

struct OracleOptions {
  double tol = 1e-10;
  double gamma = 0.2;
  double c_endpoint = 1.0;
  ModeBasis basis = ModeBasis::perturbed;
  PhaseModel phase = PhaseModel::exact;
  bool strip_phase = false;
  double leakage_bound = 0.05;
};

struct EmpiricalTransition {
  double hbar = 0.0;
  double x_left = 0.0, x_right = 0.0;
  Matrix2c m;
  double residual[2] = {0.0, 0.0};
  double max_flux_drift = 0.0;
  std::size_t steps = 0;
  bool leakage_warning = false;
};

// |x - x*| of the endpoints: max(C hbar^{1/2 - gamma}, exclusion radius),
// clipped to the model interval.
double endpoint_offset(const CrossingData& data, double hbar, const OracleOptions& opts);

EmpiricalTransition empirical_transition(const PencilModel& model, const CrossingData& data, double hbar,
                                         const OracleOptions& opts = {});

struct SweepRow {
  double hbar = 0.0;
  double err = 0.0;  // max entry |M - T|
  double err_t11 = 0.0, err_t12 = 0.0, err_t21 = 0.0, err_t22 = 0.0;
  EmpiricalTransition emp;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by descending hbar
  Matrix2c asymptotic;
  double slope = 0.0;  // d log err / d log hbar
  bool slope_fitted = false;
  bool monotone = true;
};

SweepResult hbar_sweep(const PencilModel& model, const CrossingData& data, std::vector<double> hbars,
                       const OracleOptions& opts = {});

}  // namespace modetrans
