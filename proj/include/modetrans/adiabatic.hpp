#pragma once

#include <memory>
#include <vector>

#include "modetrans/crossing.hpp"

namespace modetrans {

// Unperturbed frames tracked outward from x* on a uniform grid, so that
// frames at arbitrary x are one short transport step away.
class FrameTable {
 public:
  FrameTable(const PencilModel& model, const CrossingData& data, double step = 0.0);

  const SpectralFrame& nearest(double x) const;
  SpectralFrame at(double x) const;
  const std::vector<SpectralFrame>& frames() const { return frames_; }
  double step() const { return step_; }

 private:
  const PencilModel* model_;
  std::vector<SpectralFrame> frames_;
  double step_;
};

// Which eigenvalues enter the phase integrals: the truncated expansions
// (outer formula away from x*, inner formula near it) or the exact
// eigenvalues of the perturbed pencil.
enum class PhaseModel { main, exact };

// Which vectors carry the mode: phi_j(x) or the eigenvectors of the
// perturbed pencil, G-normalised and phased against phi_j(x).
enum class ModeBasis { unperturbed, perturbed };

struct AdiabaticContext {
  AdiabaticContext(const PencilModel& model, const CrossingData& data, double hbar, double gamma = 0.2,
                   PhaseModel phase = PhaseModel::exact);

  const PencilModel* model;
  CrossingData data;
  double hbar;
  double gamma;
  PhaseModel phase;
  std::shared_ptr<const FrameTable> table;
};

// Perturbed eigenvalues of the crossing pair at x. Mode 1 is the upper
// branch for x < x* - sqrt(hbar) b and the lower one beyond.
EigPair pair_eigs(const AdiabaticContext& ctx, double x);

// Re kappa_pm: lower limit of the difference integral.
double lower_limit(const AdiabaticContext& ctx, Side side);

// int_{x* - sqrt(hbar) b}^x Re(beta1 + beta2) dx'.
double phase_sum(const AdiabaticContext& ctx, double x);

// int_{Re kappa_pm}^x Re(beta1 - beta2) dx'.
double phase_diff(const AdiabaticContext& ctx, Side side, double x);

// Real phase of mode j in {1, 2}: (S +- D) / (2 hbar).
double mode_phase(const AdiabaticContext& ctx, int j, Side side, double x);

double default_validity_radius(const AdiabaticContext& ctx);

// Canonical mode Psi_{j,side}(x). Throws Errc::validity inside the
// exclusion zone or on the wrong side.
CVector leading_mode(const AdiabaticContext& ctx, int j, Side side, double x,
                     ModeBasis basis = ModeBasis::unperturbed);

// || -i hbar G Psi' - (K + sqrt(hbar) B) Psi || / (||K^|| ||Psi||) for the
// leading mode, Psi' from the local phase rate and a differenced amplitude.
double mode_residual(const AdiabaticContext& ctx, int j, Side side, double x);

// Phase (1/sqrt(hbar)) int_{-b}^tau (beta0 + sqrt(hbar) beta_av(tau')) dtau'.
double central_phase(const CrossingData& data, double tau, double hbar);

// Matching-zone form of the canonical modes, valid for |tau| ~ hbar^{-gamma}.
CVector rearranged_outer(const CrossingData& data, int j, double tau, double hbar);

// Terms of the adiabatic expansion of mode j at x up to order n_max <= 3:
// theta[n] and Phi[n], with c[n] the coefficient of the partner mode in
// Phi[n]. Index 0 holds beta_j and phi_j.
struct HigherTerms {
  double x = 0.0;
  std::vector<cplx> theta;
  std::vector<cplx> c;
  std::vector<CVector> phi;
};

HigherTerms higher_terms(const PencilModel& model, const SpectralFrame& frame, int j, int n_max,
                         double fd_step = 0.0);

HigherTerms higher_terms(const AdiabaticContext& ctx, int j, int n_max, double x);

struct SingularityReport {
  int order = 0;
  double theta_slope = 0.0;
  double phi_slope = 0.0;
  double c_slope = 0.0;
  bool vanishing = false;
  bool ok = false;
};

// Log-log fits of |theta[n]|, ||Phi[n]|| and |c[n]| against |x - x*| on the
// given offsets. Expected slopes are -(n-1) for theta and -n for Phi and c.
SingularityReport singularity_estimate(const AdiabaticContext& ctx, int j, int n,
                                       const std::vector<double>& offsets, Side side = Side::plus,
                                       double slack = 0.15);

// int Im S_jj dx along a tracked sequence, from discrete G-overlaps.
double berry_phase(const std::vector<SpectralFrame>& frames, const CMatrix& G, Eigen::Index j);

// Least-squares slope of log|y| against log|x|.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace modetrans
