#include <catch_amalgamated.hpp>

#include <cmath>

#include "modetrans/adiabatic.hpp"
#include "modetrans/error.hpp"
#include "modetrans/models.hpp"

using namespace modetrans;
using Catch::Approx;

TEST_CASE("Dirac difference phase has a closed form") {
  const double p = 1.2, h = 1e-3;
  const PencilModel m = model_dirac(0.0, {0.0, 1.0}, p);
  const CrossingData c = analyze_crossing(m);
  const AdiabaticContext ctx(m, c, h);
  const double a = std::sqrt(h) * p;
  CHECK(lower_limit(ctx, Side::plus) == Approx(a).epsilon(1e-14));
  for (double x : {0.2, 0.5, 0.9}) {
    const double s = std::sqrt(x * x - a * a);
    const double closed = x * s - a * a * std::log((x + s) / a);
    CHECK(std::abs(phase_diff(ctx, Side::plus, x)) == Approx(closed).epsilon(1e-10));
    CHECK(std::abs(phase_diff(ctx, Side::minus, -x)) == Approx(closed).epsilon(1e-10));
  }
  // the spectrum is symmetric, so the sum phase vanishes
  CHECK(std::abs(phase_sum(ctx, 0.7)) < 1e-12);
}

TEST_CASE("without perturbation the phase is the integral of beta") {
  const PencilModel m = model_dirac(0.0, {0.0, 1.0, 0.0, 0.2}, 0.0);
  const CrossingData c = analyze_crossing(m);
  const double h = 1e-3;
  const AdiabaticContext ctx(m, c, h);
  for (double x : {0.3, 0.8}) {
    const double integral = x * x / 2.0 + 0.05 * x * x * x * x;
    // on the plus side mode 1 is the lower branch E - U
    CHECK(mode_phase(ctx, 1, Side::plus, x) * h == Approx(-integral).epsilon(1e-11));
    CHECK(mode_phase(ctx, 2, Side::plus, x) * h == Approx(integral).epsilon(1e-11));
  }
}

TEST_CASE("unperturbed mode is a plane wave with constant amplitude") {
  PencilModel m = model_landau_zener(1.0, 0.0);
  m.k_coeffs[0] = CMatrix::Identity(2, 2) * 0.5;
  const CrossingData c = analyze_crossing(m);
  const double h = 1e-2;
  const AdiabaticContext ctx(m, c, h);
  const double x = 0.6;
  // beta_1 = 0.5 - x beyond the crossing
  CHECK(mode_phase(ctx, 1, Side::plus, x) * h == Approx(0.5 * x - x * x / 2.0).epsilon(1e-12));
  const CVector psi = leading_mode(ctx, 1, Side::plus, x);
  CHECK(psi.norm() == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("leading-mode flux") {
  const PencilModel m = model_landau_zener(1.0, 1.0);
  const CrossingData c = analyze_crossing(m);
  const double h = 1e-3;
  const AdiabaticContext ctx(m, c, h);
  for (ModeBasis basis : {ModeBasis::unperturbed, ModeBasis::perturbed}) {
    for (int j : {1, 2}) {
      const CVector psi = leading_mode(ctx, j, Side::plus, 0.4, basis);
      CHECK(std::abs(g_inner(psi, psi, m.metric) - 1.0) < 1e-3);
    }
  }
  const PencilModel d = model_dirac(0.0, {0.0, 1.0}, 1.0);
  const CrossingData cd = analyze_crossing(d);
  const AdiabaticContext dctx(d, cd, h);
  for (double x : {0.3, 0.6, 0.9}) {
    const CVector psi = leading_mode(dctx, 1, Side::plus, x, ModeBasis::perturbed);
    CHECK(std::abs(std::abs(g_inner(psi, psi, d.metric)) - 1.0) < 5.0 * h);
  }
}

TEST_CASE("leading modes are refused inside the exclusion zone") {
  const PencilModel m = model_dirac(0.0, {0.0, 1.0}, 1.0);
  const CrossingData c = analyze_crossing(m);
  const AdiabaticContext ctx(m, c, 1e-3);
  CHECK_THROWS_AS(leading_mode(ctx, 1, Side::plus, 0.01), Error);
  CHECK_THROWS_AS(leading_mode(ctx, 1, Side::minus, 0.5), Error);
  CHECK_THROWS_AS(leading_mode(ctx, 3, Side::plus, 0.5), Error);
}

TEST_CASE("leading-mode residual vanishes as hbar decreases") {
  // the order is 1/2 exactly; 0.49 leaves room for rounding only
  const PencilModel m = model_dirac(0.0, {0.0, 1.0, 0.0, 0.2}, 1.3);
  const CrossingData c = analyze_crossing(m);
  const AdiabaticContext a(m, c, 1e-4), b(m, c, 1e-6);
  for (int j : {1, 2}) {
    const double ra = mode_residual(a, j, Side::plus, 0.7);
    const double rb = mode_residual(b, j, Side::plus, 0.7);
    CHECK(rb < ra);
    CHECK(std::log10(ra / rb) / 2.0 >= 0.49);
  }
  const PencilModel lz = model_landau_zener(1.0, 0.8, -1.0, 1.0, 0.2, -0.3);
  const CrossingData cl = analyze_crossing(lz);
  const AdiabaticContext la(lz, cl, 1e-4), lb(lz, cl, 1e-6);
  const double ra = mode_residual(la, 1, Side::minus, -0.6);
  const double rb = mode_residual(lb, 1, Side::minus, -0.6);
  CHECK(std::log10(ra / rb) / 2.0 >= 0.49);
}

TEST_CASE("rearranged outer form") {
  SECTION("Dirac at hbar = 1e-4, tau = 6") {
    const PencilModel m = model_dirac(0.0, {0.0, 1.0}, 1.0);
    const CrossingData c = analyze_crossing(m);
    const double h = 1e-4, tau = 6.0;
    const AdiabaticContext ctx(m, c, h);
    for (int j : {1, 2}) {
      const CVector lead = leading_mode(ctx, j, Side::plus, c.x_star + std::sqrt(h) * tau);
      const CVector rear = rearranged_outer(c, j, tau, h);
      CHECK((lead - rear).norm() / lead.norm() < 0.02);
    }
  }
  SECTION("nu = 0 removes the power factor") {
    const PencilModel m = model_landau_zener(1.5, 0.0);
    const CrossingData c = analyze_crossing(m);
    for (double tau : {-8.0, 3.0, 20.0}) {
      CHECK(rearranged_outer(c, 1, tau, 1e-4).norm() == Approx(1.0).epsilon(1e-14));
      CHECK(rearranged_outer(c, 2, tau, 1e-4).norm() == Approx(1.0).epsilon(1e-14));
    }
  }
  SECTION("power factor for nonzero nu") {
    const PencilModel m = model_landau_zener(1.0, 1.0);
    const CrossingData c = analyze_crossing(m);
    // nu is imaginary, so |sigma tau|^{-nu} is a pure phase
    CHECK(rearranged_outer(c, 1, 7.0, 1e-4).norm() == Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(rearranged_outer(c, 1, -c.b, 1e-4), Error);
  }
}

TEST_CASE("higher-order terms") {
  SECTION("two-level Landau-Zener: no spectator part and closed-form theta2") {
    const double g = 0.6, b1 = 0.2, b2 = -0.3;
    const PencilModel m = model_landau_zener(1.0, g, -1.0, 1.0, b1, b2);
    const SpectralFrame f = solve_pencil(m, 0.5);
    for (int j : {1, 2}) {
      const HigherTerms t = higher_terms(m, f, j, 3);
      const int a = j - 1, k = 1 - a;
      const cplx gap = f.beta(a) - f.beta(k);
      const CMatrix Be = matrix_elements(f, m.b_coeffs[0]);
      CHECK(std::abs(t.theta[1] - Be(a, a)) < 1e-12);
      CHECK(std::abs(t.c[1] - Be(k, a) / gap) < 1e-12);
      CHECK(std::abs(t.theta[2] - std::norm(Be(a, k)) / gap) < 1e-10);
      CHECK(std::abs(t.c[2] - (Be(k, k) - Be(a, a)) * Be(k, a) / (gap * gap)) < 1e-10);
      for (int n = 1; n <= 3; ++n) CHECK((t.phi[n] - t.c[n] * f.col(k)).norm() < 1e-12);
    }
  }
  SECTION("spectator part of Phi1 is the explicit sum") {
    const PencilModel m =
        model_spectator(model_dirac(0.0, {0.0, 1.0}, 1.0), {{5.0, 0.3}, {-4.0, 0.5}});
    const SpectralFrame f = solve_pencil(m, 0.4);
    const CMatrix Be = matrix_elements(f, m.b_coeffs[0]);
    const HigherTerms t = higher_terms(m, f, 1, 1);
    CVector sum = CVector::Zero(4);
    for (Eigen::Index s = 2; s < 4; ++s) sum += Be(s, 0) / ((f.beta(0) - f.beta(s)) * f.norm(s)) * f.col(s);
    CHECK((t.phi[1] - t.c[1] * f.col(1) - sum).norm() < 1e-12);
  }
  SECTION("no perturbation") {
    const PencilModel m = model_dirac(0.0, {0.0, 1.0, 0.3}, 0.0);
    const HigherTerms t = higher_terms(m, solve_pencil(m, 0.5), 1, 3);
    for (int n = 1; n <= 3; ++n) {
      CHECK(std::abs(t.theta[n]) < 1e-12);
      CHECK(t.phi[n].norm() < 1e-12);
    }
  }
  CHECK_THROWS_AS(higher_terms(model_landau_zener(1.0, 1.0), solve_pencil(model_landau_zener(1.0, 1.0), 0.5), 1, 4),
                  Error);
}

TEST_CASE("growth of the corrections near the crossing") {
  const std::vector<double> offsets{0.02, 0.04, 0.08, 0.12, 0.2};
  SECTION("first order") {
    const PencilModel m = model_landau_zener(1.0, 0.7, -1.0, 1.0, 0.1, -0.2);
    const CrossingData c = analyze_crossing(m);
    const AdiabaticContext ctx(m, c, 1e-3);
    const SingularityReport r = singularity_estimate(ctx, 1, 1, offsets);
    CHECK(r.ok);
    CHECK(std::abs(r.theta_slope) < 0.15);
    CHECK(r.c_slope == Approx(-1.0).margin(0.15));
  }
  SECTION("second order on the biased Landau-Zener model") {
    const PencilModel m = model_landau_zener(1.0, 0.7, -1.0, 1.0, 0.4, -0.2);
    const CrossingData c = analyze_crossing(m);
    const AdiabaticContext ctx(m, c, 1e-3);
    const SingularityReport r = singularity_estimate(ctx, 1, 2, offsets);
    CHECK(r.ok);
    CHECK(r.phi_slope == Approx(-2.0).margin(0.15));
    CHECK(r.theta_slope == Approx(-1.0).margin(0.15));
  }
  SECTION("no perturbation") {
    const PencilModel m = model_landau_zener(1.0, 0.0);
    const CrossingData c = analyze_crossing(m);
    const AdiabaticContext ctx(m, c, 1e-3);
    const SingularityReport r = singularity_estimate(ctx, 1, 2, offsets);
    CHECK(r.vanishing);
    CHECK(r.ok);
  }
}

TEST_CASE("Berry phase changes by the gauge difference") {
  PencilModel m;
  m.name = "twist";
  m.metric = CMatrix::Identity(2, 2);
  CMatrix k0(2, 2), k1(2, 2);
  k0 << 1.0, 0.3, 0.3, -1.0;
  k1 << 0.0, cplx(0.0, 0.5), cplx(0.0, -0.5), 0.0;
  m.k_coeffs = {k0, k1};
  m.b_coeffs = {CMatrix::Zero(2, 2)};
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(-1.0 + 0.01 * k);
  const auto frames = track_modes(m, grid);
  auto sigma = [](double x) { return 0.7 * std::sin(2.0 * x) + 0.2 * x * x; };
  auto rephased = frames;
  for (auto& f : rephased) f.phi.col(0) *= std::polar(1.0, sigma(f.x));
  const double b0 = berry_phase(frames, m.metric, 0);
  const double b1 = berry_phase(rephased, m.metric, 0);
  CHECK(b1 - b0 == Approx(sigma(1.0) - sigma(-1.0)).margin(1e-10));
  // the assembled vector phi e^{-i berry} agrees at the far end up to the constant phase at the start
  const CVector end0 = frames.back().col(0) * std::polar(1.0, -b0);
  const CVector end1 = rephased.back().col(0) * std::polar(1.0, -b1);
  CHECK((end1 * std::polar(1.0, -sigma(-1.0)) - end0).norm() < 1e-10);
}

TEST_CASE("loglog slope") {
  CHECK(loglog_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}) == Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), Error);
}
