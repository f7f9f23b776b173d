#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "modetrans/adiabatic.hpp"
#include "modetrans/error.hpp"
#include "modetrans/inner.hpp"
#include "modetrans/models.hpp"

using namespace modetrans;
using Catch::Approx;

namespace {

std::vector<PencilModel> catalog() {
  return {model_dirac(0.0, {0.0, 1.0, 0.0, 0.2}, 1.3), model_landau_zener(1.0, 1.0),
          model_landau_zener(1.4, 0.6, -1.0, 1.0, 0.3, -0.2), model_dirac(0.1, {0.0, 0.8, 0.3}, 0.7)};
}

// -i G dpsi/dtau - (K + sqrt(hbar) B) psi / sqrt(hbar), relative to the size of the terms.
double exact_residual(const PencilModel& m, const CrossingData& c, cplx A, cplx B, double tau, double hbar) {
  const double h = 1e-3;
  auto psi = [&](double t) { return inner_full(c, A, B, t, hbar).vec; };
  const CVector d = (8.0 * (psi(tau + h) - psi(tau - h)) - (psi(tau + 2 * h) - psi(tau - 2 * h))) / (12.0 * h);
  const PencilEval e = eval_pencil(m, c.x_star + std::sqrt(hbar) * tau, hbar);
  const CVector v = psi(tau);
  const CVector r = -I * (m.metric * d) - e.Khat * v / std::sqrt(hbar);
  return r.norm() / (m.metric * d).norm();
}

}  // namespace

TEST_CASE("inner system residual on random samples") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0), tt(-10.0, 10.0);
  for (const auto& m : catalog()) {
    const CrossingData c = analyze_crossing(m);
    for (int k = 0; k < 25; ++k) {
      const cplx A(u(rng), u(rng)), B(u(rng), u(rng));
      const double tau = tt(rng);
      CHECK(inner_system_residual(c, inner_leading(c, A, B, tau), tau) <= 1e-8);
    }
  }
}

TEST_CASE("second-order equation for a2") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0), tt(-6.0, 6.0);
  for (const auto& m : catalog()) {
    const CrossingData c = analyze_crossing(m);
    for (int k = 0; k < 10; ++k) {
      CHECK(inner_a2_residual(c, cplx(u(rng), u(rng)), cplx(u(rng), u(rng)), tt(rng)) <= 1e-8);
    }
  }
}

TEST_CASE("coupling identity") {
  for (const auto& m : catalog()) {
    const CrossingData c = analyze_crossing(m);
    // nu sigma N2 / B21 = B12 / (sigma N1)
    CHECK(std::abs(c.nu * c.sigma * c.n2 / c.b21 - c.b12 / (c.sigma * c.n1)) < 1e-12);
  }
}

TEST_CASE("decoupled case nu = 0") {
  const PencilModel m = model_landau_zener(1.0, 0.0);
  const CrossingData c = analyze_crossing(m);
  const cplx A(0.3, -0.2), B(0.5, 0.1);
  for (double tau : {-3.0, 0.5, 4.0}) {
    const InnerValue v = inner_leading(c, A, B, tau);
    const cplx t = c.sigma * (tau + c.b);
    CHECK(std::abs(v.a1) == 0.0);
    // D_0 is a chirp: a2 = (A + B) exp(i Q u^2 / 2)
    CHECK(std::abs(v.a2 - (A + B) * std::exp(-t * t / 4.0)) < 1e-13);
    CHECK(std::abs(std::abs(v.a2) - std::abs(A + B)) < 1e-13);
  }
  for (Side s : {Side::minus, Side::plus}) {
    const InnerAsymptote as = inner_asymptote(c, A, B, s);
    CHECK(std::abs(as.c1) == 0.0);
    CHECK(std::abs(as.c2 - (A + B)) < 1e-15);
  }
}

TEST_CASE("inner_full") {
  const PencilModel m = model_landau_zener(1.3, 0.8, -1.0, 1.0, 0.4, 0.1);
  const CrossingData c = analyze_crossing(m);
  const cplx A(0.2, 0.7), B(-0.4, 0.3);
  SECTION("phase factor is 1 at tau = -b") {
    const InnerFull f = inner_full(c, A, B, -c.b, 1e-4);
    CHECK((f.vec - inner_leading(c, A, B, -c.b).vec).norm() < 1e-14);
  }
  SECTION("symmetric Dirac spectrum adds no phase") {
    const PencilModel d = model_dirac(0.0, {0.0, 1.0}, 1.0);
    const CrossingData cd = analyze_crossing(d);
    for (double tau : {-2.0, 1.5}) {
      CHECK((inner_full(cd, A, B, tau, 1e-4).vec - inner_leading(cd, A, B, tau).vec).norm() < 1e-14);
    }
  }
  SECTION("zone flag") {
    CHECK(inner_full(c, A, B, 1.0, 1e-4).in_zone);
    CHECK(!inner_full(c, A, B, 50.0, 1e-4).in_zone);
  }
  SECTION("residual of the full equation falls like sqrt(hbar)") {
    const PencilModel q = model_dirac(0.0, {0.0, 1.0, 0.5}, 1.0);
    const CrossingData cq = analyze_crossing(q);
    const double ra = exact_residual(q, cq, A, B, 2.0, 1e-4);
    const double rb = exact_residual(q, cq, A, B, 2.0, 1e-6);
    CHECK(std::log10(ra / rb) / 2.0 == Approx(0.5).margin(0.1));
  }
}

TEST_CASE("inner asymptote") {
  SECTION("A = 0 on the minus side") {
    const PencilModel m = model_dirac(0.0, {0.0, 1.0}, 1.0);
    const CrossingData c = analyze_crossing(m);
    const cplx B(0.6, -0.3);
    const InnerAsymptote as = inner_asymptote(c, 0.0, B, Side::minus);
    CHECK(std::abs(as.c1) == 0.0);
    CHECK(std::abs(as.c2 - B * std::exp(-I * pi * c.nu / 4.0)) < 1e-15);
  }
  SECTION("leading values approach the asymptote like 1/tau") {
    for (const auto& m : catalog()) {
      const CrossingData c = analyze_crossing(m);
      const cplx A(0.4, 0.2), B(-0.1, 0.5);
      for (Side s : {Side::minus, Side::plus}) {
        const InnerAsymptote as = inner_asymptote(c, A, B, s);
        std::vector<double> taus, errs;
        for (double r : {10.0, 20.0, 40.0}) {
          const double tau = side_sign(s) * r - c.b;
          const InnerValue v = inner_leading(c, A, B, tau);
          const Vector2c a = asymptote_values(c, as, tau);
          taus.push_back(r);
          errs.push_back(std::max(std::abs(v.a1 - a(0)), std::abs(v.a2 - a(1))));
        }
        CHECK(errs[2] < 0.1);
        CHECK(loglog_slope(taus, errs) == Approx(-1.0).margin(0.2));
      }
    }
  }
}
