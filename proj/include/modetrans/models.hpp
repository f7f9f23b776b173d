#pragma once

#include <string>
#include <utility>
#include <vector>

#include "modetrans/pencil.hpp"

namespace modetrans {

// Parses "x + 0.2*x^3 - 0.3", "2x^2", "-x" into ascending real coefficients.
std::vector<double> parse_polynomial(const std::string& text);

// height * tanh((x - x0) / width) expanded about x0 through the given odd
// degree, as ascending coefficients in x. The series converges only for
// |x - x0| < pi width / 2, so the model interval must lie inside.
std::vector<double> tanh_barrier(double height, double width, double x0, int degree);

// A polynomial, or "tanh(height, width, x0, degree)" for tanh_barrier.
std::vector<double> parse_potential(const std::string& text);

// K = (E - U(x)) I, B = [[0, -i p], [i p, 0]], G = sigma_x.
// Throws unless E - U has exactly one simple root in [x_min, x_max].
PencilModel model_dirac(double E, const std::vector<double>& u_coeffs, double p, double x_min = -1.0,
                        double x_max = 1.0);

// K = diag(slope x, -slope x), B = [[bias1, gap], [gap, bias2]], G = I.
PencilModel model_landau_zener(double slope, double gap, double x_min = -1.0, double x_max = 1.0,
                               double bias1 = 0.0, double bias2 = 0.0);

struct Spectator {
  double offset = 0.0;    // constant eigenvalue of the extra level
  double coupling = 0.0;  // B entry to every base component
};

// G = diag(G_base, 1, ...), K = diag(K_base, offsets), couplings in B only.
// Throws Errc::spectral_gap if a spectator comes within min_gap of the
// base eigenvalues on the interval.
PencilModel model_spectator(const PencilModel& base, const std::vector<Spectator>& extras, double min_gap = 0.5);

}  // namespace modetrans
