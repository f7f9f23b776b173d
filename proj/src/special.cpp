#include "modetrans/special.hpp"

#include <cmath>

#include "modetrans/error.hpp"

namespace modetrans {

namespace {

// Lanczos coefficients, g = 7, n = 9.
constexpr double lanczos_g = 7.0;
constexpr double lanczos_p[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                 771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                 -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

const double half_log_two_pi = 0.5 * std::log(2.0 * pi);

cplx log_gamma_right(cplx z) {
  z -= 1.0;
  cplx a = lanczos_p[0];
  for (int i = 1; i < 9; ++i) a += lanczos_p[i] / (z + static_cast<double>(i));
  const cplx t = z + lanczos_g + 0.5;
  return half_log_two_pi + (z + 0.5) * std::log(t) - t + std::log(a);
}

// log(sin(pi z)) without overflow for large |Im z|.
cplx log_sin_pi(cplx z) {
  const double y = z.imag();
  if (std::abs(y) < 20.0) return std::log(std::sin(pi * z));
  // sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i; keep the dominant exponential.
  const double s = y > 0 ? 1.0 : -1.0;
  const cplx dom = -s * I * pi * z;  // exponent of the growing term
  const cplx rest = 1.0 - std::exp(2.0 * s * I * pi * z);
  return dom + std::log(rest) - std::log(2.0 * I) + (s > 0 ? std::log(cplx(-1.0)) : 0.0);
}

}  // namespace

cplx log_gamma(cplx z) {
  if (z.real() >= 0.5) return log_gamma_right(z);
  const double rz = std::round(z.real());
  if (z.imag() == 0.0 && z.real() == rz) throw Error(Errc::near_pole, "log_gamma at a pole");
  return std::log(pi) - log_sin_pi(z) - log_gamma_right(1.0 - z);
}

cplx complex_gamma(cplx z) {
  if (z.real() < 0.5 && z.imag() == 0.0 && z.real() == std::round(z.real())) {
    throw Error(Errc::near_pole, "Gamma at a non-positive integer");
  }
  return std::exp(log_gamma(z));
}

cplx rgamma(cplx z) {
  if (z.real() >= 0.5) return std::exp(-log_gamma_right(z));
  // 1/Gamma(z) = sin(pi z) Gamma(1 - z) / pi
  if (std::abs(z.imag()) < 20.0) return std::sin(pi * z) * std::exp(log_gamma_right(1.0 - z)) / pi;
  return std::exp(log_sin_pi(z) + log_gamma_right(1.0 - z) - std::log(pi));
}

}  // namespace modetrans
