#pragma once

#include <complex>

#include <Eigen/Dense>

namespace modetrans {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr cplx I{0.0, 1.0};

// Sides of the crossing: minus is x < x*, plus is x > x*.
enum class Side { minus, plus };

inline int side_sign(Side s) { return s == Side::minus ? -1 : 1; }

}  // namespace modetrans
