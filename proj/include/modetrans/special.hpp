#pragma once

#include "modetrans/types.hpp"

namespace modetrans {

// log Gamma(z). For Re z >= 1/2 the imaginary part is the branch that is
// continuous from Gamma(1) = 1 along horizontal lines, so
// arg Gamma(1 + nu) is read off without unwrapping.
cplx log_gamma(cplx z);

cplx complex_gamma(cplx z);

// 1 / Gamma(z), finite at the poles.
cplx rgamma(cplx z);

}  // namespace modetrans
