#pragma once

#include <stdexcept>
#include <string>

namespace modetrans {

enum class Errc {
  domain,
  config,
  metric_singular,
  no_degeneracy,
  multiple_crossings,
  degenerate_slope,
  metric_degenerate,
  validity,
  interpretation,
  near_degeneracy,
  tracking,
  defective,
  spectral_gap,
  quadrature,
  near_pole,
  stiffness,
  precision,
  out_of_range,
};

const char* errc_name(Errc c);

// Process exit status for an error: 2 for bad input, 3 for a violated
// model assumption, 4 for a numerical failure.
int exit_status(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace modetrans
