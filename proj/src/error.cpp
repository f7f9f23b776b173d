#include "modetrans/error.hpp"

namespace modetrans {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::domain: return "E_Domain";
    case Errc::config: return "E_Config";
    case Errc::metric_singular: return "E_MetricSingular";
    case Errc::no_degeneracy: return "E_NoDegeneracy";
    case Errc::multiple_crossings: return "E_MultipleCrossings";
    case Errc::degenerate_slope: return "E_DegenerateSlope";
    case Errc::metric_degenerate: return "E_MetricDegenerate";
    case Errc::validity: return "E_Validity";
    case Errc::interpretation: return "E_Interpretation";
    case Errc::near_degeneracy: return "E_NearDegeneracy";
    case Errc::tracking: return "E_Tracking";
    case Errc::defective: return "E_Defective";
    case Errc::spectral_gap: return "E_SpectralGap";
    case Errc::quadrature: return "E_Quadrature";
    case Errc::near_pole: return "E_NearPole";
    case Errc::stiffness: return "E_Stiffness";
    case Errc::precision: return "E_Precision";
    case Errc::out_of_range: return "E_OutOfRange";
  }
  return "E_Unknown";
}

int exit_status(Errc c) {
  switch (c) {
    case Errc::domain:
    case Errc::config:
      return 2;
    case Errc::metric_singular:
    case Errc::no_degeneracy:
    case Errc::multiple_crossings:
    case Errc::degenerate_slope:
    case Errc::metric_degenerate:
    case Errc::validity:
    case Errc::interpretation:
    case Errc::spectral_gap:
      return 3;
    default:
      return 4;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace modetrans
