#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modetrans/crossing.hpp"
#include "modetrans/models.hpp"
#include "modetrans/oracle.hpp"
#include "modetrans/transition.hpp"

namespace modetrans {

using json = nlohmann::json;

struct ModelSpec {
  std::string name = "dirac";  // dirac | lz | spectator | pencil
  double E = 0.0;
  std::vector<double> U{0.0, 1.0};
  double p = 1.0;
  double slope = 1.0;
  double gap = 1.0;
  double bias1 = 0.0;
  double bias2 = 0.0;
  std::vector<Spectator> extras;
  std::string base = "dirac";  // base catalog model for spectator
  std::optional<PencilModel> pencil;

  bool operator==(const ModelSpec& o) const;
};

struct RunConfig {
  ModelSpec model;
  double x_min = -1.0;
  double x_max = 1.0;
  std::vector<double> hbars{1e-3};
  double gamma = 0.2;
  double tol = 1e-10;
  std::string format = "json";
  std::string out;

  bool operator==(const RunConfig& o) const;
};

// Throws Errc::config on unknown keys or malformed values.
RunConfig parse_config(const json& j);
json config_to_json(const RunConfig& cfg);

PencilModel build_model(const RunConfig& cfg);

json complex_json(cplx z);
cplx complex_from_json(const json& j);
json matrix_json(const CMatrix& m);
CMatrix matrix_from_json(const json& j);

json crossing_json(const CrossingData& data, double hbar);

// {nu, w, entries, magnitudes, phases, R, T | renumbered, flux_check}.
json transition_json(const TransitionMatrix& tm, double n1, double n2);

// Reads a transition block back and re-checks det T = 1 and the flux
// identities; throws Errc::precision if they fail by more than tol.
Matrix2c load_transition(const json& j, double tol = 1e-10);

json empirical_json(const EmpiricalTransition& e, double n1, double n2);

json analyze_report(const RunConfig& cfg);
json oracle_report(const RunConfig& cfg);

// JSON text with doubles at 17 significant digits, keys sorted.
std::string dump_json(const json& j, int indent = 2);

// RFC 4180: header row, CRLF line ends, quoted fields where needed.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::string csv_number(double v);

int run_cli(int argc, char** argv);

}  // namespace modetrans
