#include "modetrans/app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "modetrans/adiabatic.hpp"
#include "modetrans/error.hpp"
#include "modetrans/inner.hpp"
#include "modetrans/pcf.hpp"

namespace modetrans {

namespace {

void log_line(const std::string& msg) { std::cerr << "modetrans: " << msg << '\n'; }

bool same_matrices(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || a[i] != b[i]) return false;
  return true;
}

const json& need(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(Errc::config, std::string("missing key \"") + key + "\"");
  return j.at(key);
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw Error(Errc::config, std::string("\"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw Error(Errc::config, "unknown key \"" + it.key() + "\" in " + where);
  }
}

std::vector<double> poly_from_json(const json& j) {
  if (j.is_string()) return parse_potential(j.get<std::string>());
  if (!j.is_array() || j.empty()) throw Error(Errc::config, "U must be a string or a non-empty array");
  std::vector<double> c;
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(Errc::config, "U coefficients must be numbers");
    c.push_back(v.get<double>());
  }
  return c;
}

std::vector<CMatrix> matrices_from_json(const json& j, Eigen::Index dim, const char* what) {
  if (!j.is_array()) throw Error(Errc::config, std::string(what) + " must be an array of matrices");
  std::vector<CMatrix> out;
  for (const auto& m : j) {
    CMatrix a = matrix_from_json(m);
    if (a.rows() != dim || a.cols() != dim) throw Error(Errc::config, std::string(what) + " has the wrong shape");
    out.push_back(a);
  }
  return out;
}

ModelSpec model_from_json(const json& j) {
  ModelSpec s;
  if (j.is_string()) {
    s.name = j.get<std::string>();
    if (s.name != "dirac" && s.name != "lz") throw Error(Errc::config, "unknown model \"" + s.name + "\"");
    return s;
  }
  if (!j.is_object()) throw Error(Errc::config, "model must be a name or an object");
  s.name = need(j, "name").get<std::string>();
  auto catalog_params = [&](ModelSpec& t, const std::string& which) {
    if (which == "dirac") {
      t.E = get_num(j, "E", t.E);
      if (j.contains("U")) t.U = poly_from_json(j.at("U"));
      t.p = get_num(j, "p", t.p);
    } else if (which == "lz") {
      t.slope = get_num(j, "slope", t.slope);
      t.gap = get_num(j, "gap", t.gap);
      t.bias1 = get_num(j, "bias1", t.bias1);
      t.bias2 = get_num(j, "bias2", t.bias2);
    } else {
      throw Error(Errc::config, "unknown catalog model \"" + which + "\"");
    }
  };
  if (s.name == "dirac") {
    check_keys(j, {"name", "E", "U", "p"}, "dirac model");
    catalog_params(s, "dirac");
  } else if (s.name == "lz") {
    check_keys(j, {"name", "slope", "gap", "bias1", "bias2"}, "lz model");
    catalog_params(s, "lz");
  } else if (s.name == "spectator") {
    check_keys(j, {"name", "base", "extras", "E", "U", "p", "slope", "gap", "bias1", "bias2"}, "spectator model");
    s.base = j.value("base", std::string("dirac"));
    catalog_params(s, s.base);
    for (const auto& e : need(j, "extras")) {
      check_keys(e, {"offset", "coupling"}, "spectator level");
      s.extras.push_back({need(e, "offset").get<double>(), need(e, "coupling").get<double>()});
    }
  } else if (s.name == "pencil") {
    check_keys(j, {"name", "dim", "k_coeffs", "b_coeffs", "metric"}, "pencil");
    PencilModel m;
    m.name = "pencil";
    m.metric = matrix_from_json(need(j, "metric"));
    const auto d = m.metric.rows();
    if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != d) throw Error(Errc::config, "dim does not match metric");
    m.k_coeffs = matrices_from_json(need(j, "k_coeffs"), d, "k_coeffs");
    if (j.contains("b_coeffs")) m.b_coeffs = matrices_from_json(j.at("b_coeffs"), d, "b_coeffs");
    s.pencil = m;
  } else {
    throw Error(Errc::config, "unknown model \"" + s.name + "\"");
  }
  return s;
}

json model_to_json(const ModelSpec& s) {
  json j;
  j["name"] = s.name;
  auto catalog = [&](const std::string& which) {
    if (which == "dirac") {
      j["E"] = s.E;
      j["U"] = s.U;
      j["p"] = s.p;
    } else {
      j["slope"] = s.slope;
      j["gap"] = s.gap;
      j["bias1"] = s.bias1;
      j["bias2"] = s.bias2;
    }
  };
  if (s.name == "dirac" || s.name == "lz") catalog(s.name);
  if (s.name == "spectator") {
    j["base"] = s.base;
    catalog(s.base);
    json ex = json::array();
    for (const auto& e : s.extras) ex.push_back({{"offset", e.offset}, {"coupling", e.coupling}});
    j["extras"] = ex;
  }
  if (s.name == "pencil" && s.pencil) {
    j["dim"] = s.pencil->dim();
    j["metric"] = matrix_json(s.pencil->metric);
    json k = json::array(), b = json::array();
    for (const auto& m : s.pencil->k_coeffs) k.push_back(matrix_json(m));
    for (const auto& m : s.pencil->b_coeffs) b.push_back(matrix_json(m));
    j["k_coeffs"] = k;
    j["b_coeffs"] = b;
  }
  return j;
}

std::string classification(int w) { return w > 0 ? "avoided" : "unavoidable"; }

void dump_value(std::ostringstream& os, const json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string pad0 = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* colon = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << json(it.key()).dump() << colon;
        dump_value(os, it.value(), indent, depth + 1);
      }
      os << nl << pad0 << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
      if (flat) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << (indent > 0 ? ", " : ",");
          dump_value(os, j[i], indent, depth + 1);
        }
        os << ']';
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        dump_value(os, j[i], indent, depth + 1);
      }
      os << nl << pad0 << ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>() + 0.0;
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

bool ModelSpec::operator==(const ModelSpec& o) const {
  if (name != o.name) return false;
  auto cat = [&](const std::string& w) {
    if (w == "dirac") return E == o.E && U == o.U && p == o.p;
    return slope == o.slope && gap == o.gap && bias1 == o.bias1 && bias2 == o.bias2;
  };
  if (name == "dirac" || name == "lz") return cat(name);
  if (name == "spectator") {
    if (base != o.base || extras.size() != o.extras.size() || !cat(base)) return false;
    for (std::size_t i = 0; i < extras.size(); ++i)
      if (extras[i].offset != o.extras[i].offset || extras[i].coupling != o.extras[i].coupling) return false;
    return true;
  }
  if (!pencil || !o.pencil) return !pencil && !o.pencil;
  return pencil->metric == o.pencil->metric && same_matrices(pencil->k_coeffs, o.pencil->k_coeffs) &&
         same_matrices(pencil->b_coeffs, o.pencil->b_coeffs);
}

bool RunConfig::operator==(const RunConfig& o) const {
  return model == o.model && x_min == o.x_min && x_max == o.x_max && hbars == o.hbars && gamma == o.gamma &&
         tol == o.tol && format == o.format && out == o.out;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(Errc::config, "complex numbers are [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

CMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(Errc::config, "matrix must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  CMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw Error(Errc::config, "matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw Error(Errc::config, "config must be a JSON object");
  check_keys(j, {"schema", "model", "pencil", "interval", "hbars", "gamma", "tol", "format", "out"}, "config");
  RunConfig c;
  if (j.contains("model") && j.contains("pencil")) throw Error(Errc::config, "give either model or pencil");
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("pencil")) {
    json p = j.at("pencil");
    p["name"] = "pencil";
    c.model = model_from_json(p);
  }
  if (j.contains("interval")) {
    const auto& iv = j.at("interval");
    if (!iv.is_array() || iv.size() != 2) throw Error(Errc::config, "interval must be [x_min, x_max]");
    c.x_min = iv[0].get<double>();
    c.x_max = iv[1].get<double>();
    if (!(c.x_max > c.x_min)) throw Error(Errc::config, "interval is empty");
  }
  if (j.contains("hbars")) {
    c.hbars.clear();
    for (const auto& h : j.at("hbars")) c.hbars.push_back(h.get<double>());
    for (double h : c.hbars)
      if (!(h > 0 && h < 1)) throw Error(Errc::config, "hbar values must lie in (0, 1)");
    if (c.hbars.empty()) throw Error(Errc::config, "hbars is empty");
  }
  c.gamma = get_num(j, "gamma", c.gamma);
  if (!(c.gamma > 0 && c.gamma < 0.5)) throw Error(Errc::config, "gamma must lie in (0, 1/2)");
  c.tol = get_num(j, "tol", c.tol);
  c.format = j.value("format", c.format);
  if (c.format != "json" && c.format != "csv") throw Error(Errc::config, "format must be json or csv");
  c.out = j.value("out", c.out);
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["schema"] = 1;
  j["model"] = model_to_json(c.model);
  j["interval"] = {c.x_min, c.x_max};
  j["hbars"] = c.hbars;
  j["gamma"] = c.gamma;
  j["tol"] = c.tol;
  j["format"] = c.format;
  if (!c.out.empty()) j["out"] = c.out;
  return j;
}

PencilModel build_model(const RunConfig& c) {
  const ModelSpec& s = c.model;
  auto catalog = [&](const std::string& which) {
    if (which == "dirac") return model_dirac(s.E, s.U, s.p, c.x_min, c.x_max);
    if (which == "lz") return model_landau_zener(s.slope, s.gap, c.x_min, c.x_max, s.bias1, s.bias2);
    throw Error(Errc::config, "unknown catalog model \"" + which + "\"");
  };
  if (s.name == "dirac" || s.name == "lz") return catalog(s.name);
  if (s.name == "spectator") return model_spectator(catalog(s.base), s.extras);
  if (s.name == "pencil") {
    if (!s.pencil) throw Error(Errc::config, "pencil model without matrices");
    PencilModel m = *s.pencil;
    m.x_min = c.x_min;
    m.x_max = c.x_max;
    validate(m);
    return m;
  }
  throw Error(Errc::config, "unknown model \"" + s.name + "\"");
}

json crossing_json(const CrossingData& d, double hbar) {
  json j;
  j["x_star"] = d.x_star;
  j["beta0"] = d.beta0;
  j["Q"] = d.q;
  j["b"] = d.b;
  j["p_sq"] = d.p2;
  j["w"] = d.w;
  j["norms"] = {d.n1, d.n2};
  j["nu"] = complex_json(d.nu);
  j["theta_a"] = d.theta_a;
  j["theta_a_before_fix"] = d.theta_a_raw;
  j["sigma"] = complex_json(d.sigma);
  j["zeta"] = d.zeta;
  j["B12"] = complex_json(d.b12);
  j["B21"] = complex_json(d.b21);
  j["beta_av"] = {d.beta_av0, d.beta_av1};
  j["hbar"] = hbar;
  j["kappa_plus"] = complex_json(kappa(d, Side::plus, hbar));
  j["kappa_minus"] = complex_json(kappa(d, Side::minus, hbar));
  j["classification"] = classification(d.w);
  return j;
}

json transition_json(const TransitionMatrix& tm, double n1, double n2) {
  json j;
  j["nu"] = complex_json(tm.nu);
  j["w"] = tm.w;
  j["norms"] = {n1, n2};
  j["entries"] = matrix_json(tm.t);
  j["magnitudes"] = {{std::abs(tm.t(0, 0)), std::abs(tm.t(0, 1))}, {std::abs(tm.t(1, 0)), std::abs(tm.t(1, 1))}};
  j["phases"] = {{std::arg(tm.t(0, 0)), std::arg(tm.t(0, 1))}, {std::arg(tm.t(1, 0)), std::arg(tm.t(1, 1))}};
  const PolarForm pf = polar_form(tm.nu);
  j["theta_prime"] = pf.theta_prime;
  j["theta_gamma"] = pf.theta_gamma;
  if (tm.w < 0) {
    const Scattering s = reflection_transmission(tm);
    j["R"] = complex_json(s.reflection);
    j["T"] = complex_json(s.transmission);
    j["abs_R"] = std::abs(s.reflection);
    j["abs_T"] = std::abs(s.transmission);
  } else {
    const Matrix2c r = renumbered(tm);
    j["renumbered"] = matrix_json(r);
    j["transmission"] = std::abs(r(0, 0));
    j["excitation"] = std::abs(r(1, 0));
  }
  j["flux_check"] = flux_residuals(tm.t, n1, n2).max();
  return j;
}

Matrix2c load_transition(const json& j, double tol) {
  const CMatrix m = matrix_from_json(need(j, "entries"));
  if (m.rows() != 2) throw Error(Errc::config, "transition matrix must be 2x2");
  const auto& nn = need(j, "norms");
  const double n1 = nn.at(0).get<double>(), n2 = nn.at(1).get<double>();
  const Matrix2c t = m;
  const double r = flux_residuals(t, n1, n2).max();
  if (r > tol) {
    throw Error(Errc::precision, "transition matrix violates the flux identities by " + std::to_string(r));
  }
  return t;
}

json empirical_json(const EmpiricalTransition& e, double n1, double n2) {
  json j;
  j["hbar"] = e.hbar;
  j["x_left"] = e.x_left;
  j["x_right"] = e.x_right;
  j["entries"] = matrix_json(e.m);
  j["norms"] = {n1, n2};
  j["projection_residuals"] = {e.residual[0], e.residual[1]};
  j["max_flux_drift"] = e.max_flux_drift;
  j["steps"] = e.steps;
  j["flux_check"] = flux_residuals(e.m, n1, n2).max();
  if (n1 * n2 < 0) {
    j["R"] = complex_json(-e.m(1, 0) / e.m(1, 1));
    j["T"] = complex_json(e.m.determinant() / e.m(1, 1));
  } else {
    j["transmission"] = std::abs(e.m(0, 1));
    j["excitation"] = std::abs(e.m(1, 1));
  }
  return j;
}

json analyze_report(const RunConfig& cfg) {
  const PencilModel model = build_model(cfg);
  const CrossingData d = analyze_crossing(model);
  json r;
  r["schema"] = 1;
  r["command"] = "analyze";
  r["config"] = config_to_json(cfg);
  r["crossing"] = crossing_json(d, cfg.hbars.front());
  r["transition"] = transition_json(transition_matrix(d.nu, d.w), d.n1, d.n2);
  json warnings = json::array();
  if (d.frame.size() > 2) warnings.push_back("spectator modes present; T is the two-mode result");
  r["warnings"] = warnings;
  return r;
}

json oracle_report(const RunConfig& cfg) {
  const PencilModel model = build_model(cfg);
  const CrossingData d = analyze_crossing(model);
  const TransitionMatrix tm = transition_matrix(d.nu, d.w);
  OracleOptions opts;
  opts.tol = cfg.tol;
  opts.gamma = cfg.gamma;
  json r;
  r["schema"] = 1;
  r["command"] = "oracle";
  r["config"] = config_to_json(cfg);
  r["crossing"] = crossing_json(d, cfg.hbars.front());
  r["asymptotic"] = transition_json(tm, d.n1, d.n2);
  json runs = json::array(), warnings = json::array();
  std::vector<double> hs = cfg.hbars;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  for (double h : hs) {
    log_line("oracle at hbar = " + csv_number(h));
    const EmpiricalTransition e = empirical_transition(model, d, h, opts);
    json ej = empirical_json(e, d.n1, d.n2);
    ej["err_max_entry"] = (e.m - tm.t).cwiseAbs().maxCoeff();
    runs.push_back(ej);
    if (e.leakage_warning) warnings.push_back("projection residual above leakage bound at hbar = " + csv_number(h));
  }
  r["empirical"] = runs;
  r["warnings"] = warnings;
  return r;
}

std::string dump_json(const json& j, int indent) {
  std::ostringstream os;
  dump_value(os, j, indent, 0);
  os << '\n';
  return os.str();
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto field = [&](const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      os << f;
      return;
    }
    os << '"';
    for (char ch : f) {
      if (ch == '"') os << '"';
      os << ch;
    }
    os << '"';
  };
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ',';
      field(r[i]);
    }
    os << "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
}

namespace {

struct CommonArgs {
  std::string config_path, model, U, spectators, format, out, hbar_list;
  double E = 0, p = 1, slope = 1, gap = 1, bias1 = 0, bias2 = 0, xmin = -1, xmax = 1, gamma = 0.2, tol = 1e-10;
  std::vector<CLI::Option*> opts;
  CLI::Option *o_model, *o_E, *o_U, *o_p, *o_slope, *o_gap, *o_bias1, *o_bias2, *o_xmin, *o_xmax, *o_hbar,
      *o_gamma, *o_tol, *o_format, *o_out, *o_spect, *o_config;

  void add(CLI::App* app) {
    o_config = app->add_option("--config", config_path, "JSON config file");
    o_model = app->add_option("--model", model, "dirac | lz | spectator");
    o_E = app->add_option("--E", E, "Dirac energy");
    o_U = app->add_option("--U", U, "Dirac potential: a polynomial such as \"x + 0.2x^3\", or \"tanh(h,w,x0,deg)\" valid for |x - x0| < pi w / 2");
    o_p = app->add_option("--p", p, "Dirac transverse momentum");
    o_slope = app->add_option("--slope", slope, "LZ slope");
    o_gap = app->add_option("--gap", gap, "LZ coupling");
    o_bias1 = app->add_option("--bias1", bias1, "LZ diagonal B entry 1");
    o_bias2 = app->add_option("--bias2", bias2, "LZ diagonal B entry 2");
    o_spect = app->add_option("--spectators", spectators, "offset:coupling list for the spectator model, e.g. 5:0.3,-5:0.3");
    o_xmin = app->add_option("--xmin", xmin, "left end of the interval");
    o_xmax = app->add_option("--xmax", xmax, "right end of the interval");
    o_hbar = app->add_option("--hbar,--hbars", hbar_list, "hbar value or comma-separated list");
    o_gamma = app->add_option("--gamma", gamma, "matching exponent");
    o_tol = app->add_option("--tol", tol, "integrator tolerance");
    o_format = app->add_option("--format", format, "json | csv");
    o_out = app->add_option("--out", out, "output file (default stdout)");
  }

  RunConfig config() const {
    RunConfig c;
    if (o_config->count()) {
      std::ifstream in(config_path);
      if (!in) throw Error(Errc::config, "cannot open " + config_path);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw Error(Errc::config, std::string("invalid JSON: ") + e.what());
      }
      c = parse_config(j);
    }
    if (o_model->count()) {
      c.model.name = model;
      if (model == "spectator") c.model.base = "dirac";
    }
    if (o_E->count()) c.model.E = E;
    if (o_U->count()) c.model.U = parse_potential(U);
    if (o_p->count()) c.model.p = p;
    if (o_slope->count()) c.model.slope = slope;
    if (o_gap->count()) c.model.gap = gap;
    if (o_bias1->count()) c.model.bias1 = bias1;
    if (o_bias2->count()) c.model.bias2 = bias2;
    if (c.model.name == "spectator" && (o_slope->count() || o_gap->count())) c.model.base = "lz";
    if (o_spect->count()) {
      c.model.extras.clear();
      std::stringstream ss(spectators);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw Error(Errc::config, "spectators are offset:coupling pairs");
        c.model.extras.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      }
    }
    if (c.model.name == "spectator" && c.model.extras.empty()) c.model.extras = {{5.0, 0.3}, {-5.0, 0.3}};
    if (o_xmin->count()) c.x_min = xmin;
    if (o_xmax->count()) c.x_max = xmax;
    if (o_hbar->count()) {
      c.hbars.clear();
      std::stringstream ss(hbar_list);
      std::string item;
      while (std::getline(ss, item, ',')) c.hbars.push_back(std::stod(item));
      for (double h : c.hbars)
        if (!(h > 0 && h < 1)) throw Error(Errc::config, "hbar values must lie in (0, 1)");
    }
    if (o_gamma->count()) c.gamma = gamma;
    if (o_tol->count()) c.tol = tol;
    if (o_format->count()) c.format = format;
    if (o_out->count()) c.out = out;
    if (c.format != "json" && c.format != "csv") throw Error(Errc::config, "format must be json or csv");
    if (!(c.x_max > c.x_min)) throw Error(Errc::config, "interval is empty");
    return c;
  }
};

void emit(const RunConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error(Errc::config, "cannot write " + c.out);
  f << text;
  log_line("wrote " + c.out);
}

std::string sweep_output(const RunConfig& c) {
  const PencilModel model = build_model(c);
  const CrossingData d = analyze_crossing(model);
  OracleOptions opts;
  opts.tol = c.tol;
  opts.gamma = c.gamma;
  const SweepResult s = hbar_sweep(model, d, c.hbars, opts);
  if (c.format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : s.rows) {
      rows.push_back({csv_number(r.hbar), csv_number(r.err), csv_number(r.err_t11), csv_number(r.err_t12),
                      csv_number(r.err_t21), csv_number(r.err_t22), csv_number(std::abs(r.emp.m(0, 0))),
                      csv_number(std::abs(r.emp.m(1, 0))), csv_number(r.emp.max_flux_drift),
                      s.slope_fitted ? csv_number(s.slope) : "", s.monotone ? "true" : "false"});
    }
    std::ostringstream os;
    write_csv(os, {"hbar", "err_abs", "err_t11", "err_t12", "err_t21", "err_t22", "abs_m11", "abs_m21",
                   "flux_drift", "slope", "monotone"},
              rows);
    return os.str();
  }
  json j;
  j["schema"] = 1;
  j["command"] = "sweep";
  j["config"] = config_to_json(c);
  j["asymptotic"] = matrix_json(s.asymptotic);
  json rows = json::array();
  for (const auto& r : s.rows) {
    json e = empirical_json(r.emp, d.n1, d.n2);
    e["err_abs"] = r.err;
    rows.push_back(e);
  }
  j["rows"] = rows;
  j["slope"] = s.slope_fitted ? json(s.slope) : json(nullptr);
  j["monotone"] = s.monotone;
  return dump_json(j);
}

std::string pcf_output(double nu_im, const std::vector<cplx>& ts, const std::string& format) {
  const cplx nu(0.0, nu_im);
  std::vector<PcfValue> vals;
  for (cplx t : ts) vals.push_back(dnu_pair(nu, t));
  if (format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const auto& v = vals[i];
      rows.push_back({csv_number(ts[i].real()), csv_number(ts[i].imag()), csv_number(v.d_nu.real()),
                      csv_number(v.d_nu.imag()), csv_number(v.d_nu_m1.real()), csv_number(v.d_nu_m1.imag()),
                      regime_name(v.regime), csv_number(v.est_error)});
    }
    std::ostringstream os;
    write_csv(os, {"t_re", "t_im", "d_nu_re", "d_nu_im", "d_nu_m1_re", "d_nu_m1_im", "regime", "est_error"}, rows);
    return os.str();
  }
  json j;
  j["schema"] = 1;
  j["command"] = "pcf";
  j["nu"] = complex_json(nu);
  json arr = json::array();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    arr.push_back({{"t", complex_json(ts[i])},
                   {"d_nu", complex_json(vals[i].d_nu)},
                   {"d_nu_m1", complex_json(vals[i].d_nu_m1)},
                   {"regime", regime_name(vals[i].regime)},
                   {"est_error", vals[i].est_error}});
  }
  j["values"] = arr;
  return dump_json(j);
}

std::string modes_output(const RunConfig& c, int points, bool inner, cplx A, cplx B, double tau_max) {
  const PencilModel model = build_model(c);
  const CrossingData d = analyze_crossing(model);
  const double hbar = c.hbars.front();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  if (inner) {
    header = {"tau", "a1_re", "a1_im", "a2_re", "a2_im", "flux"};
    for (int k = 0; k < points; ++k) {
      const double tau = -tau_max + 2.0 * tau_max * k / std::max(1, points - 1);
      const InnerValue v = inner_leading(d, A, B, tau);
      const double flux = (std::norm(v.a1) * d.n1 + std::norm(v.a2) * d.n2);
      rows.push_back({csv_number(tau), csv_number(v.a1.real()), csv_number(v.a1.imag()), csv_number(v.a2.real()),
                      csv_number(v.a2.imag()), csv_number(flux)});
    }
  } else {
    AdiabaticContext ctx(model, d, hbar, c.gamma);
    header = {"side", "mode", "x"};
    for (Eigen::Index i = 0; i < model.dim(); ++i) {
      header.push_back("psi" + std::to_string(i) + "_re");
      header.push_back("psi" + std::to_string(i) + "_im");
    }
    header.push_back("phase");
    header.push_back("flux");
    const double r = default_validity_radius(ctx) * 1.001;
    for (Side side : {Side::minus, Side::plus}) {
      const double s = side_sign(side);
      const double far = side == Side::minus ? model.x_min : model.x_max;
      const double near = d.x_star + s * r;
      if ((far - near) * s <= 0) continue;
      for (int k = 0; k < points; ++k) {
        const double x = near + (far - near) * k / std::max(1, points - 1);
        for (int j = 1; j <= 2; ++j) {
          const CVector psi = leading_mode(ctx, j, side, x);
          std::vector<std::string> row{side == Side::minus ? "minus" : "plus", std::to_string(j), csv_number(x)};
          for (Eigen::Index i = 0; i < psi.size(); ++i) {
            row.push_back(csv_number(psi(i).real()));
            row.push_back(csv_number(psi(i).imag()));
          }
          row.push_back(csv_number(mode_phase(ctx, j, side, x)));
          row.push_back(csv_number(g_inner(psi, psi, model.metric).real()));
          rows.push_back(row);
        }
      }
    }
  }
  std::ostringstream os;
  write_csv(os, header, rows);
  return os.str();
}

std::vector<cplx> parse_complex_list(const std::string& s) {
  std::vector<cplx> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto comma = item.find(',');
    if (comma == std::string::npos) {
      out.emplace_back(std::stod(item), 0.0);
    } else {
      out.emplace_back(std::stod(item.substr(0, comma)), std::stod(item.substr(comma + 1)));
    }
  }
  return out;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Transition matrices at eigenvalue crossings of Hermitian pencils"};
  app.require_subcommand(1);

  CommonArgs a_an, a_or, a_sw, a_mo;
  auto* analyze = app.add_subcommand("analyze", "crossing parameters and the asymptotic transition matrix");
  a_an.add(analyze);
  auto* oracle = app.add_subcommand("oracle", "empirical transition matrices from direct integration");
  a_or.add(oracle);
  auto* sweep = app.add_subcommand("sweep", "convergence of the oracle in hbar");
  a_sw.add(sweep);
  auto* modes = app.add_subcommand("modes", "sampled adiabatic or inner solutions as CSV");
  a_mo.add(modes);
  int points = 200;
  bool inner = false;
  std::string coef_a = "1,0", coef_b = "0,0";
  double tau_max = 10.0;
  modes->add_option("--points", points, "samples per side");
  modes->add_flag("--inner", inner, "sample the inner solution instead");
  modes->add_option("--A", coef_a, "inner coefficient A as re,im");
  modes->add_option("--B", coef_b, "inner coefficient B as re,im");
  modes->add_option("--tau-max", tau_max, "inner grid half-width");

  auto* pcf = app.add_subcommand("pcf", "parabolic cylinder function values");
  double nu_im = 0.5;
  std::string t_list = "1,0";
  std::string pcf_format = "json", pcf_out;
  pcf->add_option("--nu-im", nu_im, "imaginary part of nu");
  pcf->add_option("--t", t_list, "arguments as re,im;re,im;...");
  pcf->add_option("--format", pcf_format, "json | csv");
  pcf->add_option("--out", pcf_out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) {
      const RunConfig c = a_an.config();
      emit(c, dump_json(analyze_report(c)));
    } else if (oracle->parsed()) {
      const RunConfig c = a_or.config();
      emit(c, dump_json(oracle_report(c)));
    } else if (sweep->parsed()) {
      const RunConfig c = a_sw.config();
      emit(c, sweep_output(c));
    } else if (modes->parsed()) {
      const RunConfig c = a_mo.config();
      const auto av = parse_complex_list(coef_a), bv = parse_complex_list(coef_b);
      if (av.size() != 1 || bv.size() != 1) throw Error(Errc::config, "--A and --B take one complex number");
      emit(c, modes_output(c, points, inner, av[0], bv[0], tau_max));
    } else if (pcf->parsed()) {
      if (pcf_format != "json" && pcf_format != "csv") throw Error(Errc::config, "format must be json or csv");
      RunConfig c;
      c.out = pcf_out;
      emit(c, pcf_output(nu_im, parse_complex_list(t_list), pcf_format));
    }
  } catch (const Error& e) {
    log_line(e.what());
    return exit_status(e.code());
  } catch (const std::invalid_argument& e) {
    log_line(std::string("E_Config: ") + e.what());
    return 2;
  } catch (const json::exception& e) {
    log_line(std::string("E_Config: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log_line(std::string("E_Numeric: ") + e.what());
    return 4;
  }
  return 0;
}

}  // namespace modetrans
