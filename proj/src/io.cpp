#include "dissip/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace dissip {

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, size_t i) { return path + "/" + std::to_string(i); }

const json& field(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(child(path, key), "missing field");
  return *it;
}

const json* optional_field(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<Polynomial> polynomials(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of polynomial strings");
  std::vector<Polynomial> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string p = child(path, i);
    try {
      out.push_back(parse_polynomial(text(j[i], p)));
    } catch (const PolynomialError& e) {
      throw SchemaError(p, e.what());
    }
  }
  return out;
}

json polynomials_to_json(const std::vector<Polynomial>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(p.str());
  return a;
}

// Largest u index appearing in the polynomials.
int inferred_inputs(const std::vector<std::vector<Polynomial>*>& groups) {
  int n = 0;
  for (const auto* g : groups) {
    for (const auto& p : *g) {
      for (const auto& [m, c] : p.terms()) {
        for (const auto& [v, e] : m.powers()) {
          if (v.block == VarBlock::u) n = std::max(n, v.index + 1);
        }
      }
    }
  }
  return n;
}

int inputs_field(const json& j, const std::string& path, int inferred) {
  const json* f = optional_field(j, "inputs");
  if (!f) return inferred;
  const int n = integer(*f, child(path, "inputs"));
  if (n < inferred) throw SchemaError(child(path, "inputs"), "smaller than the largest input index used");
  return n;
}

Subsystem subsystem_from_json(const json& j, const std::string& path) {
  const std::string type = text(field(j, path, "type"), child(path, "type"));
  if (type == "lti") {
    LtiSubsystem s;
    s.A = matrix_from_json(field(j, path, "A"), child(path, "A"));
    s.B = matrix_from_json(field(j, path, "B"), child(path, "B"));
    s.C = matrix_from_json(field(j, path, "C"), child(path, "C"));
    if (s.A.rows() != s.A.cols()) throw SchemaError(child(path, "A"), "must be square");
    if (s.B.rows() != s.A.rows()) throw SchemaError(child(path, "B"), "row count must match A");
    if (s.C.cols() != s.A.rows()) throw SchemaError(child(path, "C"), "column count must match A");
    if (const json* d = optional_field(j, "D")) {
      const MatrixXd D = matrix_from_json(*d, child(path, "D"));
      if (D.size() && D.cwiseAbs().maxCoeff() != 0.0) throw SchemaError(child(path, "D"), "feedthrough must be zero");
    }
    return s;
  }
  if (type == "poly") {
    PolySubsystem s;
    s.f = polynomials(field(j, path, "f"), child(path, "f"));
    s.h = polynomials(field(j, path, "h"), child(path, "h"));
    s.n_inputs = inputs_field(j, path, inferred_inputs({&s.f, &s.h}));
    if (const json* e = optional_field(j, "eid")) {
      if (!e->is_boolean()) throw SchemaError(child(path, "eid"), "expected a boolean");
      s.eid = e->get<bool>();
    }
    return s;
  }
  if (type == "rational") {
    RationalSubsystem s;
    s.p = polynomials(field(j, path, "p"), child(path, "p"));
    s.q = polynomials(field(j, path, "q"), child(path, "q"));
    s.h = polynomials(field(j, path, "h"), child(path, "h"));
    if (s.q.size() != s.p.size()) throw SchemaError(child(path, "q"), "needs one denominator per state");
    s.n_inputs = inputs_field(j, path, inferred_inputs({&s.p, &s.q, &s.h}));
    if (const json* e = optional_field(j, "eps")) s.eps = number(*e, child(path, "eps"));
    return s;
  }
  if (type == "fixed_supply") {
    FixedSupplySubsystem s;
    s.X = matrix_from_json(field(j, path, "X"), child(path, "X"));
    if (s.X.rows() != s.X.cols()) throw SchemaError(child(path, "X"), "must be square");
    s.n_inputs = integer(field(j, path, "inputs"), child(path, "inputs"));
    if (s.n_inputs < 0 || s.n_inputs > s.X.rows()) throw SchemaError(child(path, "inputs"), "out of range");
    if (const json* n = optional_field(j, "note")) s.note = text(*n, child(path, "note"));
    return s;
  }
  throw SchemaError(child(path, "type"), "unknown subsystem type '" + type + "'");
}

json subsystem_to_json(const Subsystem& s) {
  json j;
  j["type"] = type_name(s);
  if (const auto* l = std::get_if<LtiSubsystem>(&s)) {
    j["A"] = matrix_to_json(l->A);
    j["B"] = matrix_to_json(l->B);
    j["C"] = matrix_to_json(l->C);
  } else if (const auto* p = std::get_if<PolySubsystem>(&s)) {
    j["f"] = polynomials_to_json(p->f);
    j["h"] = polynomials_to_json(p->h);
    j["inputs"] = p->n_inputs;
    j["eid"] = p->eid;
  } else if (const auto* r = std::get_if<RationalSubsystem>(&s)) {
    j["p"] = polynomials_to_json(r->p);
    j["q"] = polynomials_to_json(r->q);
    j["h"] = polynomials_to_json(r->h);
    j["inputs"] = r->n_inputs;
    j["eps"] = r->eps;
  } else {
    const auto& f = std::get<FixedSupplySubsystem>(s);
    j["X"] = matrix_to_json(f.X);
    j["inputs"] = f.n_inputs;
    if (!f.note.empty()) j["note"] = f.note;
  }
  return j;
}

json realization_to_json(const Realization& r) {
  return {{"A", matrix_to_json(r.A)}, {"B", matrix_to_json(r.B)}, {"C", matrix_to_json(r.C)},
          {"D", matrix_to_json(r.D)}};
}

Realization realization_from_json(const json& j, const std::string& path) {
  Realization r;
  r.A = matrix_from_json(field(j, path, "A"), child(path, "A"));
  r.B = matrix_from_json(field(j, path, "B"), child(path, "B"));
  r.C = matrix_from_json(field(j, path, "C"), child(path, "C"));
  r.D = matrix_from_json(field(j, path, "D"), child(path, "D"));
  if (r.A.rows() != r.A.cols()) throw SchemaError(child(path, "A"), "must be square");
  if (r.B.rows() != r.A.rows() || r.B.cols() != r.D.cols()) throw SchemaError(child(path, "B"), "shape mismatch");
  if (r.C.cols() != r.A.rows() || r.C.rows() != r.D.rows()) throw SchemaError(child(path, "C"), "shape mismatch");
  return r;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct RuntimeRow {
  std::string name, outcome;
  int n = 0, iterations = 0;
  double admm_ms = 0.0;
  std::optional<double> direct_ms;
  std::optional<bool> direct_feasible;
};

std::vector<RuntimeRow> runtime_rows(const std::vector<json>& results) {
  std::vector<RuntimeRow> rows;
  for (size_t i = 0; i < results.size(); ++i) {
    const json& r = results[i];
    const std::string p = child("", i);
    RuntimeRow row;
    row.name = r.contains("name") ? text(r["name"], child(p, "name")) : std::to_string(i);
    row.outcome = text(field(r, p, "outcome"), child(p, "outcome"));
    row.n = integer(field(r, p, "n_subsystems"), child(p, "n_subsystems"));
    row.iterations = integer(field(r, p, "iterations"), child(p, "iterations"));
    row.admm_ms = number(field(r, p, "wall_ms"), child(p, "wall_ms"));
    if (const json* d = optional_field(r, "direct")) {
      row.direct_ms = number(field(*d, child(p, "direct"), "wall_ms"), child(child(p, "direct"), "wall_ms"));
      row.direct_feasible = field(*d, child(p, "direct"), "feasible").get<bool>();
    }
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RuntimeRow& a, const RuntimeRow& b) {
    return std::tie(a.n, a.name) < std::tie(b.n, b.name);
  });
  return rows;
}

std::vector<std::pair<int, double>> cumulative_points(const std::vector<json>& results) {
  if (results.empty()) throw SchemaError("/", "no results");
  std::vector<int> its;
  for (size_t i = 0; i < results.size(); ++i) {
    const std::string p = child("", i);
    if (text(field(results[i], p, "outcome"), child(p, "outcome")) == "Certified") {
      its.push_back(integer(field(results[i], p, "iterations"), child(p, "iterations")));
    }
  }
  std::sort(its.begin(), its.end());
  std::vector<std::pair<int, double>> pts;
  for (size_t i = 0; i < its.size(); ++i) {
    if (i + 1 < its.size() && its[i + 1] == its[i]) continue;
    pts.emplace_back(its[i], static_cast<double>(i + 1) / static_cast<double>(results.size()));
  }
  return pts;
}

const char* svg_head = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\" font-family=\"sans-serif\" "
                       "font-size=\"11\">\n<rect width=\"480\" height=\"320\" fill=\"white\"/>\n"
                       "<line x1=\"60\" y1=\"270\" x2=\"460\" y2=\"270\" stroke=\"black\"/>\n"
                       "<line x1=\"60\" y1=\"270\" x2=\"60\" y2=\"20\" stroke=\"black\"/>\n";

}  // namespace

json matrix_to_json(const MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", json::array()}};
  }
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

MatrixXd matrix_from_json(const json& j, const std::string& path) {
  if (j.is_object()) {
    const int r = integer(field(j, path, "rows"), child(path, "rows"));
    const int c = integer(field(j, path, "cols"), child(path, "cols"));
    const json& data = field(j, path, "data");
    if (r < 0 || c < 0) throw SchemaError(path, "negative extent");
    if (!data.is_array() || data.size() != static_cast<size_t>(r) * c) {
      throw SchemaError(child(path, "data"), "expected " + std::to_string(r * c) + " numbers");
    }
    MatrixXd m(r, c);
    for (int k = 0; k < r * c; ++k) m(k / c, k % c) = number(data[k], child(child(path, "data"), k));
    return m;
  }
  if (!j.is_array()) throw SchemaError(path, "expected a matrix (array of rows)");
  if (j.empty()) return MatrixXd(0, 0);
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    const std::string rp = child(path, r);
    if (!j[r].is_array()) throw SchemaError(rp, "expected a row array");
    if (j[r].size() != cols) throw SchemaError(rp, "row length " + std::to_string(j[r].size()) + ", expected " +
                                                       std::to_string(cols));
    for (size_t c = 0; c < cols; ++c) m(r, c) = number(j[r][c], child(rp, c));
  }
  return m;
}

json problem_to_json(const Problem& p) {
  json j;
  if (!p.note.empty()) j["note"] = p.note;
  json subs = json::array();
  for (const auto& s : p.subsystems) subs.push_back(subsystem_to_json(s));
  j["subsystems"] = subs;
  j["M"] = matrix_to_json(p.M);
  j["dims"] = {{"pd", p.pd}, {"me", p.me}};
  if (p.objective.kind == Objective::Kind::supply) {
    j["objective"] = {{"kind", "supply"}, {"W", matrix_to_json(p.objective.W)}};
  } else {
    j["objective"] = {{"kind", "l2_gain"}, {"gamma", p.objective.gamma}, {"convention", to_string(p.objective.convention)}};
  }
  json pins = json::array();
  for (const auto& pin : p.pins) {
    pins.push_back({{"subsystem", pin.subsystem}, {"entry", {pin.row, pin.col}}, {"value", pin.value}});
  }
  j["pins"] = pins;
  if (p.storage_floor != 0.0) j["storage_floor"] = p.storage_floor;
  if (p.iqc) {
    json psi = json::array();
    for (const auto& r : p.iqc->psi) psi.push_back(realization_to_json(r));
    j["iqc"] = {{"psi", psi}, {"psi_w", realization_to_json(p.iqc->psi_w)}};
  }
  return j;
}

Problem problem_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("/", "expected an object");
  Problem p;
  if (const json* n = optional_field(j, "note")) p.note = text(*n, "/note");
  const json& subs = field(j, "", "subsystems");
  if (!subs.is_array() || subs.empty()) throw SchemaError("/subsystems", "expected a non-empty array");
  for (size_t i = 0; i < subs.size(); ++i) p.subsystems.push_back(subsystem_from_json(subs[i], child("/subsystems", i)));
  p.M = matrix_from_json(field(j, "", "M"), "/M");
  const json& dims = field(j, "", "dims");
  p.pd = integer(field(dims, "/dims", "pd"), "/dims/pd");
  p.me = integer(field(dims, "/dims", "me"), "/dims/me");
  if (p.pd < 0 || p.me < 0) throw SchemaError("/dims", "sizes must be nonnegative");
  const Dims d = p.dims();
  if (p.M.rows() != d.total_m() || p.M.cols() != d.total_p()) {
    throw SchemaError("/M", "expected " + std::to_string(d.total_m()) + "x" + std::to_string(d.total_p()) + ", got " +
                                std::to_string(p.M.rows()) + "x" + std::to_string(p.M.cols()));
  }

  const json& obj = field(j, "", "objective");
  const std::string kind = text(field(obj, "/objective", "kind"), "/objective/kind");
  if (kind == "supply") {
    p.objective.kind = Objective::Kind::supply;
    p.objective.W = matrix_from_json(field(obj, "/objective", "W"), "/objective/W");
    if (p.objective.W.rows() != p.pd + p.me || p.objective.W.cols() != p.pd + p.me) {
      throw SchemaError("/objective/W", "expected " + std::to_string(p.pd + p.me) + "x" + std::to_string(p.pd + p.me));
    }
  } else if (kind == "l2_gain") {
    p.objective.kind = Objective::Kind::l2_gain;
    p.objective.gamma = number(field(obj, "/objective", "gamma"), "/objective/gamma");
    if (!(p.objective.gamma > 0.0)) throw SchemaError("/objective/gamma", "must be positive");
    if (const json* c = optional_field(obj, "convention")) {
      const std::string conv = text(*c, "/objective/convention");
      if (conv == "A") {
        p.objective.convention = GainConvention::A;
      } else if (conv == "B") {
        p.objective.convention = GainConvention::B;
      } else {
        throw SchemaError("/objective/convention", "expected \"A\" or \"B\"");
      }
    }
  } else {
    throw SchemaError("/objective/kind", "expected \"supply\" or \"l2_gain\"");
  }

  if (const json* pins = optional_field(j, "pins")) {
    if (!pins->is_array()) throw SchemaError("/pins", "expected an array");
    for (size_t i = 0; i < pins->size(); ++i) {
      const std::string pp = child("/pins", i);
      const json& e = (*pins)[i];
      Pin pin;
      pin.subsystem = integer(field(e, pp, "subsystem"), child(pp, "subsystem"));
      if (pin.subsystem < 0 || pin.subsystem >= d.n()) throw SchemaError(child(pp, "subsystem"), "out of range");
      const json& entry = field(e, pp, "entry");
      if (!entry.is_array() || entry.size() != 2) throw SchemaError(child(pp, "entry"), "expected [row, col]");
      pin.row = integer(entry[0], child(child(pp, "entry"), 0));
      pin.col = integer(entry[1], child(child(pp, "entry"), 1));
      const int sd = d.m[pin.subsystem] + d.p[pin.subsystem];
      if (pin.row < 0 || pin.col < 0 || pin.row >= sd || pin.col >= sd) {
        throw SchemaError(child(pp, "entry"), "outside the " + std::to_string(sd) + "x" + std::to_string(sd) + " supply");
      }
      pin.value = number(field(e, pp, "value"), child(pp, "value"));
      p.pins.push_back(pin);
    }
  }
  if (const json* f = optional_field(j, "storage_floor")) p.storage_floor = number(*f, "/storage_floor");

  if (const json* iqc = optional_field(j, "iqc")) {
    IqcSpec spec;
    const json& psi = field(*iqc, "/iqc", "psi");
    if (!psi.is_array() || psi.size() != subs.size()) {
      throw SchemaError("/iqc/psi", "expected one realization per subsystem");
    }
    for (size_t i = 0; i < psi.size(); ++i) spec.psi.push_back(realization_from_json(psi[i], child("/iqc/psi", i)));
    spec.psi_w = realization_from_json(field(*iqc, "/iqc", "psi_w"), "/iqc/psi_w");
    p.iqc = spec;
  }
  return p;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

Problem load_problem(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
  return problem_from_json(j);
}

void save_problem(const Problem& p, const std::string& path) { write_text(path, problem_to_json(p).dump(2) + "\n"); }

AdmmOptions RunConfig::admm_options() const {
  AdmmOptions o;
  o.max_iters = max_iters;
  o.threads = threads;
  o.stall_window = stall_window;
  o.local.storage_degree = storage_degree;
  o.local.solve.tol_gap = tol_gap;
  o.global.tol_gap = tol_gap;
  return o;
}

json RunConfig::to_json() const {
  const AdmmOptions o = admm_options();
  return {{"command", command},
          {"problem", problem},
          {"output", output},
          {"max_iters", max_iters},
          {"storage_degree", storage_degree},
          {"threads", threads},
          {"tol_gap", tol_gap},
          {"strict_margin", o.global.strict_margin},
          {"stall_window", stall_window},
          {"stall_decrease", o.stall_decrease},
          {"stall_relative", o.stall_relative},
          {"gamma_lo", gamma_lo},
          {"gamma_hi", gamma_hi},
          {"tol_gamma", tol_gamma},
          {"direct", direct},
          {"seed", seed}};
}

json results_to_json(const CertResult& r, const RunConfig& cfg, const std::string& residual_csv,
                     const std::optional<BisectResult>& bisect, const std::optional<DirectResult>& direct,
                     const std::string& note) {
  json j;
  j["name"] = cfg.problem;
  if (!note.empty()) j["note"] = note;
  j["outcome"] = to_string(r.outcome);
  j["iterations"] = r.iterations;
  j["wall_ms"] = r.wall_ms;
  j["message"] = r.message;
  j["warnings"] = r.warnings;
  j["n_subsystems"] = static_cast<int>(r.X.size());
  json xs = json::array(), zs = json::array(), certs = json::array();
  for (const auto& x : r.X) xs.push_back(matrix_to_json(x));
  for (const auto& z : r.Z) zs.push_back(matrix_to_json(z));
  for (const auto& c : r.local) {
    json cj = {{"kind", c.kind},           {"status", to_string(c.status)}, {"verified", c.verified},
               {"distance", c.distance}, {"verify_residual", c.verify_residual}, {"wall_ms", c.wall_ms}};
    if (c.P.size()) cj["P"] = matrix_to_json(c.P);
    if (!c.V.terms().empty()) cj["V"] = c.V.str();
    certs.push_back(cj);
  }
  j["X"] = xs;
  j["Z"] = zs;
  j["certificates"] = certs;
  j["global"] = {{"ok", r.global.ok}, {"lambda_max", r.global.lambda_max}, {"tol", r.global.tol}};
  if (r.global.P.size()) j["global"]["P"] = matrix_to_json(r.global.P);
  j["residual_csv"] = residual_csv;
  if (bisect) {
    json probes = json::array();
    for (const auto& [g, o] : bisect->probes) probes.push_back({{"gamma", g}, {"outcome", to_string(o)}});
    j["bisection"] = {{"ok", bisect->ok}, {"gamma", bisect->gamma}, {"probes", probes}, {"message", bisect->message}};
    if (bisect->ok) j["gamma"] = bisect->gamma;
  }
  if (direct) {
    j["direct"] = {{"status", to_string(direct->status)},
                   {"feasible", direct->feasible},
                   {"wall_ms", direct->wall_ms},
                   {"message", direct->message}};
  }
  j["config"] = cfg.to_json();
  return j;
}

std::string cumulative_iterations_csv(const std::vector<json>& results) {
  std::string s = "iterations,fraction_certified\n";
  for (const auto& [k, f] : cumulative_points(results)) s += std::to_string(k) + "," + fmt(f) + "\n";
  return s;
}

std::string runtime_table_csv(const std::vector<json>& results) {
  if (results.empty()) throw SchemaError("/", "no results");
  std::string s = "name,n_subsystems,outcome,iterations,admm_ms,direct_feasible,direct_ms\n";
  for (const auto& r : runtime_rows(results)) {
    s += r.name + "," + std::to_string(r.n) + "," + r.outcome + "," + std::to_string(r.iterations) + "," +
         fmt(r.admm_ms) + "," + (r.direct_feasible ? (*r.direct_feasible ? "1" : "0") : "") + "," +
         (r.direct_ms ? fmt(*r.direct_ms) : "") + "\n";
  }
  return s;
}

std::string cumulative_iterations_svg(const std::vector<json>& results) {
  const auto pts = cumulative_points(results);
  int kmax = 1;
  for (const auto& [k, f] : pts) kmax = std::max(kmax, k);
  auto x = [&](double k) { return 60.0 + 400.0 * k / kmax; };
  auto y = [](double f) { return 270.0 - 250.0 * f; };
  std::string s = svg_head;
  std::string path = "M " + fmt(x(0)) + " " + fmt(y(0));
  double prev = 0.0;
  for (const auto& [k, f] : pts) {
    path += " L " + fmt(x(k)) + " " + fmt(y(prev)) + " L " + fmt(x(k)) + " " + fmt(y(f));
    prev = f;
  }
  path += " L " + fmt(x(kmax)) + " " + fmt(y(prev));
  s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\"/>\n";
  s += "<text x=\"260\" y=\"300\" text-anchor=\"middle\">iterations (max " + std::to_string(kmax) + ")</text>\n";
  s += "<text x=\"20\" y=\"150\" transform=\"rotate(-90 20 150)\" text-anchor=\"middle\">fraction certified</text>\n";
  s += "<text x=\"55\" y=\"24\" text-anchor=\"end\">1</text>\n<text x=\"55\" y=\"272\" text-anchor=\"end\">0</text>\n";
  s += "</svg>\n";
  return s;
}

std::string runtime_table_svg(const std::vector<json>& results) {
  const auto rows = runtime_rows(results);
  // Mean time per subsystem count, log10 scale.
  std::map<int, std::pair<double, int>> admm, direct;
  for (const auto& r : rows) {
    admm[r.n].first += r.admm_ms;
    admm[r.n].second += 1;
    if (r.direct_ms) {
      direct[r.n].first += *r.direct_ms;
      direct[r.n].second += 1;
    }
  }
  double lo = 1e300, hi = -1e300;
  int nmax = 1;
  for (const auto* m : {&admm, &direct}) {
    for (const auto& [n, v] : *m) {
      const double t = std::log10(std::max(v.first / v.second, 1e-3));
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      nmax = std::max(nmax, n);
    }
  }
  if (hi - lo < 1.0) hi = lo + 1.0;
  auto x = [&](double n) { return 60.0 + 400.0 * n / nmax; };
  auto y = [&](double ms) { return 270.0 - 250.0 * (std::log10(std::max(ms, 1e-3)) - lo) / (hi - lo); };
  std::string s = svg_head;
  const std::pair<const std::map<int, std::pair<double, int>>*, const char*> series[] = {{&admm, "#1f5fa8"},
                                                                                        {&direct, "#b03a2e"}};
  for (const auto& [m, color] : series) {
    if (m->empty()) continue;
    std::string pts;
    for (const auto& [n, v] : *m) {
      const double ms = v.first / v.second;
      pts += fmt(x(n)) + "," + fmt(y(ms)) + " ";
      s += "<circle cx=\"" + fmt(x(n)) + "\" cy=\"" + fmt(y(ms)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
  }
  s += "<text x=\"260\" y=\"300\" text-anchor=\"middle\">subsystems N (max " + std::to_string(nmax) + ")</text>\n";
  s += "<text x=\"20\" y=\"150\" transform=\"rotate(-90 20 150)\" text-anchor=\"middle\">mean wall ms (log)</text>\n";
  s += "<text x=\"55\" y=\"24\" text-anchor=\"end\">" + escape_xml(fmt(std::pow(10.0, hi))) + "</text>\n";
  s += "<text x=\"55\" y=\"272\" text-anchor=\"end\">" + escape_xml(fmt(std::pow(10.0, lo))) + "</text>\n";
  s += "<text x=\"460\" y=\"34\" text-anchor=\"end\" fill=\"#1f5fa8\">admm</text>\n";
  s += "<text x=\"460\" y=\"48\" text-anchor=\"end\" fill=\"#b03a2e\">direct</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace dissip
