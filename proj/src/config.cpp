#include "strobo/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "strobo/error.hpp"

namespace strobo {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::ConfigError, "field '" + field + "': " + msg);
}

const json& require(const json& j, const char* key, const std::string& field) {
  if (!j.is_object() || !j.contains(key)) fail(field.empty() ? key : field + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<std::int64_t>();
}

CVector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "expected a non-empty list of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t n = 0; n < j.size(); ++n) {
    v(static_cast<Eigen::Index>(n)) = complex_from_json(j[n], field + "[" + std::to_string(n) + "]");
  }
  return v;
}

CMatrix pauli(char which) {
  CMatrix m(2, 2);
  switch (which) {
    case 'x': m << 0.0, 1.0, 1.0, 0.0; break;
    case 'y': m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0; break;
    default: m << 1.0, 0.0, 0.0, -1.0; break;
  }
  return m;
}

CMatrix preset_matrix(const std::string& name, int dimension) {
  if (name == "sigma_x" || name == "sigma_y" || name == "sigma_z") {
    if (dimension != 2) fail("hamiltonian", name + " requires dimension 2");
    return pauli(name[6]);
  }
  if (name == "identity") return CMatrix::Identity(dimension, dimension);
  if (name.rfind("diag:", 0) == 0) {
    json entries;
    try {
      entries = json::parse(name.substr(5));
    } catch (const json::exception& e) {
      fail("hamiltonian", "cannot parse diagonal '" + name + "'");
    }
    if (!entries.is_array() || static_cast<int>(entries.size()) != dimension) {
      fail("hamiltonian", "diag needs exactly " + std::to_string(dimension) + " real entries");
    }
    CMatrix m = CMatrix::Zero(dimension, dimension);
    for (int j = 0; j < dimension; ++j) {
      m(j, j) = number(entries[static_cast<std::size_t>(j)], "hamiltonian.diag[" + std::to_string(j) + "]");
    }
    return m;
  }
  fail("hamiltonian", "unknown preset '" + name + "'");
}

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table = {
      {"qubit-sigma-y", R"({
  "dimension": 2,
  "hamiltonian": "sigma_y",
  "projectors": [
    {"label": "M1", "vector": [[-1, 0], [2, 0]]},
    {"label": "M2", "vector": [[2, 0], [0, 1]]}
  ],
  "times": [0, 0.7853981633974483],
  "truth": {"bloch": {"theta": 1.0471975511965976, "phi": 0.7853981633974483}},
  "shots": "exact",
  "seed": 7,
  "mode": "factored",
  "injectivity_attempts": 64,
  "scan": {"t_min": 0, "t_max": 3.141592653589793, "points": 101}
}
)"},
  };
  return table;
}

}  // namespace

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(field, "expected a complex number [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json vector_to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index n = 0; n < v.size(); ++n) out.push_back(complex_to_json(v(n)));
  return out;
}

json matrix_to_json(const CMatrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

HermitianOperator ExperimentConfig::build_hamiltonian() const {
  if (const auto* name = std::get_if<std::string>(&hamiltonian)) {
    return HermitianOperator(preset_matrix(*name, dimension));
  }
  return HermitianOperator(std::get<CMatrix>(hamiltonian));
}

std::vector<Projector> ExperimentConfig::build_projectors() const {
  std::vector<Projector> out;
  for (const auto& p : projectors) out.push_back(Projector{make_state(p.vector), p.label});
  return out;
}

std::optional<StateVector> ExperimentConfig::build_truth() const {
  if (!truth) return std::nullopt;
  if (const auto* v = std::get_if<CVector>(&*truth)) return make_state(*v);
  return bloch_to_state(std::get<BlochParameters>(*truth));
}

std::vector<double> ExperimentConfig::resolve_times(const MinimalPolynomialInfo& info,
                                                    Execution exec) const {
  if (const auto* explicit_times = std::get_if<std::vector<double>>(&times)) return *explicit_times;
  const auto& a = std::get<AutoTimes>(times);
  return select_times(info, a.horizon, a.grid, exec);
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  auto same_ham = [&] {
    if (hamiltonian.index() != o.hamiltonian.index()) return false;
    if (const auto* s = std::get_if<std::string>(&hamiltonian)) return *s == std::get<std::string>(o.hamiltonian);
    const auto& a = std::get<CMatrix>(hamiltonian);
    const auto& b = std::get<CMatrix>(o.hamiltonian);
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  auto same_truth = [&] {
    if (truth.has_value() != o.truth.has_value()) return false;
    if (!truth) return true;
    if (truth->index() != o.truth->index()) return false;
    if (const auto* v = std::get_if<CVector>(&*truth)) {
      const auto& w = std::get<CVector>(*o.truth);
      return v->size() == w.size() && *v == w;
    }
    const auto& p = std::get<BlochParameters>(*truth);
    const auto& q = std::get<BlochParameters>(*o.truth);
    return p.theta == q.theta && p.phi == q.phi;
  };
  return dimension == o.dimension && same_ham() && projectors == o.projectors && times == o.times &&
         same_truth() && shots == o.shots && seed == o.seed && mode == o.mode &&
         injectivity_attempts == o.injectivity_attempts && scan == o.scan;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) fail("<root>", "expected an object");
  static const std::set<std::string> known = {"dimension", "hamiltonian", "projectors", "times",
                                              "truth", "shots", "seed", "mode",
                                              "injectivity_attempts", "scan"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) fail(key, "unknown field");
  }

  ExperimentConfig c;
  const auto dim = integer(require(j, "dimension", ""), "dimension");
  if (dim < 2) fail("dimension", "must be >= 2");
  c.dimension = static_cast<int>(dim);

  const json& h = require(j, "hamiltonian", "");
  if (h.is_string()) {
    c.hamiltonian = h.get<std::string>();
    (void)preset_matrix(h.get<std::string>(), c.dimension);
  } else {
    if (!h.is_array() || static_cast<int>(h.size()) != c.dimension) {
      fail("hamiltonian", "expected a preset name or a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    }
    CMatrix m(c.dimension, c.dimension);
    for (int r = 0; r < c.dimension; ++r) {
      const std::string f = "hamiltonian[" + std::to_string(r) + "]";
      const CVector row = vector_from_json(h[static_cast<std::size_t>(r)], f);
      if (row.size() != c.dimension) fail(f, "row length differs from dimension");
      m.row(r) = row.transpose();
    }
    c.hamiltonian = m;
  }
  try {
    (void)c.build_hamiltonian();
  } catch (const Error& e) {
    fail("hamiltonian", e.what());
  }

  const json& ps = require(j, "projectors", "");
  if (!ps.is_array() || ps.empty()) fail("projectors", "expected a non-empty list");
  std::set<std::string> labels;
  for (std::size_t n = 0; n < ps.size(); ++n) {
    const std::string f = "projectors[" + std::to_string(n) + "]";
    const json& label = require(ps[n], "label", f);
    if (!label.is_string() || label.get<std::string>().empty()) fail(f + ".label", "expected a non-empty string");
    ProjectorSpec spec{label.get<std::string>(), vector_from_json(require(ps[n], "vector", f), f + ".vector")};
    if (spec.vector.size() != c.dimension) fail(f + ".vector", "length differs from dimension");
    if (spec.vector.norm() == 0.0) fail(f + ".vector", "zero vector");
    if (!labels.insert(spec.label).second) fail(f + ".label", "duplicate label '" + spec.label + "'");
    c.projectors.push_back(std::move(spec));
  }

  const json& t = require(j, "times", "");
  if (t.is_array()) {
    std::vector<double> ts;
    for (std::size_t n = 0; n < t.size(); ++n) ts.push_back(number(t[n], "times[" + std::to_string(n) + "]"));
    if (ts.empty()) fail("times", "empty list");
    c.times = std::move(ts);
  } else if (t.is_object() && t.contains("auto")) {
    const json& a = t.at("auto");
    AutoTimes at{number(require(a, "horizon", "times.auto"), "times.auto.horizon"),
                 static_cast<int>(integer(require(a, "grid", "times.auto"), "times.auto.grid"))};
    if (!(at.horizon > 0.0)) fail("times.auto.horizon", "must be positive");
    if (at.grid < 1) fail("times.auto.grid", "must be positive");
    c.times = at;
  } else {
    fail("times", "expected a list or {\"auto\": {horizon, grid}}");
  }

  if (j.contains("truth") && !j.at("truth").is_null()) {
    const json& tr = j.at("truth");
    if (tr.is_object() && tr.contains("components")) {
      CVector v = vector_from_json(tr.at("components"), "truth.components");
      if (v.size() != c.dimension) fail("truth.components", "length differs from dimension");
      if (v.norm() == 0.0) fail("truth.components", "zero vector");
      c.truth = v;
    } else if (tr.is_object() && tr.contains("bloch")) {
      if (c.dimension != 2) fail("truth.bloch", "Bloch parameters need dimension 2");
      const json& b = tr.at("bloch");
      BlochParameters p{number(require(b, "theta", "truth.bloch"), "truth.bloch.theta"),
                        number(require(b, "phi", "truth.bloch"), "truth.bloch.phi")};
      try {
        (void)bloch_to_state(p);
      } catch (const Error& e) {
        fail("truth.bloch", e.what());
      }
      c.truth = p;
    } else {
      fail("truth", "expected {\"components\": [...]} or {\"bloch\": {theta, phi}}");
    }
  }

  if (j.contains("shots")) {
    const json& s = j.at("shots");
    if (s.is_string() && s.get<std::string>() == "exact") {
      c.shots.reset();
    } else {
      const auto n = integer(s, "shots");
      if (n < 1) fail("shots", "must be >= 1 or \"exact\"");
      c.shots = n;
    }
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      fail("seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("mode")) {
    const json& m = j.at("mode");
    if (!m.is_string()) fail("mode", "expected \"factored\" or \"exact-fit\"");
    try {
      c.mode = parse_mode(m.get<std::string>());
    } catch (const Error&) {
      fail("mode", "expected \"factored\" or \"exact-fit\"");
    }
  }
  if (j.contains("injectivity_attempts")) {
    const auto n = integer(j.at("injectivity_attempts"), "injectivity_attempts");
    if (n < 1) fail("injectivity_attempts", "must be >= 1");
    c.injectivity_attempts = static_cast<int>(n);
  }
  if (j.contains("scan")) {
    const json& s = j.at("scan");
    if (!s.is_object()) fail("scan", "expected an object");
    if (s.contains("t_min")) c.scan.t_min = number(s.at("t_min"), "scan.t_min");
    if (s.contains("t_max")) c.scan.t_max = number(s.at("t_max"), "scan.t_max");
    if (s.contains("points")) c.scan.points = static_cast<int>(integer(s.at("points"), "scan.points"));
    if (c.scan.points < 2) fail("scan.points", "must be >= 2");
    if (!(c.scan.t_max > c.scan.t_min)) fail("scan", "t_max must exceed t_min");
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["dimension"] = c.dimension;
  if (const auto* s = std::get_if<std::string>(&c.hamiltonian)) {
    j["hamiltonian"] = *s;
  } else {
    j["hamiltonian"] = matrix_to_json(std::get<CMatrix>(c.hamiltonian));
  }
  j["projectors"] = json::array();
  for (const auto& p : c.projectors) {
    j["projectors"].push_back({{"label", p.label}, {"vector", vector_to_json(p.vector)}});
  }
  if (const auto* ts = std::get_if<std::vector<double>>(&c.times)) {
    j["times"] = *ts;
  } else {
    const auto& a = std::get<AutoTimes>(c.times);
    j["times"] = {{"auto", {{"horizon", a.horizon}, {"grid", a.grid}}}};
  }
  if (c.truth) {
    if (const auto* v = std::get_if<CVector>(&*c.truth)) {
      j["truth"] = {{"components", vector_to_json(*v)}};
    } else {
      const auto& b = std::get<BlochParameters>(*c.truth);
      j["truth"] = {{"bloch", {{"theta", b.theta}, {"phi", b.phi}}}};
    }
  } else {
    j["truth"] = nullptr;
  }
  if (c.shots) {
    j["shots"] = *c.shots;
  } else {
    j["shots"] = "exact";
  }
  j["seed"] = c.seed;
  j["mode"] = std::string(to_string(c.mode));
  j["injectivity_attempts"] = c.injectivity_attempts;
  j["scan"] = {{"t_min", c.scan.t_min}, {"t_max", c.scan.t_max}, {"points", c.scan.points}};
  return j;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : presets()) out.push_back(name);
  return out;
}

std::string preset_text(const std::string& name) {
  const auto& table = presets();
  auto it = table.find(name);
  if (it == table.end()) throw Error(ErrorKind::ConfigError, "unknown preset '" + name + "'");
  return it->second;
}

ExperimentConfig load_config(const std::string& path) {
  if (path.rfind("preset:", 0) == 0) return parse_config_text(preset_text(path.substr(7)));
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + std::string(e.what()).substr(std::string("ConfigError: ").size()));
  }
}

json record_to_json(const MeasurementRecord& r) {
  json j;
  j["projector"] = r.projector_label;
  j["time"] = r.time;
  j["value"] = r.value;
  if (r.shots) {
    j["shots"] = *r.shots;
  } else {
    j["shots"] = "exact";
  }
  return j;
}

MeasurementRecord record_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected a record object");
  MeasurementRecord r;
  const json& label = require(j, "projector", field);
  if (!label.is_string()) fail(field + ".projector", "expected a string");
  r.projector_label = label.get<std::string>();
  r.time = number(require(j, "time", field), field + ".time");
  r.value = number(require(j, "value", field), field + ".value");
  if (!(r.value >= 0.0 && r.value <= 1.0)) fail(field + ".value", "must lie in [0, 1]");
  if (j.contains("shots")) {
    const json& s = j.at("shots");
    if (s.is_string() && s.get<std::string>() == "exact") {
      r.shots.reset();
    } else {
      const auto n = integer(s, field + ".shots");
      if (n < 1) fail(field + ".shots", "must be >= 1 or \"exact\"");
      r.shots = n;
    }
  }
  return r;
}

std::vector<MeasurementRecord> records_from_json(const json& j) {
  if (!j.is_array()) fail("<data>", "expected a list of measurement records");
  std::vector<MeasurementRecord> out;
  for (std::size_t n = 0; n < j.size(); ++n) out.push_back(record_from_json(j[n], "[" + std::to_string(n) + "]"));
  return out;
}

json records_to_json(const std::vector<MeasurementRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back(record_to_json(r));
  return out;
}

std::vector<MeasurementRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::DataMismatch, "cannot open data file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::DataMismatch, "malformed data file '" + path + "': " + e.what());
  }
  try {
    return records_from_json(j);
  } catch (const Error& e) {
    throw Error(ErrorKind::DataMismatch, path + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace strobo
