#include "vhi/scenario_io.hpp"

#include <fstream>
#include <sstream>

namespace vhi {

Document::Section& Document::section(const std::string& name) {
  for (auto& s : sections)
    if (s.name == name) return s;
  sections.push_back({name, {}, 0});
  return sections.back();
}

const Document::Section* Document::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

void Document::set(const std::string& section_name, const std::string& key,
                   const std::string& value) {
  auto& s = section(section_name);
  for (auto& e : s.entries)
    if (e.key == key) {
      e.value = value;
      return;
    }
  s.entries.push_back({key, value, 0});
}

void Document::set_num(const std::string& section_name, const std::string& key, double v) {
  set(section_name, key, fmt_g17(v));
}

std::string Document::dump() const {
  std::string out;
  bool first = true;
  for (const auto& s : sections) {
    if (!s.name.empty()) {
      if (!first) out += "\n";
      out += "[" + s.name + "]\n";
    }
    first = false;
    for (const auto& e : s.entries) out += e.key + " = " + e.value + "\n";
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Document parse_document(const std::string& text) {
  Document doc;
  doc.sections.push_back({"", {}, 0});
  Document::Section* cur = &doc.sections.back();
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    // comments start at '#' when at the beginning or preceded by whitespace
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(lineno, static_cast<int>(raw.size()), "unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ParseError(lineno, 1, "empty section name");
      doc.sections.push_back({name, {}, lineno});
      cur = &doc.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(lineno, 1, "expected 'key = value' or '[section]', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, 1, "empty key");
    cur->entries.push_back({key, value, lineno});
  }
  return doc;
}

DocReader::DocReader(const Document& doc) {
  for (const auto& s : doc.sections) {
    known_sections_[s.name] = s.line;
    for (const auto& e : s.entries) {
      auto key = std::make_pair(s.name, e.key);
      if (cells_.count(key))
        throw ParseError(e.line, 1, "duplicate key '" + e.key + "' in section [" + s.name + "]");
      cells_[key] = Cell{e.value, e.line, false};
    }
  }
}

const DocReader::Cell* DocReader::cell(const std::string& section, const std::string& key) const {
  auto it = cells_.find(std::make_pair(section, key));
  return it == cells_.end() ? nullptr : &it->second;
}

const DocReader::Cell& DocReader::require(const std::string& section, const std::string& key) {
  const Cell* c = cell(section, key);
  if (!c)
    throw ParseError(known_sections_.count(section) ? known_sections_.at(section) : 0, 1,
                     "missing required key '" + key + "' in section [" + section + "]");
  c->used = true;
  return *c;
}

bool DocReader::has(const std::string& section, const std::string& key) const {
  return cell(section, key) != nullptr;
}

std::string DocReader::get_string(const std::string& section, const std::string& key) {
  return require(section, key).value;
}

std::string DocReader::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) {
  const Cell* c = cell(section, key);
  if (!c) return fallback;
  c->used = true;
  return c->value;
}

namespace {

double parse_num(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, 1, "not a number: '" + s + "'");
  }
}

}  // namespace

double DocReader::get_double(const std::string& section, const std::string& key) {
  const Cell& c = require(section, key);
  return parse_num(c.value, c.line);
}

double DocReader::get_double(const std::string& section, const std::string& key, double fallback) {
  const Cell* c = cell(section, key);
  if (!c) return fallback;
  c->used = true;
  return parse_num(c->value, c->line);
}

int DocReader::get_int(const std::string& section, const std::string& key, int fallback) {
  const Cell* c = cell(section, key);
  if (!c) return fallback;
  c->used = true;
  const double v = parse_num(c->value, c->line);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ParseError(c->line, 1, "expected integer: " + c->value);
  return i;
}

std::uint64_t DocReader::get_u64(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) {
  const Cell* c = cell(section, key);
  if (!c) return fallback;
  c->used = true;
  try {
    return std::stoull(c->value);
  } catch (const std::exception&) {
    throw ParseError(c->line, 1, "expected unsigned integer: " + c->value);
  }
}

std::vector<double> DocReader::get_list(const std::string& section, const std::string& key) {
  const Cell& c = require(section, key);
  std::vector<double> out;
  std::istringstream in(c.value);
  std::string tok;
  while (in >> tok) out.push_back(parse_num(tok, c.line));
  return out;
}

void DocReader::finish() const {
  for (const auto& [key, c] : cells_)
    if (!c.used)
      throw ParseError(c.line, 1, "unknown key '" + key.second + "' in section [" + key.first +
                                      "]");
}

namespace {

LoadSeries read_load(DocReader& r, const std::string& section, int max_node) {
  LoadSeries s;
  if (!r.has(section, "times")) return s;
  auto times = r.get_list(section, "times");
  auto vals = r.get_list(section, "values");
  if (vals.size() != 2 * times.size())
    throw Error("scenario", "[" + section + "]: values must hold fx fy per time sample");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw Error("scenario", "[" + section + "]: times must be strictly increasing");
  s.times = times;
  for (std::size_t i = 0; i < times.size(); ++i)
    s.values.emplace_back(vals[2 * i], vals[2 * i + 1]);
  if (r.has(section, "nodes")) {
    const std::string spec = r.get_string(section, "nodes");
    if (spec != "all") {
      std::istringstream in(spec);
      int v;
      while (in >> v) {
        if (v < 0 || v > max_node)
          throw Error("scenario", "[" + section + "]: node index out of range: " +
                                      std::to_string(v));
        s.nodes.push_back(v);
      }
    }
  }
  return s;
}

}  // namespace

ContactScenario parse_scenario(const std::string& text) {
  Document doc = parse_document(text);
  DocReader r(doc);
  const std::string schema = r.get_string("", "schema");
  if (schema != kScenarioSchema)
    throw Error("scenario", "unsupported schema '" + schema + "', expected " + kScenarioSchema);

  ContactScenario scn;
  scn.name = r.get_string("", "name", "scenario");
  scn.lx = r.get_double("mesh", "length");
  scn.ly = r.get_double("mesh", "height");
  scn.nx = r.get_int("mesh", "nx", 4);
  scn.ny = r.get_int("mesh", "ny", 2);

  scn.material.theta1 = r.get_double("material", "theta1");
  scn.material.theta2 = r.get_double("material", "theta2", 0.0);
  scn.material.lame_lambda = r.get_double("material", "lame_lambda");
  scn.material.lame_mu = r.get_double("material", "lame_mu");
  scn.material.kappa = r.get_double("material", "kappa", 0.0);
  scn.material.tau_r = r.get_double("material", "tau_r", 1.0);
  if (!(scn.material.theta1 > 0) || scn.material.theta2 < 0)
    throw Error("scenario", "[material]: need theta1 > 0 and theta2 >= 0");
  if (scn.material.lame_mu < 0 || scn.material.lame_lambda < 0 || scn.material.kappa < 0 ||
      !(scn.material.tau_r > 0))
    throw Error("scenario", "[material]: elasticity/relaxation constants out of range");

  scn.laws.F0 = r.get_double("laws", "F0");
  scn.laws.cf = r.get_double("laws", "cf", 0.0);
  scn.laws.k1 = r.get_double("laws", "k1");
  scn.laws.kstar = r.get_double("laws", "kstar");
  scn.laws.pstar = r.get_double("laws", "pstar");
  scn.laws.rstar = r.get_double("laws", "rstar", 1.0);
  scn.laws.mu0 = r.get_double("laws", "mu0");
  scn.laws.gap = r.get_double("laws", "gap");
  if (scn.laws.F0 < 0 || scn.laws.cf < 0 || !(scn.laws.k1 > 0) || scn.laws.kstar < scn.laws.k1 ||
      scn.laws.pstar < 0 || !(scn.laws.rstar > 0) || scn.laws.mu0 < 0 || !(scn.laws.gap > 0))
    throw Error("scenario", "[laws]: constants out of range");

  scn.grid = TimeGrid(r.get_double("grid", "T"), r.get_int("grid", "steps", 10));
  const std::string rule = r.get_string("grid", "rule", "left");
  if (rule == "left")
    scn.rule = QuadratureRule::LeftRectangle;
  else if (rule == "trapezoid")
    scn.rule = QuadratureRule::Trapezoid;
  else
    throw Error("scenario", "[grid]: rule must be 'left' or 'trapezoid'");

  scn.solver.rho = r.get_double("solver", "rho", 0.0);
  scn.solver.inner_tol = r.get_double("solver", "inner_tol", 1e-9);
  scn.solver.outer_tol = r.get_double("solver", "outer_tol", scn.solver.inner_tol);
  scn.solver.max_inner = r.get_int("solver", "max_inner", 400000);
  scn.solver.max_outer = r.get_int("solver", "max_outer", 200);
  scn.solver.divergence_factor = r.get_double("solver", "divergence_factor", 10.0);
  scn.picard_tol = r.get_double("solver", "picard_tol", 1e-7);
  scn.max_picard = r.get_int("solver", "max_picard", 100);

  const int nn = (scn.nx + 1) * (scn.ny + 1);
  const std::string u0spec = r.get_string("initial", "u0", "zero");
  if (u0spec != "zero") {
    std::istringstream in(u0spec);
    std::vector<double> vals;
    double v;
    while (in >> v) vals.push_back(v);
    if (static_cast<int>(vals.size()) != 2 * nn)
      throw Error("scenario", "[initial]: u0 needs 2 values per node (" + std::to_string(2 * nn) +
                                  " total) or 'zero'");
    scn.u0_nodes = Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }

  scn.body = read_load(r, "load.body", nn - 1);
  scn.traction = read_load(r, "load.traction", nn - 1);

  scn.audit_seed = r.get_u64("audit", "seed", scn.audit_seed);
  scn.audit_samples = r.get_int("audit", "samples", scn.audit_samples);
  scn.audit_safety = r.get_double("audit", "safety", scn.audit_safety);

  r.finish();
  return scn;
}

ContactScenario load_scenario(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot open scenario file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_text(const ContactScenario& scn) {
  Document d;
  d.set("", "schema", kScenarioSchema);
  d.set("", "name", scn.name);
  d.set_num("mesh", "length", scn.lx);
  d.set_num("mesh", "height", scn.ly);
  d.set("mesh", "nx", std::to_string(scn.nx));
  d.set("mesh", "ny", std::to_string(scn.ny));
  d.set_num("material", "theta1", scn.material.theta1);
  d.set_num("material", "theta2", scn.material.theta2);
  d.set_num("material", "lame_lambda", scn.material.lame_lambda);
  d.set_num("material", "lame_mu", scn.material.lame_mu);
  d.set_num("material", "kappa", scn.material.kappa);
  d.set_num("material", "tau_r", scn.material.tau_r);
  d.set_num("laws", "F0", scn.laws.F0);
  d.set_num("laws", "cf", scn.laws.cf);
  d.set_num("laws", "k1", scn.laws.k1);
  d.set_num("laws", "kstar", scn.laws.kstar);
  d.set_num("laws", "pstar", scn.laws.pstar);
  d.set_num("laws", "rstar", scn.laws.rstar);
  d.set_num("laws", "mu0", scn.laws.mu0);
  d.set_num("laws", "gap", scn.laws.gap);
  d.set_num("grid", "T", scn.grid.T);
  d.set("grid", "steps", std::to_string(scn.grid.N));
  d.set("grid", "rule", scn.rule == QuadratureRule::LeftRectangle ? "left" : "trapezoid");
  d.set_num("solver", "rho", scn.solver.rho);
  d.set_num("solver", "inner_tol", scn.solver.inner_tol);
  d.set_num("solver", "outer_tol", scn.solver.outer_tol);
  d.set("solver", "max_inner", std::to_string(scn.solver.max_inner));
  d.set("solver", "max_outer", std::to_string(scn.solver.max_outer));
  d.set_num("solver", "divergence_factor", scn.solver.divergence_factor);
  d.set_num("solver", "picard_tol", scn.picard_tol);
  d.set("solver", "max_picard", std::to_string(scn.max_picard));
  auto dump_load = [&](const std::string& sec, const LoadSeries& s) {
    if (s.empty()) return;
    std::string times, values;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      times += (i ? " " : "") + fmt_g17(s.times[i]);
      values += (i ? " " : "") + fmt_g17(s.values[i].x()) + " " + fmt_g17(s.values[i].y());
    }
    d.set(sec, "times", times);
    d.set(sec, "values", values);
    if (!s.nodes.empty()) {
      std::string ns;
      for (std::size_t i = 0; i < s.nodes.size(); ++i)
        ns += (i ? " " : "") + std::to_string(s.nodes[i]);
      d.set(sec, "nodes", ns);
    }
  };
  dump_load("load.body", scn.body);
  dump_load("load.traction", scn.traction);
  d.set("audit", "seed", std::to_string(scn.audit_seed));
  d.set("audit", "samples", std::to_string(scn.audit_samples));
  d.set_num("audit", "safety", scn.audit_safety);
  return d.dump();
}

}  // namespace vhi
