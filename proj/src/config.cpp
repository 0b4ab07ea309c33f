#include "transim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace transim {

namespace {

KeySpec num(std::string path, std::string def, std::string unit, std::string help) {
  return {std::move(path), KeyKind::Number, std::move(def), std::move(unit), {}, std::move(help)};
}
KeySpec list(std::string path, std::string def, std::string unit, std::string help) {
  return {std::move(path), KeyKind::NumberList, std::move(def), std::move(unit), {}, std::move(help)};
}
KeySpec integer(std::string path, std::string def, std::string help) {
  return {std::move(path), KeyKind::Integer, std::move(def), "1", {}, std::move(help)};
}
KeySpec flag(std::string path, std::string def, std::string help) {
  return {std::move(path), KeyKind::Flag, std::move(def), "", {}, std::move(help)};
}
KeySpec choice(std::string path, std::string def, std::vector<std::string> choices, std::string help) {
  return {std::move(path), KeyKind::Choice, std::move(def), "", std::move(choices), std::move(help)};
}
KeySpec text(std::string path, std::string def, std::string help) {
  return {std::move(path), KeyKind::Text, std::move(def), "", {}, std::move(help)};
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

void check_value(const KeySpec& spec, const std::string& value) {
  switch (spec.kind) {
    case KeyKind::Number:
      parse_number(value, spec.path);
      break;
    case KeyKind::NumberList:
      parse_number_list(value, spec.path);
      break;
    case KeyKind::Integer: {
      long v = 0;
      const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
      if (r.ec != std::errc() || r.ptr != value.data() + value.size())
        throw ConfigError(spec.path, "expected an integer, got '" + value + "'");
      break;
    }
    case KeyKind::Flag:
      if (value != "true" && value != "false") throw ConfigError(spec.path, "expected true or false, got '" + value + "'");
      break;
    case KeyKind::Choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string all;
        for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
        throw ConfigError(spec.path, "expected one of {" + all + "}, got '" + value + "'");
      }
      break;
    case KeyKind::Text:
      break;
  }
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema{
      list("device.freq_ghz", "5.641, 6.517, 5.507", "GHz", "qubit frequencies A, B, C"),
      list("device.anharm_mhz", "-300, -381, -303", "MHz", "anharmonicities"),
      list("device.levels", "5, 5, 5", "1", "transmon levels kept per qubit"),
      num("device.coupling.g_ab_mhz", "40", "MHz", "A-B exchange coupling"),
      num("device.coupling.g_bc_mhz", "31", "MHz", "B-C exchange coupling"),
      num("device.coupling.g_ac_mhz", "1.9", "MHz", "A-C parasitic coupling"),
      num("pulse.amp_mhz", "90", "MHz", "plateau amplitude on B"),
      num("pulse.sigma_ns", "10", "ns", "Gaussian edge width"),
      num("pulse.drag", "0", "1", "DRAG coefficient"),
      flag("calibration.refine_drag", "false", "include DRAG in the pulse refinement"),
      integer("calibration.restarts", "4", "random restarts of the phase optimizer"),
      integer("calibration.phase_grid", "8", "coarse drive-phase points"),
      integer("calibration.refine_evaluations", "120", "simulations allowed in the pulse refinement"),
      num("integrator.rtol", "1e-10", "1", "relative tolerance"),
      num("integrator.atol", "1e-12", "1", "absolute tolerance"),
      num("integrator.lindblad_step_ns", "0.5", "ns", "master-equation splitting step"),
      integer("integrator.max_steps", "20000000", "step budget per propagation"),
      choice("zz.coupling_form", "rwa", {"rwa", "full"}, "coupling form of the undriven Hamiltonian"),
      flag("zz.modulated", "false", "also report CW-modulated ZZ from the stark section"),
      choice("spectroscopy.mode", "rabi-2d", {"rabi-2d", "broadband"}, "scan type"),
      num("spectroscopy.f_start_ghz", "6.60", "GHz", "first drive frequency"),
      num("spectroscopy.f_stop_ghz", "6.66", "GHz", "last drive frequency"),
      integer("spectroscopy.f_points", "61", "drive frequencies"),
      num("spectroscopy.t_stop_ns", "1600", "ns", "longest square pulse (rabi-2d)"),
      integer("spectroscopy.t_points", "161", "durations including 0 (rabi-2d)"),
      num("spectroscopy.duration_ns", "2000", "ns", "trace length (broadband)"),
      integer("spectroscopy.samples", "512", "samples per trace (broadband)"),
      text("sweep.parameter", "device.freq_ghz[1]", "comma-separated keys set to each value"),
      list("sweep.values", "6.317, 6.417, 6.517, 6.617", "", "values, in the unit of the swept key"),
      integer("stark.qubits", "2", "2 = isolated A-B pair, 3 = full device"),
      integer("stark.levels", "7", "levels per qubit for the two-qubit scan"),
      num("stark.freq_ghz", "5.729", "GHz", "CW tone frequency"),
      list("stark.eps_mhz", "40, 40", "MHz", "CW amplitude per qubit"),
      list("stark.phase_rad", "0, 0", "rad", "CW phase per qubit"),
      choice("stark.free", "amplitude", {"amplitude", "phase"}, "free coordinate of the two-qubit search"),
      num("stark.amp_lo_mhz", "1", "MHz", "amplitude bracket start"),
      num("stark.amp_hi_mhz", "80", "MHz", "amplitude bracket end"),
      integer("stark.scan_points", "24", "points of the bracketing scan"),
      flag("stark.relative_objective", "true", "three-qubit: weigh each pair by its static magnitude"),
      list("qpt.t1_us", "inf, 200, 100, 50", "us", "T1 per run (all qubits)"),
      list("qpt.t2star_us", "inf, 200, 100, 50", "us", "T2* per run (all qubits)"),
      flag("qpt.refine_phases", "true", "refine the five virtual angles on chi"),
      num("rwa.amp_mhz", "100", "MHz", "amplitude of the frame comparison"),
      num("rwa.lab_rtol", "1e-8", "1", "lab-frame integrator rtol floor"),
      num("rwa.drive_phase_half_width_rad", "0.05", "rad", "lab-frame drive-phase search window"),
      choice("ifredkin.base", "ideal", {"ideal", "calibrated"}, "base three-qubit gate"),
      text("ifredkin.layouts", "a, b, c, d", "layouts to compose"),
      integer("run.workers", "0", "parallel workers (0 = all cores)"),
      integer("run.seed", "1", "optimizer seed"),
      text("run.subcommand", "", "subcommand that produced a manifest"),
  };
  return schema;
}

const KeySpec& key_spec(const std::string& path) {
  for (const auto& k : config_schema())
    if (k.path == path) return k;
  throw ConfigError(path, "unknown key");
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

double parse_number(const std::string& text, const std::string& path) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* b = t.data();
  if (!t.empty() && t[0] == '+') ++b;
  const auto r = std::from_chars(b, t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError(path, "expected a number, got '" + text + "'");
  if (std::isnan(v)) throw ConfigError(path, "value is not finite");
  return v;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& path) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split_commas(text)) out.push_back(parse_number(item, path));
  return out;
}

Config Config::defaults() {
  Config c;
  for (const auto& k : config_schema()) c.values_[k.path] = k.default_value;
  return c;
}

Config Config::parse(std::string_view text, const std::string& origin) {
  Config c = defaults();
  std::map<std::string, int> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = origin + ":" + std::to_string(number);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("", where + ": malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError("", where + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("", where + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string path = section.empty() ? key : section + "." + key;
    if (seen.count(path)) throw ConfigError(path, where + ": duplicate key (first at line " + std::to_string(seen[path]) + ")");
    seen[path] = number;
    try {
      c.set(path, trim(std::string_view(t).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(e.path(), where + ": " + std::string(e.what()));
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void Config::set(const std::string& path, const std::string& value) {
  const KeySpec& spec = key_spec(path);
  const std::string v = trim(value);
  check_value(spec, v);
  values_[path] = v;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("", "override '" + assignment + "' is not key=value");
  set(trim(std::string_view(assignment).substr(0, eq)), assignment.substr(eq + 1));
}

void Config::set_element(const std::string& path, std::size_t index, double value) {
  const KeySpec& spec = key_spec(path);
  if (spec.kind != KeyKind::NumberList) throw ConfigError(path, "indexed assignment needs a list-valued key");
  auto v = numbers(path);
  if (index >= v.size()) throw ConfigError(path, "index " + std::to_string(index) + " out of range");
  v[index] = value;
  std::string joined;
  for (std::size_t k = 0; k < v.size(); ++k) joined += (k ? ", " : "") + format_number(v[k]);
  values_[path] = joined;
}

const std::string& Config::raw(const std::string& path) const {
  const auto it = values_.find(path);
  if (it == values_.end()) throw ConfigError(path, "unknown key");
  return it->second;
}

double Config::number(const std::string& path) const { return parse_number(raw(path), path); }
std::vector<double> Config::numbers(const std::string& path) const { return parse_number_list(raw(path), path); }

long Config::integer(const std::string& path) const {
  const std::string& v = raw(path);
  long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(path, "expected an integer");
  return out;
}

bool Config::flag(const std::string& path) const {
  const std::string& v = raw(path);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(path, "expected true or false");
}

const std::string& Config::text(const std::string& path) const { return raw(path); }

void Config::validate() const {
  for (const auto& [path, value] : values_) check_value(key_spec(path), value);
}

std::string Config::serialize() const {
  std::ostringstream out;
  std::string section = "\x01";
  for (const auto& spec : config_schema()) {
    const auto dot = spec.path.rfind('.');
    const std::string sec = spec.path.substr(0, dot);
    if (sec != section) {
      if (section != "\x01") out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << spec.path.substr(dot + 1) << " = " << raw(spec.path);
    if (!spec.unit.empty()) out << "  # " << spec.unit;
    out << "\n";
  }
  return out.str();
}

}  // namespace transim
