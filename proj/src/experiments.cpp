#include "transim/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "transim/analysis.hpp"
#include "transim/parallel.hpp"

namespace transim {

namespace {

using Json = nlohmann::ordered_json;

Json quantity(double value, const char* unit) {
  Json j;
  j["value"] = value;
  j["unit"] = unit;
  return j;
}

std::string label(int k, int qubits = 3) {
  std::string s;
  for (int q = qubits - 1; q >= 0; --q) s += ((k >> q) & 1) ? '1' : '0';
  return s;
}

template <typename M>
Json matrix_json(const M& m, const char* unit, bool basis_labels) {
  Json j;
  j["unit"] = unit;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  if (basis_labels) {
    Json b = Json::array();
    for (Eigen::Index k = 0; k < m.rows(); ++k) b.push_back(label(static_cast<int>(k)));
    j["basis"] = b;
  }
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ii = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  j["real"] = re;
  j["imag"] = im;
  return j;
}

Json correction_json(const PhaseCorrection& c) {
  Json j;
  j["theta_ab"] = quantity(c.theta_ab, "rad");
  j["theta_bc"] = quantity(c.theta_bc, "rad");
  j["phi_a"] = quantity(c.phi_a, "rad");
  j["phi_b"] = quantity(c.phi_b, "rad");
  j["phi_c"] = quantity(c.phi_c, "rad");
  j["phi_drive"] = quantity(c.phi_drive, "rad");
  return j;
}

Json calibration_json(const CalibrationResult& r, double amp_mhz) {
  Json j;
  j["amp"] = quantity(amp_mhz, "MHz");
  j["f_s"] = quantity(r.f_s_ghz, "GHz");
  j["f_d"] = quantity(r.f_d_ghz, "GHz");
  j["duration"] = quantity(r.duration_ns, "ns");
  j["drag"] = quantity(r.drag, "1");
  j["transfer"] = quantity(r.transfer, "1");
  j["fidelity"] = quantity(r.fidelity, "1");
  j["error"] = quantity(1.0 - r.fidelity, "1");
  j["correction"] = correction_json(r.correction);
  j["transition_half_period"] = quantity(r.transition.half_period_ns, "ns");
  j["transition_peak_transfer"] = quantity(r.transition.peak_transfer, "1");
  j["undriven_gap"] = quantity(r.transition.undriven_gap_ghz, "GHz");
  Json scan = Json::array();
  for (const auto& [t, p] : r.duration_scan) scan.push_back({{"duration_ns", t}, {"transfer", p}});
  j["duration_scan"] = {{"units", {{"duration_ns", "ns"}, {"transfer", "1"}}}, {"points", scan}};
  j["simulations"] = r.simulations;
  j["gate"] = matrix_json(r.gate, "1", true);
  j["raw_gate"] = matrix_json(r.raw, "1", true);
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("", "cannot write " + path.string());
  out << text;
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : columns_(header.size()) { row(header); }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw ArgumentError("csv: row width mismatch");
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << escape(cells[k]);
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string e = "\"";
    for (char c : s) e += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return e + "\"";
  }
  std::size_t columns_;
  std::ostringstream out_;
};

const std::string& n(double v) {
  thread_local std::string s;
  s = format_number(v);
  return s;
}

std::vector<double> linspace(double a, double b, long count, const std::string& path) {
  if (count < 1) throw ConfigError(path, "point count must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) v[k] = count == 1 ? a : a + (b - a) * static_cast<double>(k) / (count - 1);
  return v;
}

int workers_of(const Config& c) { return static_cast<int>(c.integer("run.workers")); }

CWDriveSpec cw_from_config(const Config& c, int qubits) {
  CWDriveSpec cw{c.number("stark.freq_ghz"), c.numbers("stark.eps_mhz"), c.numbers("stark.phase_rad")};
  if (static_cast<int>(cw.eps_mhz.size()) != qubits)
    throw ConfigError("stark.eps_mhz", "needs " + std::to_string(qubits) + " entries");
  if (static_cast<int>(cw.phase.size()) != qubits)
    throw ConfigError("stark.phase_rad", "needs " + std::to_string(qubits) + " entries");
  return cw;
}

DeviceParams stark_device(const Config& c) {
  const long q = c.integer("stark.qubits");
  if (q == 3) return device_from_config(c);
  if (q != 2) throw ConfigError("stark.qubits", "must be 2 or 3");
  const DeviceParams full = device_from_config(c);
  const int levels = static_cast<int>(c.integer("stark.levels"));
  DeviceParams p;
  p.freq_ghz = {full.freq_ghz[0], full.freq_ghz[1]};
  p.anharm_mhz = {full.anharm_mhz[0], full.anharm_mhz[1]};
  p.couplings = {{0, 1, full.g_mhz(0, 1)}};
  p.levels = {levels, levels};
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError("stark.levels", e.what());
  }
  return p;
}

// ---------------------------------------------------------------------------

std::string run_zz(const Config& c, const std::filesystem::path& out) {
  const DeviceParams p = device_from_config(c);
  ZZOptions o;
  o.form = c.text("zz.coupling_form") == "full" ? CouplingForm::Full : CouplingForm::ExcitationConserving;
  const ZZReport zz = static_zz(p, o);
  const bool modulated = c.flag("zz.modulated");
  std::vector<std::string> header{"pair", "xi_static[MHz]", "xi_perturbative[MHz]"};
  ZZReport zz_mod;
  CWDriveSpec cw;
  if (modulated) {
    header.push_back("xi_modulated[MHz]");
    header.push_back("xi_modulated_analytic[MHz]");
    cw = cw_from_config(c, p.qubits());
    zz_mod = modulated_zz(p, cw);
  }
  Csv csv(header);
  std::ostringstream summary;
  for (Pair pair : kAllPairs) {
    const auto [i, j] = qubits_of(pair);
    if (j >= p.qubits()) continue;
    std::vector<std::string> row{pair_name(pair), n(zz.at(pair))};
    row.push_back(pair == Pair::AC ? "nan" : n(perturbative_zz_nn(p, pair)));
    if (modulated) {
      row.push_back(n(zz_mod.at(pair)));
      row.push_back(n(modulated_zz_analytic(p, cw, pair)));
    }
    csv.row(row);
    summary << "xi_" << pair_name(pair) << " = " << zz.at(pair) << " MHz\n";
  }
  write_text(out, csv.str());
  return summary.str();
}

std::string run_spectroscopy(const Config& c, const std::filesystem::path& out) {
  const DeviceParams p = device_from_config(c);
  const double amp = c.number("pulse.amp_mhz");
  const auto freqs = linspace(c.number("spectroscopy.f_start_ghz"), c.number("spectroscopy.f_stop_ghz"),
                              c.integer("spectroscopy.f_points"), "spectroscopy.f_points");
  std::ostringstream summary;
  if (c.text("spectroscopy.mode") == "rabi-2d") {
    const auto durations =
        linspace(0.0, c.number("spectroscopy.t_stop_ns"), c.integer("spectroscopy.t_points"), "spectroscopy.t_points");
    ScanOptions o;
    o.workers = workers_of(c);
    o.integrator = integrator_from_config(c);
    const RabiMap map = rabi_2d_scan(p, amp, freqs, durations, o);
    Csv csv({"f_d[GHz]", "duration[ns]", "P_110[1]"});
    double best = 0.0;
    double best_f = freqs.front();
    for (std::size_t r = 0; r < freqs.size(); ++r)
      for (std::size_t k = 0; k < durations.size(); ++k) {
        const double v = map.population(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
        csv.row({n(freqs[r]), n(durations[k]), n(v)});
        if (v > best) {
          best = v;
          best_f = freqs[r];
        }
      }
    write_text(out, csv.str());
    summary << "max P_110 = " << best << " at f_d = " << best_f << " GHz\n";
    for (const auto& f : map.failures) summary << "failed cell: " << f << "\n";
  } else {
    BroadbandOptions o;
    o.duration_ns = c.number("spectroscopy.duration_ns");
    o.samples = static_cast<int>(c.integer("spectroscopy.samples"));
    o.workers = workers_of(c);
    const auto points = broadband_spectrum(p, amp, freqs, o);
    Csv csv({"f_d[GHz]", "nu[MHz]", "contrast[1]", "residual_rms[1]", "ok", "message"});
    int failed = 0;
    for (const auto& pt : points) {
      csv.row({n(pt.freq_ghz), n(pt.ok ? pt.nu_mhz : std::nan("")), n(pt.contrast), n(pt.residual_rms),
               pt.ok ? "true" : "false", pt.message});
      failed += pt.ok ? 0 : 1;
    }
    write_text(out, csv.str());
    summary << points.size() << " frequencies, " << failed << " without a resolvable oscillation\n";
  }
  return summary.str();
}

std::string run_calibrate(const Config& c, const std::filesystem::path& out) {
  const DeviceParams p = device_from_config(c);
  const double amp = c.number("pulse.amp_mhz");
  const auto r = calibrate_gate(p, amp, calibration_from_config(c));
  write_text(out, json_text(calibration_json(r, amp)));
  std::ostringstream s;
  s << "f_d = " << format_number(r.f_d_ghz) << " GHz, tau = " << r.duration_ns << " ns, F = " << r.fidelity
    << " (error " << 1.0 - r.fidelity << ")\n";
  return s.str();
}

struct SweepTarget {
  std::string path;
  std::optional<std::size_t> index;
};

std::vector<SweepTarget> sweep_targets(const Config& c) {
  std::vector<SweepTarget> out;
  std::istringstream in(c.text("sweep.parameter"));
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    item = item.substr(b, e - b + 1);
    SweepTarget t;
    const auto br = item.find('[');
    if (br != std::string::npos) {
      if (item.back() != ']') throw ConfigError("sweep.parameter", "malformed index in '" + item + "'");
      try {
        t.index = std::stoul(item.substr(br + 1, item.size() - br - 2));
      } catch (const std::exception&) {
        throw ConfigError("sweep.parameter", "malformed index in '" + item + "'");
      }
      t.path = item.substr(0, br);
    } else {
      t.path = item;
    }
    const KeySpec& spec = key_spec(t.path);
    if (t.index ? spec.kind != KeyKind::NumberList : spec.kind != KeyKind::Number)
      throw ConfigError("sweep.parameter", "'" + item + "' is not a numeric scalar");
    if (t.path.rfind("sweep.", 0) == 0 || t.path.rfind("run.", 0) == 0)
      throw ConfigError("sweep.parameter", "'" + item + "' cannot be swept");
    out.push_back(t);
  }
  if (out.empty()) throw ConfigError("sweep.parameter", "no parameter given");
  return out;
}

struct SweepRow {
  std::vector<std::string> cells;
  bool ok = false;
};

std::string run_sweep(const Config& c, const std::filesystem::path& out, int* failed) {
  const auto targets = sweep_targets(c);
  const auto values = c.numbers("sweep.values");
  if (values.empty()) throw ConfigError("sweep.values", "no values");
  const std::string unit = key_spec(targets.front().path).unit;
  const auto rows = parallel_map<SweepRow>(
      values.size(),
      [&](std::size_t k) {
        Config point = c;
        for (const auto& t : targets) {
          if (t.index) point.set_element(t.path, *t.index, values[k]);
          else point.set(t.path, format_number(values[k]));
        }
        SweepRow row;
        try {
          const DeviceParams p = device_from_config(point);
          const auto r = calibrate_gate(p, point.number("pulse.amp_mhz"), calibration_from_config(point));
          row.cells = {n(values[k]),           n(r.f_s_ghz),         n(r.f_d_ghz), n(r.duration_ns),
                       n(r.transfer),          n(r.fidelity),        n(1.0 - r.fidelity),
                       n(r.correction.phi_drive), "ok"};
          row.ok = true;
        } catch (const std::exception& e) {
          const double nan = std::nan("");
          row.cells = {n(values[k]), n(nan), n(nan), n(nan), n(nan), n(nan), n(nan), n(nan), e.what()};
        }
        return row;
      },
      workers_of(c));
  Csv csv({"value[" + unit + "]", "f_s[GHz]", "f_d[GHz]", "duration[ns]", "transfer[1]", "fidelity[1]", "error[1]",
           "phi_drive[rad]", "status"});
  std::ostringstream summary;
  for (const auto& r : rows) {
    csv.row(r.cells);
    summary << c.text("sweep.parameter") << " = " << r.cells[0] << ": "
            << (r.ok ? "error " + r.cells[6] : r.cells.back()) << "\n";
    if (!r.ok) ++*failed;
  }
  write_text(out, csv.str());
  return summary.str();
}

Json zz_json(const ZZReport& zz, int qubits) {
  Json j;
  for (Pair pair : kAllPairs) {
    if (qubits_of(pair).second >= qubits) continue;
    j[pair_name(pair)] = quantity(zz.at(pair), "MHz");
  }
  return j;
}

std::string run_stark(const Config& c, const std::filesystem::path& out) {
  const DeviceParams p = stark_device(c);
  const CWDriveSpec cw = cw_from_config(c, p.qubits());
  StarkSearchOptions o;
  o.free = c.text("stark.free") == "phase" ? StarkFree::Phase : StarkFree::Amplitude;
  o.amp_lo_mhz = c.number("stark.amp_lo_mhz");
  o.amp_hi_mhz = c.number("stark.amp_hi_mhz");
  o.scan_points = static_cast<int>(c.integer("stark.scan_points"));
  o.relative_objective = c.flag("stark.relative_objective");
  const auto r = stark_cancellation_search(p, cw, o);

  Json j;
  j["qubits"] = p.qubits();
  Json cwj;
  cwj["freq"] = quantity(r.cw.freq_ghz, "GHz");
  cwj["eps"] = {{"unit", "MHz"}, {"values", r.cw.eps_mhz}};
  cwj["phase"] = {{"unit", "rad"}, {"values", r.cw.phase}};
  j["cw"] = cwj;
  j["zz_static"] = zz_json(r.zz_static, p.qubits());
  j["zz_modulated"] = zz_json(r.zz, p.qubits());
  std::ostringstream s;
  if (p.qubits() == 2) {
    const bool amp = o.free == StarkFree::Amplitude;
    j["free"] = amp ? "amplitude" : "phase";
    j["root"] = quantity(r.coordinate, amp ? "MHz" : "rad");
    j["xi_ab_analytic_at_root"] = quantity(modulated_zz_analytic(p, r.cw), "MHz");
    Json scan = Json::array();
    for (const auto& [x, xi] : r.scan) scan.push_back({{"coordinate", x}, {"xi_ab", xi}});
    j["scan"] = {{"units", {{"coordinate", amp ? "MHz" : "rad"}, {"xi_ab", "MHz"}}}, {"points", scan}};
    s << "xi_AB crosses zero at " << (amp ? "eps = " : "phi = ") << r.coordinate << (amp ? " MHz\n" : " rad\n");
  } else {
    double worst = 0.0;
    for (Pair pair : kAllPairs) worst = std::max(worst, std::abs(r.zz.at(pair)) / std::abs(r.zz_static.at(pair)));
    j["phi_ab"] = quantity(std::remainder(r.cw.phase[0] - r.cw.phase[1], kTwoPi), "rad");
    j["phi_bc"] = quantity(std::remainder(r.cw.phase[1] - r.cw.phase[2], kTwoPi), "rad");
    j["worst_suppression_ratio"] = quantity(worst, "1");
    s << "largest |xi~| / |xi0| over pairs = " << worst << "\n";
  }
  write_text(out, json_text(j));
  return s.str();
}

std::string run_qpt(const Config& c, const std::filesystem::path& out) {
  const DeviceParams p = device_from_config(c);
  const double amp = c.number("pulse.amp_mhz");
  const double sigma = c.number("pulse.sigma_ns");
  const auto t1 = c.numbers("qpt.t1_us");
  const auto t2 = c.numbers("qpt.t2star_us");
  if (t1.size() != t2.size() || t1.empty()) throw ConfigError("qpt.t2star_us", "needs as many entries as qpt.t1_us");
  for (std::size_t k = 0; k < t1.size(); ++k) {
    try {
      DecoherenceSpec::uniform(3, t1[k], t2[k]).validate();
    } catch (const ArgumentError& e) {
      throw ConfigError("qpt.t2star_us", e.what());
    }
  }
  const auto cal = calibrate_gate(p, amp, calibration_from_config(c));
  QptOptions o;
  o.integrator = integrator_from_config(c);
  o.refine_phases = c.flag("qpt.refine_phases");
  Json j;
  j["calibration"] = calibration_json(cal, amp);
  Json runs = Json::array();
  std::ostringstream s;
  for (std::size_t k = 0; k < t1.size(); ++k) {
    const auto dec = DecoherenceSpec::uniform(3, t1[k], t2[k]);
    const auto r = qpt_run(p, amp, sigma, cal, dec, o);
    Json run;
    run["t1"] = quantity(t1[k], "us");
    run["t2star"] = quantity(t2[k], "us");
    run["process_fidelity"] = quantity(r.fidelity, "1");
    run["process_fidelity_before_refinement"] = quantity(r.fidelity_initial, "1");
    run["max_leakage"] = quantity(r.max_leakage, "1");
    run["leakage"] = {{"unit", "1"}, {"values", r.leakage}};
    run["correction"] = correction_json(r.correction);
    run["chi"] = matrix_json(r.chi.chi, "1", false);
    runs.push_back(run);
    s << "T1 = " << format_number(t1[k]) << " us, T2* = " << format_number(t2[k]) << " us: F_chi = " << r.fidelity
      << "\n";
  }
  j["runs"] = runs;
  write_text(out, json_text(j));
  return s.str();
}

std::string run_rwa_check(const Config& c, const std::filesystem::path& out) {
  const DeviceParams p = device_from_config(c);
  const double amp = c.number("rwa.amp_mhz");
  const double sigma = c.number("pulse.sigma_ns");
  const auto cal = calibrate_gate(p, amp, calibration_from_config(c));
  FrameComparisonOptions o;
  o.lab_integrator = integrator_from_config(c);
  o.lab_integrator.rtol = std::max(o.lab_integrator.rtol, c.number("rwa.lab_rtol"));
  o.lab_integrator.atol = std::max(o.lab_integrator.atol, 1e-2 * o.lab_integrator.rtol);
  o.drive_phase_half_width = c.number("rwa.drive_phase_half_width_rad");
  const auto cmp = compare_frames(p, amp, cal, sigma, o);
  auto populations = [](const GateMatrix& g) { return GateMatrix(g.cwiseAbs2().cast<Complex>()); };
  Json j;
  j["calibration"] = calibration_json(cal, amp);
  j["lab_f_d"] = quantity(cmp.f_d_lab_ghz, "GHz");
  j["lab_duration"] = quantity(cmp.duration_lab_ns, "ns");
  j["lab_transfer"] = quantity(cmp.transfer_lab, "1");
  j["static_gap_shift"] = quantity(cmp.static_shift_ghz, "GHz");
  j["populations_rotating"] = matrix_json(populations(cal.raw), "1", true);
  j["populations_lab"] = matrix_json(populations(cmp.raw_lab), "1", true);
  j["max_population_difference"] = quantity(cmp.max_population_difference, "1");
  j["fidelity_rotating"] = quantity(cal.fidelity, "1");
  j["fidelity_lab"] = quantity(cmp.lab.fidelity, "1");
  j["fidelity_difference"] = quantity(cmp.fidelity_difference, "1");
  j["lab_correction"] = correction_json(cmp.lab.correction);
  j["lab_rtol"] = quantity(o.lab_integrator.rtol, "1");
  j["lab_simulations"] = cmp.simulations;
  write_text(out, json_text(j));
  std::ostringstream s;
  s << "max |dP| = " << cmp.max_population_difference << ", F_rot = " << cal.fidelity
    << ", F_lab = " << cmp.lab.fidelity << "\n";
  return s.str();
}

std::string run_ifredkin(const Config& c, const std::filesystem::path& out) {
  GateMatrix base = ideal_gate();
  const bool calibrated = c.text("ifredkin.base") == "calibrated";
  Json j;
  if (calibrated) {
    const DeviceParams p = device_from_config(c);
    const double amp = c.number("pulse.amp_mhz");
    const auto cal = calibrate_gate(p, amp, calibration_from_config(c));
    base = cal.gate;
    j["calibration"] = calibration_json(cal, amp);
  }
  j["base"] = calibrated ? "calibrated" : "ideal";
  std::vector<FredkinLayout> layouts;
  {
    std::istringstream in(c.text("ifredkin.layouts"));
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      const auto e = item.find_last_not_of(" \t");
      try {
        layouts.push_back(fredkin_layout_from_string(item.substr(b, e - b + 1)));
      } catch (const ArgumentError& err) {
        throw ConfigError("ifredkin.layouts", err.what());
      }
    }
  }
  Json all = Json::object();
  std::ostringstream s;
  for (auto layout : layouts) {
    const GateMatrix g = compose_ifredkin(base, layout);
    const auto [x, y] = fredkin_exchanged_pair(layout);
    Json table = Json::array();
    int matches = 0;
    for (int k = 0; k < 8; ++k) {
      Eigen::Index best = 0;
      g.col(k).cwiseAbs2().maxCoeff(&best);
      const int expected = k == x ? y : (k == y ? x : k);
      const bool match = best == expected;
      matches += match;
      table.push_back({{"input", label(k)},
                       {"output", label(static_cast<int>(best))},
                       {"probability", std::norm(g(best, k))},
                       {"phase_rad", std::arg(g(best, k))},
                       {"expected_output", label(expected)},
                       {"match", match}});
    }
    Json lj;
    lj["exchanged"] = {label(x), label(y)};
    lj["truth_table"] = {{"units", {{"probability", "1"}, {"phase_rad", "rad"}}}, {"rows", table}};
    lj["matrix"] = matrix_json(g, "1", true);
    all[fredkin_layout_name(layout)] = lj;
    s << "layout " << fredkin_layout_name(layout) << ": " << matches << "/8 rows match the controlled-SWAP oracle\n";
  }
  j["layouts"] = all;
  write_text(out, json_text(j));
  return s.str();
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"zz", "spectroscopy", "calibrate", "sweep",
                                              "stark", "qpt", "rwa-check", "ifredkin"};
  return names;
}

DeviceParams device_from_config(const Config& c) {
  DeviceParams p;
  p.freq_ghz = c.numbers("device.freq_ghz");
  p.anharm_mhz = c.numbers("device.anharm_mhz");
  for (double l : c.numbers("device.levels")) {
    if (l != std::floor(l) || l < 2) throw ConfigError("device.levels", "levels must be integers >= 2");
    p.levels.push_back(static_cast<int>(l));
  }
  const std::size_t q = p.freq_ghz.size();
  if (q < 2 || q > 3) throw ConfigError("device.freq_ghz", "two or three qubits supported");
  if (p.anharm_mhz.size() != q) throw ConfigError("device.anharm_mhz", "needs one entry per qubit");
  if (p.levels.size() != q) throw ConfigError("device.levels", "needs one entry per qubit");
  p.couplings.push_back({0, 1, c.number("device.coupling.g_ab_mhz")});
  if (q == 3) {
    p.couplings.push_back({1, 2, c.number("device.coupling.g_bc_mhz")});
    p.couplings.push_back({0, 2, c.number("device.coupling.g_ac_mhz")});
  }
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError("device", e.what());
  }
  return p;
}

IntegratorOptions integrator_from_config(const Config& c) {
  IntegratorOptions o;
  o.rtol = c.number("integrator.rtol");
  o.atol = c.number("integrator.atol");
  o.lindblad_step_ns = c.number("integrator.lindblad_step_ns");
  o.max_steps = c.integer("integrator.max_steps");
  if (!(o.rtol > 0.0)) throw ConfigError("integrator.rtol", "must be positive");
  if (!(o.atol > 0.0)) throw ConfigError("integrator.atol", "must be positive");
  if (!(o.lindblad_step_ns > 0.0)) throw ConfigError("integrator.lindblad_step_ns", "must be positive");
  if (o.max_steps < 1) throw ConfigError("integrator.max_steps", "must be positive");
  return o;
}

CalibrationOptions calibration_from_config(const Config& c) {
  CalibrationOptions o;
  o.sigma_ns = c.number("pulse.sigma_ns");
  o.drag = c.number("pulse.drag");
  o.refine_drag = c.flag("calibration.refine_drag");
  o.refine_evaluations = static_cast<int>(c.integer("calibration.refine_evaluations"));
  o.integrator = integrator_from_config(c);
  o.transition.workers = workers_of(c);
  o.phase.restarts = static_cast<int>(c.integer("calibration.restarts"));
  o.phase.drive_phase_grid = static_cast<int>(c.integer("calibration.phase_grid"));
  o.phase.seed = static_cast<std::uint64_t>(c.integer("run.seed"));
  if (!(o.sigma_ns > 0.0)) throw ConfigError("pulse.sigma_ns", "must be positive");
  if (o.phase.restarts < 0) throw ConfigError("calibration.restarts", "must be >= 0");
  if (c.number("pulse.amp_mhz") <= 0.0) throw ConfigError("pulse.amp_mhz", "must be positive");
  return o;
}

std::filesystem::path default_output(const std::string& subcommand) {
  const bool csv = subcommand == "zz" || subcommand == "spectroscopy" || subcommand == "sweep";
  return subcommand + (csv ? ".csv" : ".json");
}

std::filesystem::path manifest_path(const std::filesystem::path& result) {
  return result.string() + ".manifest.cfg";
}

RunReport run_experiment(const std::string& subcommand, const Config& config, const std::filesystem::path& out) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.result = out.empty() ? default_output(subcommand) : out;
  report.manifest = manifest_path(report.result);
  if (subcommand == "zz") report.summary = run_zz(config, report.result);
  else if (subcommand == "spectroscopy") report.summary = run_spectroscopy(config, report.result);
  else if (subcommand == "calibrate") report.summary = run_calibrate(config, report.result);
  else if (subcommand == "sweep") report.summary = run_sweep(config, report.result, &report.failed_points);
  else if (subcommand == "stark") report.summary = run_stark(config, report.result);
  else if (subcommand == "qpt") report.summary = run_qpt(config, report.result);
  else if (subcommand == "rwa-check") report.summary = run_rwa_check(config, report.result);
  else if (subcommand == "ifredkin") report.summary = run_ifredkin(config, report.result);
  else throw ConfigError("", "unknown subcommand '" + subcommand + "'");

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Config manifest = config;
  manifest.set("run.subcommand", subcommand);
  std::ostringstream m;
  m << "# transim run manifest; re-run with: transim " << subcommand << " --config " << report.manifest.filename().string()
    << "\n# result: " << report.result.filename().string() << "\n# wall_time: " << format_number(wall) << " s\n\n"
    << manifest.serialize();
  write_text(report.manifest, m.str());
  return report;
}

}  // namespace transim
