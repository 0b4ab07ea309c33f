// transim <subcommand> --config <path> [--set key=value ...] [--out <path>] [--workers N] [--seed N]

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "transim/experiments.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Invocation {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<long> workers;
  std::optional<long> seed;
  std::string mode;  // spectroscopy only
};

int run(const std::string& sub, const Invocation& inv) {
  using namespace transim;
  try {
    Config cfg = inv.config.empty() ? Config::defaults() : Config::load(inv.config);
    for (const auto& s : inv.sets) cfg.apply_override(s);
    if (inv.workers) cfg.set("run.workers", std::to_string(*inv.workers));
    if (inv.seed) cfg.set("run.seed", std::to_string(*inv.seed));
    if (!inv.mode.empty()) cfg.set("spectroscopy.mode", inv.mode);
    const std::string& recorded = cfg.text("run.subcommand");
    if (!recorded.empty() && recorded != sub)
      std::cerr << "note: manifest was written by '" << recorded << "', running '" << sub << "'\n";
    const RunReport r = run_experiment(sub, cfg, inv.out);
    std::cout << r.summary << "result: " << r.result.string() << "\nmanifest: " << r.manifest.string() << "\n";
    if (r.failed_points > 0) {
      std::cerr << r.failed_points << " sweep point(s) failed; see the status column\n";
      return kNumericalError;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-level simulator for three coupled transmons and the 001<->110 gate"};
  app.require_subcommand(1);
  Invocation inv;
  std::string chosen;
  for (const auto& name : transim::subcommands()) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", inv.config, "configuration file");
    s->add_option("--set", inv.sets, "override, key=value (repeatable)")->take_all();
    s->add_option("--out", inv.out, "result file");
    s->add_option("--workers", inv.workers, "worker threads (0 = all cores)");
    s->add_option("--seed", inv.seed, "optimizer seed");
    if (name == "spectroscopy")
      s->add_option("mode", inv.mode, "rabi-2d | broadband")->check(CLI::IsMember({"rabi-2d", "broadband"}));
    s->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  return run(chosen, inv);
}
