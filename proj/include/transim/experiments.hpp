#pragma once

// Subcommand runners behind the CLI. Each reads a resolved Config, writes one
// result file (CSV for scans, JSON for matrices and records) and a manifest that
// is itself a valid config for re-running.

#include <filesystem>
#include <string>
#include <vector>

#include "transim/config.hpp"
#include "transim/gates.hpp"
#include "transim/model.hpp"
#include "transim/tomography.hpp"

namespace transim {

const std::vector<std::string>& subcommands();

DeviceParams device_from_config(const Config& config);
IntegratorOptions integrator_from_config(const Config& config);
CalibrationOptions calibration_from_config(const Config& config);

struct RunReport {
  std::filesystem::path result;
  std::filesystem::path manifest;
  std::string summary;       // one human line per key output
  int failed_points = 0;     // sweeps record failures and continue
};

/// Default result path for a subcommand ("zz.csv", "calibrate.json", ...).
std::filesystem::path default_output(const std::string& subcommand);

/// Manifest path written next to a result file.
std::filesystem::path manifest_path(const std::filesystem::path& result);

RunReport run_experiment(const std::string& subcommand, const Config& config, const std::filesystem::path& out);

}  // namespace transim
