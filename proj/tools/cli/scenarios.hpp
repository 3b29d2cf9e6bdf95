#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "kgstab/evolution.hpp"

namespace kgstab::cli {

const std::vector<std::string>& scenario_names();

struct ScenarioResult {
  int exit_code = 0;
  std::string summary_json;  // full summary, including the resolved config
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

// Runs one scenario. With write_artifacts = false nothing touches the disk
// (used by sweep workers).
ScenarioResult run_scenario(const std::string& name, const Config& cfg, std::ostream& log,
                            bool write_artifacts = true);

// 17 significant digits.
std::string fmt17(double x);

void write_history_csv(const std::string& path, const std::vector<timedomain::HistoryRecord>& h);

// Gnuplot scripts for log h1_norm vs t and b vs t, read from the history CSV.
// Optional period start times are drawn as vertical markers.
std::vector<std::string> emit_plots(const std::string& history_csv,
                                    const std::vector<double>& period_starts,
                                    std::vector<std::string>* warnings = nullptr);

// Worker count for sweep: KGSTAB_THREADS if set, else hardware concurrency,
// capped by the job count.
int sweep_threads(int jobs);

}  // namespace kgstab::cli
