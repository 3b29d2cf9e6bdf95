#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/scenarios.hpp"
#include "kgstab/error.hpp"

using kgstab::cli::Config;

namespace {

std::string dashed(std::string key) {
  for (auto& ch : key) {
    if (ch == '_') ch = '-';
  }
  return key;
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> flags;
};

void add_keys(Subcommand& sc) {
  sc.app->add_option("-c,--config", sc.config_path, "key = value file or a summary JSON");
  for (const auto& o : kgstab::cli::option_schema()) {
    std::string names = "--" + o.key;
    if (dashed(o.key) != o.key) names += ",--" + dashed(o.key);
    sc.app->add_option(names, sc.flags[o.key], o.help + " (default " +
                                                   (o.default_value.empty() ? "\"\"" : o.default_value) + ")");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial Klein-Gordon boundary stabilization runner"};
  app.require_subcommand(1);

  std::map<std::string, Subcommand> subs;
  const std::map<std::string, std::string> about = {
      {"poles", "resonances in the strip Im omega < beta_max, |Re omega| < alpha_max"},
      {"instability", "uncontrolled linearized run on the unstable mode"},
      {"open-loop", "moment-synthesized control with Picard iteration"},
      {"closed-loop", "periodic feedback built from the state at each period start"},
      {"verify", "kernel and expansion checks"},
      {"sweep", "run sweep_scenario over sweep_values of sweep_key"}};
  for (const auto& name : kgstab::cli::scenario_names()) {
    Subcommand sc;
    sc.app = app.add_subcommand(name, about.at(name));
    subs[name] = sc;
    add_keys(subs[name]);
  }
  std::string plot_csv;
  auto* plot = app.add_subcommand("plot", "gnuplot scripts for an existing history CSV");
  plot->add_option("history", plot_csv, "history CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (plot->parsed()) {
      std::vector<std::string> warnings;
      for (const auto& f : kgstab::cli::emit_plots(plot_csv, {}, &warnings)) std::cout << "wrote " << f << "\n";
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }
    for (auto& [name, sc] : subs) {
      if (!sc.app->parsed()) continue;
      Config cfg = Config::defaults();
      if (!sc.config_path.empty()) cfg.merge(Config::load_file(sc.config_path));
      for (const auto& [key, value] : sc.flags) {
        if (sc.app->count("--" + key) > 0) cfg.set(key, value);
      }
      const auto res = kgstab::cli::run_scenario(name, cfg, std::cout);
      for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
      return res.exit_code;
    }
  } catch (const kgstab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == kgstab::ErrorKind::config ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
