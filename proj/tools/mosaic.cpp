// Command-line front end: `verify` runs the full pipeline and writes result
// artifacts, `oracle` evaluates the exact concrete failure probability from
// one state, `export-model` dumps the abstraction in explicit .tra/.lab form.
// Exit codes: 0 success, 1 configuration or input error, 2 state-cap abort.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mosaic/mosaic.hpp"

namespace {

std::vector<double> parse_state(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const std::string tok =
        csv.substr(start, comma == std::string::npos ? comma : comma - start);
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      mosaic::fail(mosaic::errc::parse_error, "cli", "bad state component '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int run_verify(const std::string& config_path, const std::vector<std::string>& overrides) {
  const mosaic::RunConfig cfg = mosaic::load_run_config(config_path, overrides);
  std::filesystem::create_directories(cfg.output_dir);
  const mosaic::RunOutcome outcome = mosaic::run_verification(cfg);

  const std::string base = cfg.output_dir + "/";
  mosaic::export_regions_csv(outcome.results, base + "regions.csv");
  mosaic::export_regions_json(outcome.results, base + "regions.json");
  if (cfg.env.state_dim() == 2)
    mosaic::export_heatmap_svg(outcome.results, base + "heatmap.svg");
  mosaic::write_report(outcome.report, base + "report.txt");

  double worst = 0.0;
  double safe_volume = 0.0, total_volume = 0.0;
  for (const mosaic::RegionResult& r : outcome.results) {
    worst = std::max(worst, r.upper_bound);
    total_volume += r.box.volume();
    if (r.verdict == mosaic::RegionVerdict::safe) safe_volume += r.box.volume();
  }
  std::printf("regions: %zu\n", outcome.results.size());
  std::printf("states: %zu\n", outcome.report.states);
  std::printf("worst_upper_bound: %.17g\n", worst);
  std::printf("safe_volume_fraction: %.17g\n",
              total_volume > 0.0 ? safe_volume / total_volume : 0.0);
  std::printf("outputs: %sregions.csv %sregions.json%s %sreport.txt\n", base.c_str(),
              base.c_str(), cfg.env.state_dim() == 2 ? (" " + base + "heatmap.svg").c_str() : "",
              base.c_str());
  return 0;
}

int run_oracle(const std::string& config_path, const std::vector<std::string>& overrides,
               const std::string& state_csv, int k) {
  const mosaic::RunConfig cfg = mosaic::load_run_config(config_path, overrides);
  const std::vector<double> s0 = parse_state(state_csv);
  const double p = mosaic::concrete_reach(cfg.net, cfg.env, cfg.fault, s0, k);
  std::printf("%.17g\n", p);
  return 0;
}

int run_export(const std::string& config_path, const std::vector<std::string>& overrides,
               const std::string& out_path) {
  const mosaic::RunConfig cfg = mosaic::load_run_config(config_path, overrides);
  const std::vector<mosaic::Box> cells =
      cfg.grid_widths.empty() ? std::vector<mosaic::Box>{cfg.env.init_region()}
                              : mosaic::initial_grid(cfg.env, cfg.grid_widths);
  mosaic::ActionRegionCache cache(cfg.env.state_dim(), cfg.env.action_count());
  const mosaic::AbstractMdp mdp =
      mosaic::build_mdp(cfg.net, cfg.env, cfg.fault, cells, cfg.build, &cache);
  std::string lab_path = out_path;
  const auto dot = lab_path.find_last_of('.');
  if (dot != std::string::npos && lab_path.find('/', dot) == std::string::npos)
    lab_path.resize(dot);
  lab_path += ".lab";
  mosaic::export_model(mdp, out_path, lab_path);
  std::printf("states: %zu\nchoices: %zu\ntransitions: %zu\nwrote: %s %s\n",
              mdp.state_count(), mdp.choice_count(), mdp.transition_count(), out_path.c_str(),
              lab_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sound failure-probability bounds for neural-network control policies"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string state_csv;
  std::string out_path = "model.tra";
  int k = 1;

  CLI::App* verify = app.add_subcommand("verify", "run the verification pipeline");
  verify->add_option("config", config_path, "configuration JSON")->required();
  verify->add_option("--set", overrides, "override a config key, e.g. --set horizon=3");

  CLI::App* oracle =
      app.add_subcommand("oracle", "exact concrete failure probability from one state");
  oracle->add_option("config", config_path, "configuration JSON")->required();
  oracle->add_option("--state", state_csv, "comma-separated start state")->required();
  oracle->add_option("--k", k, "horizon")->required();
  oracle->add_option("--set", overrides, "override a config key");

  CLI::App* exp = app.add_subcommand("export-model", "write the abstraction as .tra/.lab");
  exp->add_option("config", config_path, "configuration JSON")->required();
  exp->add_option("--out", out_path, "output .tra path");
  exp->add_option("--set", overrides, "override a config key");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return run_verify(config_path, overrides);
    if (oracle->parsed()) return run_oracle(config_path, overrides, state_csv, k);
    if (exp->parsed()) return run_export(config_path, overrides, out_path);
  } catch (const mosaic::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == mosaic::errc::memory_guard ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
