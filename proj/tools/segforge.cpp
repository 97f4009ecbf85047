// segforge: command-line front end for the content-generation pipeline.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "segforge/config.hpp"
#include "segforge/error.hpp"
#include "segforge/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool recycle = false;
  bool export_plots = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Pipeline config file (key = value)");
  cmd->add_option("--out", args.out, "Working directory (default: $SEGFORGE_DIR or .)");
  cmd->add_option("--seed", args.seed, "Override every seed in the config");
  cmd->add_flag("--recycle", args.recycle, "Clear a cluster's played set when its pool runs dry");
  cmd->add_flag("--export-plots", args.export_plots, "Also write mapping_N.csv and mapping_S.csv");
}

void print(const segforge::StageReport& r) {
  std::cout << segforge::to_string(r.stage) << ":";
  for (const auto& a : r.artifacts) std::cout << ' ' << a;
  std::cout << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segforge - serious-game content pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::optional<std::size_t> players, sessions;
  std::optional<std::string> policy, library, survey;

  const auto describe = [](segforge::Stage stage) -> std::string {
    switch (stage) {
      case segforge::Stage::Annotate: return "Annotate and order the compound list";
      case segforge::Stage::GenSpace: return "Generate mazes and enumerate game configurations";
      case segforge::Stage::Categorize: return "Assign a difficulty level to every configuration";
      case segforge::Stage::Cluster: return "Cluster each difficulty level with BIRCH";
      case segforge::Stage::Map: return "Pair compounds with clusters and write the library";
      case segforge::Stage::Simulate: return "Play bot sessions against the library";
      case segforge::Stage::Analyze: return "Run the survey z-tests and crosstab";
    }
    return {};
  };

  std::vector<std::pair<CLI::App*, std::optional<segforge::Stage>>> commands;
  for (auto stage : segforge::kAllStages) {
    auto* cmd = app.add_subcommand(std::string(segforge::to_string(stage)), describe(stage));
    add_common(cmd, args);
    if (stage == segforge::Stage::Simulate) {
      cmd->add_option("--players", players, "Number of simulated players");
      cmd->add_option("--sessions", sessions, "Sessions per player");
      cmd->add_option("--policy", policy, "Bot policy: random or greedy");
      cmd->add_option("--library", library, "Library file (default: <out>/library.sqlite)");
    }
    if (stage == segforge::Stage::Analyze) {
      cmd->add_option("--sessions", survey, "Survey report JSON lines");
    }
    commands.emplace_back(cmd, stage);
  }
  auto* all = app.add_subcommand("pipeline", "Run every stage in order");
  add_common(all, args);
  commands.emplace_back(all, std::nullopt);

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = args.config.empty() ? segforge::PipelineConfig::defaults()
                                      : segforge::PipelineConfig::load(args.config);
    if (args.seed) {
      config.space_seed = *args.seed;
      config.birch.seed = *args.seed;
      config.sim_seed = *args.seed;
    }
    if (args.recycle) config.recycle = true;
    if (players) config.sim_players = *players;
    if (sessions) config.sim_sessions = *sessions;
    if (policy) config.sim_policy = segforge::parse_policy(*policy);
    config.validate();

    segforge::StageOptions options;
    if (!args.out.empty()) {
      options.work_dir = args.out;
    } else if (const char* dir = std::getenv("SEGFORGE_DIR"); dir && *dir) {
      options.work_dir = dir;
    }
    options.export_plots = args.export_plots;
    if (library) options.library = *library;
    if (survey) options.sessions = *survey;

    for (const auto& [cmd, stage] : commands) {
      if (!cmd->parsed()) continue;
      if (stage) {
        print(segforge::run_stage(*stage, config, options));
      } else {
        for (const auto& r : segforge::run_pipeline(config, options)) print(r);
      }
    }
  } catch (const segforge::Error& e) {
    std::cerr << "segforge: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "segforge: unexpected error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
