#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

#include "segforge/clustering.hpp"
#include "segforge/engine.hpp"
#include "segforge/stats.hpp"

namespace segforge {

// Every tunable of the pipeline. The on-disk form is `key = value` lines
// (`#` starts a comment); unknown keys are rejected.
struct PipelineConfig {
  std::string compounds_path = "compounds.txt";
  std::string periodic_table_path = "periodic_table.txt";
  std::string survey_path = "survey_reports.jsonl";
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::size_t maze_count = 972;
  int maze_width = 21;
  int maze_height = 21;
  std::uint64_t space_seed = 2016;

  BirchConfig birch;
  bool s_on_raw = true;

  ScoringConfig scoring;
  bool recycle = false;

  std::size_t sim_players = 10;
  std::size_t sim_sessions = 100;
  BotPolicy sim_policy = BotPolicy::Greedy;
  std::uint64_t sim_seed = 1;

  ZTestOptions ztest;

  static PipelineConfig defaults();
  static PipelineConfig parse(std::istream& in, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);

  // Throws ConfigInvalid for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  // Throws ConfigInvalid.
  void validate() const;

  // Sorted `key = value` lines for every key; the hash is its SHA-256.
  std::string canonical() const;
  std::string hash() const;

  std::filesystem::path resolve(const std::string& path) const;
};

}  // namespace segforge
