#include "segforge/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "segforge/error.hpp"
#include "segforge/text.hpp"

#ifndef SEGFORGE_DATA_DIR
#define SEGFORGE_DATA_DIR "data"
#endif

namespace segforge {

namespace {

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view text) {
  std::vector<double> out;
  for (const auto& f : split_fields(text, ',')) out.push_back(parse_double(f));
  return out;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw MalformedRecord("expected a boolean, got '" + std::string(text) + "'");
}

std::size_t parse_count(std::string_view text) {
  const long long v = parse_int64(text);
  if (v < 0) throw MalformedRecord("expected a non-negative count");
  return static_cast<std::size_t>(v);
}

std::uint64_t parse_seed(std::string_view text) {
  return std::stoull(std::string(trim_view(text)));
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.base_dir = SEGFORGE_DATA_DIR;
  return c;
}

void PipelineConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim_view(raw);
  try {
    if (key == "paths.compounds") compounds_path = std::string(value);
    else if (key == "paths.periodic_table") periodic_table_path = std::string(value);
    else if (key == "paths.survey") survey_path = std::string(value);
    else if (key == "maze.count") maze_count = parse_count(value);
    else if (key == "maze.width") maze_width = parse_int(value);
    else if (key == "maze.height") maze_height = parse_int(value);
    else if (key == "space.seed") space_seed = parse_seed(value);
    else if (key == "birch.branching_factor") birch.branching_factor = parse_count(value);
    else if (key == "birch.k_target") birch.k_target = parse_count(value);
    else if (key == "birch.threshold_grid") birch.threshold_grid = parse_doubles(value);
    else if (key == "birch.silhouette_sample") birch.silhouette_sample = parse_count(value);
    else if (key == "birch.seed") birch.seed = parse_seed(value);
    else if (key == "birch.s_on_raw") s_on_raw = parse_bool(value);
    else if (key == "engine.alpha") scoring.alpha = parse_doubles(value);
    else if (key == "engine.beta") scoring.beta = parse_doubles(value);
    else if (key == "engine.t_easy_medium") scoring.thresholds.easy_medium = parse_double(value);
    else if (key == "engine.t_medium_hard") scoring.thresholds.medium_hard = parse_double(value);
    else if (key == "engine.recycle") recycle = parse_bool(value);
    else if (key == "simulate.players") sim_players = parse_count(value);
    else if (key == "simulate.sessions") sim_sessions = parse_count(value);
    else if (key == "simulate.policy") sim_policy = parse_policy(value);
    else if (key == "simulate.seed") sim_seed = parse_seed(value);
    else if (key == "stats.min_trials") ztest.min_trials = parse_int64(value);
    else if (key == "stats.ci_level") ztest.ci_level = parse_double(value);
    else if (key == "stats.significance") ztest.significance = parse_double(value);
    else throw ConfigInvalid("unknown config key '" + std::string(key) + "'");
  } catch (const MalformedRecord& e) {
    throw ConfigInvalid("config key '" + std::string(key) + "': " + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigInvalid("config key '" + std::string(key) + "': bad value '" +
                        std::string(value) + "'");
  }
}

void PipelineConfig::validate() const {
  const auto fail = [](const std::string& why) { throw ConfigInvalid(why); };
  if (maze_count < 1) fail("maze.count must be >= 1");
  if (maze_width < 5 || maze_height < 5 || maze_width % 2 == 0 || maze_height % 2 == 0) {
    fail("maze.width and maze.height must be odd and >= 5");
  }
  if (birch.branching_factor < 2) fail("birch.branching_factor must be >= 2");
  if (birch.k_target < 2) fail("birch.k_target must be >= 2");
  if (birch.threshold_grid.empty()) fail("birch.threshold_grid must not be empty");
  for (std::size_t i = 0; i < birch.threshold_grid.size(); ++i) {
    if (!(birch.threshold_grid[i] > 0.0)) fail("birch.threshold_grid values must be > 0");
    if (i > 0 && !(birch.threshold_grid[i - 1] < birch.threshold_grid[i])) {
      fail("birch.threshold_grid must be strictly ascending");
    }
  }
  if (scoring.alpha.size() != 3 || scoring.beta.size() != 3) {
    fail("engine.alpha and engine.beta need three weights each");
  }
  if (!(scoring.thresholds.easy_medium < scoring.thresholds.medium_hard)) {
    fail("engine.t_easy_medium must be below engine.t_medium_hard");
  }
  if (!(ztest.ci_level > 0.0 && ztest.ci_level < 1.0)) fail("stats.ci_level must lie in (0, 1)");
  if (!(ztest.significance > 0.0 && ztest.significance < 1.0)) {
    fail("stats.significance must lie in (0, 1)");
  }
}

PipelineConfig PipelineConfig::parse(std::istream& in, const std::filesystem::path& base_dir) {
  PipelineConfig c = defaults();
  c.base_dir = base_dir;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto text = trim_view(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigInvalid("config line " + std::to_string(lineno) + " is not key = value");
    }
    c.set(trim_view(text.substr(0, eq)), text.substr(eq + 1));
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config " + path.string());
  return parse(in, std::filesystem::absolute(path).parent_path());
}

std::string PipelineConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["paths.compounds"] = compounds_path;
  kv["paths.periodic_table"] = periodic_table_path;
  kv["paths.survey"] = survey_path;
  kv["maze.count"] = std::to_string(maze_count);
  kv["maze.width"] = std::to_string(maze_width);
  kv["maze.height"] = std::to_string(maze_height);
  kv["space.seed"] = std::to_string(space_seed);
  kv["birch.branching_factor"] = std::to_string(birch.branching_factor);
  kv["birch.k_target"] = std::to_string(birch.k_target);
  kv["birch.threshold_grid"] = join_doubles(birch.threshold_grid);
  kv["birch.silhouette_sample"] = std::to_string(birch.silhouette_sample);
  kv["birch.seed"] = std::to_string(birch.seed);
  kv["birch.s_on_raw"] = s_on_raw ? "true" : "false";
  kv["engine.alpha"] = join_doubles(scoring.alpha);
  kv["engine.beta"] = join_doubles(scoring.beta);
  kv["engine.t_easy_medium"] = format_double(scoring.thresholds.easy_medium);
  kv["engine.t_medium_hard"] = format_double(scoring.thresholds.medium_hard);
  kv["engine.recycle"] = recycle ? "true" : "false";
  kv["simulate.players"] = std::to_string(sim_players);
  kv["simulate.sessions"] = std::to_string(sim_sessions);
  kv["simulate.policy"] = std::string(to_string(sim_policy));
  kv["simulate.seed"] = std::to_string(sim_seed);
  kv["stats.min_trials"] = std::to_string(ztest.min_trials);
  kv["stats.ci_level"] = format_double(ztest.ci_level);
  kv["stats.significance"] = format_double(ztest.significance);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical()); }

std::filesystem::path PipelineConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

}  // namespace segforge
