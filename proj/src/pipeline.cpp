#include "segforge/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "segforge/engine.hpp"
#include "segforge/error.hpp"
#include "segforge/knowledge.hpp"
#include "segforge/library_store.hpp"
#include "segforge/mapping.hpp"
#include "segforge/rng.hpp"
#include "segforge/stats.hpp"
#include "segforge/text.hpp"

namespace segforge {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Annotate: return "annotate";
    case Stage::GenSpace: return "gen-space";
    case Stage::Categorize: return "categorize";
    case Stage::Cluster: return "cluster";
    case Stage::Map: return "map";
    case Stage::Simulate: return "simulate";
    case Stage::Analyze: return "analyze";
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  for (auto s : kAllStages) {
    if (to_string(s) == text) return s;
  }
  throw ConfigInvalid("unknown stage '" + std::string(text) + "'");
}

WorkDirLock::WorkDirLock(const fs::path& work_dir) : path_(work_dir / artifact::kLock) {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw ConfigInvalid("working directory " + work_dir.string() +
                          " is locked by another pipeline (" + path_.string() + ")");
    }
    throw ConfigInvalid("cannot create lock " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkDirLock::~WorkDirLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::map<std::string, ManifestEntry> read_manifest(const fs::path& work_dir) {
  std::map<std::string, ManifestEntry> out;
  const auto path = work_dir / artifact::kManifest;
  if (!fs::exists(path)) return out;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    for (const auto& [name, e] : j.at("artifacts").items()) {
      out[name] = ManifestEntry{e.at("stage").get<std::string>(),
                                e.at("config_hash").get<std::string>(),
                                e.at("sha256").get<std::string>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord("corrupt manifest " + path.string() + ": " + e.what());
  }
  return out;
}

namespace {

class StageRun {
 public:
  StageRun(Stage stage, const PipelineConfig& config, const StageOptions& options)
      : config_(config), options_(options), hash_(config.hash()) {
    report_.stage = stage;
    manifest_ = read_manifest(options.work_dir);
  }

  fs::path path(const char* name) const { return options_.work_dir / name; }

  // Input inside the working directory, produced by an earlier stage.
  fs::path require(const char* name, Stage producer) {
    const auto p = path(name);
    if (!fs::exists(p)) {
      throw MissingPrerequisite(std::string(to_string(report_.stage)) + " needs " + name +
                                "; run '" + std::string(to_string(producer)) + "' first");
    }
    const auto it = manifest_.find(name);
    if (it != manifest_.end() && it->second.config_hash != hash_) {
      warn(std::string(name) + " was produced under config " + it->second.config_hash.substr(0, 12) +
           ", current config is " + hash_.substr(0, 12));
    }
    return p;
  }

  // Input outside the pipeline (dataset or user-supplied file).
  static fs::path require_external(const fs::path& p, std::string_view what) {
    if (!fs::exists(p)) {
      throw MissingPrerequisite(std::string(what) + " not found: " + p.string());
    }
    return p;
  }

  void write(const char* name, std::string_view contents) {
    write_file_atomic(path(name), contents);
    record(name);
  }

  // For files written by someone else (the library store).
  void record(const char* name) {
    manifest_[name] = ManifestEntry{std::string(to_string(report_.stage)), hash_,
                                    sha256_hex(read_file(path(name)))};
    report_.artifacts.emplace_back(name);
  }

  void warn(std::string message) { report_.warnings.push_back(std::move(message)); }

  StageReport finish() {
    ojson j;
    j["config_hash"] = hash_;
    ojson arts = ojson::object();
    for (const auto& [name, e] : manifest_) {
      arts[name] = {{"stage", e.stage}, {"config_hash", e.config_hash}, {"sha256", e.sha256}};
    }
    j["artifacts"] = std::move(arts);
    write_file_atomic(path(artifact::kManifest), j.dump(2) + "\n");
    return std::move(report_);
  }

  const PipelineConfig& config() const { return config_; }
  const StageOptions& options() const { return options_; }
  const std::string& hash() const { return hash_; }

 private:
  const PipelineConfig& config_;
  const StageOptions& options_;
  std::string hash_;
  StageReport report_;
  std::map<std::string, ManifestEntry> manifest_;
};

std::string join_doubles(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::vector<MazeRecord> read_maze_records(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::vector<MazeRecord> out;
  for (const auto& m : read_maze_store(in)) out.push_back(summarize_maze(m));
  return out;
}

std::vector<SpaceRow> read_space(const fs::path& p) {
  std::istringstream in(read_file(p));
  auto rows = read_space_csv(in);
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.game.game_id < b.game.game_id; });
  return rows;
}

FeatureVector raw_vector(const SpaceRow& row) {
  MazeRecord m;
  m.maze_id = row.game.maze_id;
  m.features = row.features;
  return vectorize(row.game, m);
}

void stage_annotate(StageRun& run) {
  const auto& cfg = run.config();
  const auto table_path =
      StageRun::require_external(cfg.resolve(cfg.periodic_table_path), "periodic table");
  const auto data_path = StageRun::require_external(cfg.resolve(cfg.compounds_path), "compound dataset");
  const auto table = PeriodicTable::load(table_path.string());
  std::vector<CompoundAnnotation> annotations;
  for (const auto& spec : load_compounds(data_path.string(), table)) {
    annotations.push_back(annotate(spec, table));
  }
  std::string out;
  for (const auto& a : order_compounds(std::move(annotations))) out += annotation_to_json(a) + "\n";
  run.write(artifact::kCompounds, out);
}

void stage_gen_space(StageRun& run) {
  const auto& cfg = run.config();
  const auto mazes = generate_mazes(cfg.maze_count, cfg.maze_width, cfg.maze_height, cfg.space_seed);
  std::ostringstream out;
  write_maze_store(out, mazes);
  run.write(artifact::kMazes, out.str());
}

void stage_categorize(StageRun& run) {
  const auto mazes = read_maze_records(run.require(artifact::kMazes, Stage::GenSpace));
  std::map<std::string, const MazeRecord*> by_id;
  for (const auto& m : mazes) by_id[m.maze_id] = &m;

  std::vector<SpaceRow> rows;
  std::map<DifficultyLevel, std::size_t> counts;
  for (auto& g : enumerate_space(mazes)) {
    const auto level = classify_difficulty(g);
    ++counts[level];
    const auto& features = by_id.at(g.maze_id)->features;
    rows.push_back(SpaceRow{std::move(g), level, features});
  }
  std::ostringstream space;
  write_space_csv(space, rows);
  run.write(artifact::kSpace, space.str());

  std::string tally = "difficulty,count\n";
  for (auto level : kDifficultyLevels) {
    tally += std::string(to_string(level)) + "," + std::to_string(counts[level]) + "\n";
  }
  tally += "Total," + std::to_string(rows.size()) + "\n";
  run.write(artifact::kDifficultyCounts, tally);
}

struct LevelClustering {
  DifficultyLevel level = DifficultyLevel::Easy;
  ThresholdSearchResult search;
  std::vector<ClusterSummary> summaries;
};

LevelClustering cluster_level(DifficultyLevel level, const std::vector<const SpaceRow*>& rows,
                              const MinMaxScaler& scaler, const PipelineConfig& cfg) {
  PointSet normalized(kFeatureDim);
  PointSet raw(kFeatureDim);
  std::vector<std::string> ids;
  for (const auto* r : rows) {
    const auto v = raw_vector(*r);
    const auto n = scaler.transform(v);
    raw.push_back(v);
    normalized.push_back(n);
    ids.push_back(r->game.game_id);
  }

  LevelClustering out;
  out.level = level;
  out.search = search_threshold(normalized, cfg.birch);

  // Global ids: level blocks of k, ordered within a level by first member.
  auto clusters = out.search.clusters;
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
  const auto base = static_cast<std::int64_t>(static_cast<int>(level) * cfg.birch.k_target);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    clusters[i].id = base + static_cast<std::int64_t>(i) + 1;
    out.summaries.push_back(
        summarize_cluster(clusters[i], level, ids, cfg.s_on_raw ? raw : normalized));
  }
  return out;
}

void stage_cluster(StageRun& run) {
  const auto& cfg = run.config();
  const auto rows = read_space(run.require(artifact::kSpace, Stage::Categorize));
  if (rows.size() < 2) throw InsufficientData("content space has fewer than two games");

  std::vector<FeatureVector> all;
  all.reserve(rows.size());
  for (const auto& r : rows) all.push_back(raw_vector(r));
  const auto scaler = MinMaxScaler::fit(all);

  std::map<DifficultyLevel, std::vector<const SpaceRow*>> by_level;
  for (const auto& r : rows) by_level[r.difficulty].push_back(&r);

  std::vector<std::future<LevelClustering>> jobs;
  for (auto level : kDifficultyLevels) {
    jobs.push_back(std::async(std::launch::async, cluster_level, level,
                              std::cref(by_level[level]), std::cref(scaler), std::cref(cfg)));
  }
  std::vector<LevelClustering> results;
  for (auto& j : jobs) results.push_back(j.get());

  std::vector<ClusterSummary> all_clusters;
  std::ostringstream log;
  write_threshold_log_header(log);
  ojson meta;
  meta["scaler"] = {{"min", scaler.mins()}, {"max", scaler.maxs()}};
  ojson levels = ojson::object();
  for (const auto& r : results) {
    all_clusters.insert(all_clusters.end(), r.summaries.begin(), r.summaries.end());
    write_threshold_log(log, r.level, r.search.log);
    levels[std::string(to_string(r.level))] = {{"games", by_level[r.level].size()},
                                               {"threshold", r.search.threshold},
                                               {"silhouette", r.search.score},
                                               {"clusters", r.summaries.size()}};
  }
  meta["levels"] = std::move(levels);

  std::ostringstream clusters_csv;
  std::ostringstream membership_csv;
  write_clusters_csv(clusters_csv, all_clusters);
  write_membership_csv(membership_csv, all_clusters);
  run.write(artifact::kClusters, clusters_csv.str());
  run.write(artifact::kMembership, membership_csv.str());
  run.write(artifact::kThresholdSearch, log.str());
  run.write(artifact::kClusterMeta, meta.dump(2) + "\n");
}

void stage_map(StageRun& run) {
  const auto compounds_path = run.require(artifact::kCompounds, Stage::Annotate);
  const auto mazes_path = run.require(artifact::kMazes, Stage::GenSpace);
  const auto space_path = run.require(artifact::kSpace, Stage::Categorize);
  const auto clusters_path = run.require(artifact::kClusters, Stage::Cluster);
  const auto membership_path = run.require(artifact::kMembership, Stage::Cluster);
  const auto meta_path = run.require(artifact::kClusterMeta, Stage::Cluster);

  ContentLibrary lib;
  {
    std::istringstream in(read_file(compounds_path));
    std::string line;
    while (std::getline(in, line)) {
      if (!trim_view(line).empty()) lib.compounds.push_back(annotation_from_json(line));
    }
  }
  lib.mazes = read_maze_records(mazes_path);
  for (const auto& r : read_space(space_path)) lib.games.push_back(GameRecord{r.game, r.difficulty});

  std::vector<ClusterSummary> summaries;
  {
    std::istringstream c(read_file(clusters_path));
    std::istringstream m(read_file(membership_path));
    summaries = read_cluster_csvs(c, m);
  }
  std::map<DifficultyLevel, std::vector<ClusterSummary>> by_level;
  for (const auto& s : summaries) {
    by_level[s.difficulty].push_back(s);
    lib.clusters.push_back(ClusterRecord{s.cluster_id, s.difficulty, s.n_games, s.s_sum, s.centroid});
    for (const auto& g : s.member_game_ids) lib.membership.push_back(MembershipRow{s.cluster_id, g});
  }
  for (auto level : kDifficultyLevels) by_level[level];
  lib.mapping = deploy(lib.compounds, by_level);

  ojson meta;
  try {
    meta = ojson::parse(read_file(meta_path));
    lib.metadata[kMetaScalerMin] = join_doubles(meta.at("scaler").at("min").get<std::vector<double>>());
    lib.metadata[kMetaScalerMax] = join_doubles(meta.at("scaler").at("max").get<std::vector<double>>());
    for (const auto& [level, info] : meta.at("levels").items()) {
      lib.metadata["threshold." + level] = format_double(info.at("threshold").get<double>());
      lib.metadata["silhouette." + level] = format_double(info.at("silhouette").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord("corrupt " + meta_path.string() + ": " + e.what());
  }
  lib.metadata[kMetaConfigHash] = run.hash();
  lib.metadata["k_target"] = std::to_string(run.config().birch.k_target);
  lib.metadata["space.seed"] = std::to_string(run.config().space_seed);
  canonicalize(lib);

  persist(lib, run.path(artifact::kLibrary));
  run.record(artifact::kLibrary);
  run.write(artifact::kLibraryJson, library_to_json(lib));
  if (run.options().export_plots) {
    run.write(artifact::kMappingN, mapping_plot_csv(lib, false));
    run.write(artifact::kMappingS, mapping_plot_csv(lib, true));
  }
}

struct PlayerRun {
  std::vector<SessionRecord> sessions;
  std::vector<SessionRecord> practice;
  std::optional<std::string> stop_reason;
};

PlayerRun simulate_player(std::size_t player, const LibraryIndex& index, const PipelineConfig& cfg) {
  PlayerRun out;
  PlayerProfile profile;
  char id[32];
  std::snprintf(id, sizeof id, "P%03zu", player + 1);
  profile.player_id = id;

  const std::uint64_t base = derive_seed(cfg.sim_seed, player);
  std::uint64_t practice_stream = 0;
  const auto practice = [&] {
    auto [p, rec] = practice_session(std::move(profile), index, cfg.sim_policy,
                                     derive_seed(base, (1ULL << 32) + practice_stream++),
                                     cfg.scoring);
    profile = std::move(p);
    out.practice.push_back(std::move(rec));
  };

  practice();
  SessionOptions options{cfg.recycle, cfg.scoring};
  for (std::size_t s = 0; s < cfg.sim_sessions; ++s) {
    try {
      auto [p, rec] = run_session(std::move(profile), index, cfg.sim_policy, derive_seed(base, s), options);
      profile = std::move(p);
      const bool won = rec.outcome == Outcome::Victory;
      out.sessions.push_back(std::move(rec));
      // Passing a material sends the player back to practice for a new level.
      if (won) practice();
    } catch (const CurriculumComplete&) {
      out.stop_reason = std::string(id) + " completed the curriculum";
      break;
    } catch (const EmptyPool& e) {
      out.stop_reason = std::string(id) + " stopped after " + std::to_string(s) +
                        " sessions: " + e.what() + " (use --recycle)";
      break;
    }
  }
  return out;
}

void stage_simulate(StageRun& run) {
  const auto& cfg = run.config();
  const auto lib_path = run.options().library
                            ? StageRun::require_external(*run.options().library, "library")
                            : run.require(artifact::kLibrary, Stage::Map);
  auto lib = load(lib_path);
  if (auto w = check_config_hash(lib, run.hash())) run.warn(*w);
  const LibraryIndex index(std::move(lib));

  std::vector<std::future<PlayerRun>> jobs;
  for (std::size_t p = 0; p < cfg.sim_players; ++p) {
    jobs.push_back(std::async(std::launch::async, simulate_player, p, std::cref(index), std::cref(cfg)));
  }
  std::string summaries, events, practice;
  for (auto& j : jobs) {
    const auto r = j.get();
    for (std::size_t s = 0; s < r.sessions.size(); ++s) {
      summaries += session_summary_json(r.sessions[s]) + "\n";
      events += session_events_jsonl(r.sessions[s], s);
    }
    for (const auto& rec : r.practice) practice += session_summary_json(rec) + "\n";
    if (r.stop_reason) run.warn(*r.stop_reason);
  }
  run.write(artifact::kSessions, summaries);
  run.write(artifact::kSessionEvents, events);
  run.write(artifact::kPractice, practice);
}

void stage_analyze(StageRun& run) {
  const auto& cfg = run.config();
  const auto input = StageRun::require_external(
      run.options().sessions ? *run.options().sessions : cfg.resolve(cfg.survey_path),
      "survey reports");
  std::istringstream in(read_file(input));
  const auto analysis = analyze_survey(read_survey_reports(in), cfg.ztest);
  run.write(artifact::kReport, survey_report_text(analysis));
  run.write(artifact::kAnalysis, survey_report_csv(analysis));
}

StageReport run_unlocked(Stage stage, const PipelineConfig& config, const StageOptions& options) {
  StageRun run(stage, config, options);
  switch (stage) {
    case Stage::Annotate: stage_annotate(run); break;
    case Stage::GenSpace: stage_gen_space(run); break;
    case Stage::Categorize: stage_categorize(run); break;
    case Stage::Cluster: stage_cluster(run); break;
    case Stage::Map: stage_map(run); break;
    case Stage::Simulate: stage_simulate(run); break;
    case Stage::Analyze: stage_analyze(run); break;
  }
  return run.finish();
}

}  // namespace

StageReport run_stage(Stage stage, const PipelineConfig& config, const StageOptions& options) {
  config.validate();
  fs::create_directories(options.work_dir);
  WorkDirLock lock(options.work_dir);
  return run_unlocked(stage, config, options);
}

std::vector<StageReport> run_pipeline(const PipelineConfig& config, const StageOptions& options) {
  config.validate();
  fs::create_directories(options.work_dir);
  WorkDirLock lock(options.work_dir);
  std::vector<StageReport> reports;
  for (auto stage : kAllStages) reports.push_back(run_unlocked(stage, config, options));
  return reports;
}

}  // namespace segforge
