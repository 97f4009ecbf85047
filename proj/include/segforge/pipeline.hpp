#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "segforge/config.hpp"

namespace segforge {

enum class Stage { Annotate, GenSpace, Categorize, Cluster, Map, Simulate, Analyze };

inline constexpr Stage kAllStages[] = {Stage::Annotate, Stage::GenSpace, Stage::Categorize,
                                       Stage::Cluster,  Stage::Map,      Stage::Simulate,
                                       Stage::Analyze};

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

// Artifact file names inside the working directory.
namespace artifact {
inline constexpr const char* kCompounds = "compounds.jsonl";
inline constexpr const char* kMazes = "mazes.jsonl";
inline constexpr const char* kSpace = "space.csv";
inline constexpr const char* kDifficultyCounts = "difficulty_counts.csv";
inline constexpr const char* kClusters = "clusters.csv";
inline constexpr const char* kMembership = "membership.csv";
inline constexpr const char* kThresholdSearch = "threshold_search.csv";
inline constexpr const char* kClusterMeta = "cluster_meta.json";
inline constexpr const char* kLibrary = "library.sqlite";
inline constexpr const char* kLibraryJson = "library.json";
inline constexpr const char* kMappingN = "mapping_N.csv";
inline constexpr const char* kMappingS = "mapping_S.csv";
inline constexpr const char* kSessions = "sessions.jsonl";
inline constexpr const char* kSessionEvents = "session_events.jsonl";
inline constexpr const char* kPractice = "practice.jsonl";
inline constexpr const char* kReport = "report.txt";
inline constexpr const char* kAnalysis = "analysis.csv";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kLock = ".segforge.lock";
}  // namespace artifact

struct StageOptions {
  std::filesystem::path work_dir = ".";
  bool export_plots = false;
  std::optional<std::filesystem::path> library;   // simulate input override
  std::optional<std::filesystem::path> sessions;  // analyze input override
};

struct StageReport {
  Stage stage = Stage::Annotate;
  std::vector<std::string> artifacts;  // file names written
  std::vector<std::string> warnings;
};

// One manifest entry per artifact: the producing stage, the config hash and
// the SHA-256 of the file.
struct ManifestEntry {
  std::string stage;
  std::string config_hash;
  std::string sha256;
};
std::map<std::string, ManifestEntry> read_manifest(const std::filesystem::path& work_dir);

// Holds `.segforge.lock` in the working directory for its lifetime.
// Throws ConfigInvalid when another pipeline already holds it.
class WorkDirLock {
 public:
  explicit WorkDirLock(const std::filesystem::path& work_dir);
  ~WorkDirLock();
  WorkDirLock(const WorkDirLock&) = delete;
  WorkDirLock& operator=(const WorkDirLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Runs one stage. Throws MissingPrerequisite when an input artifact is
// absent; artifacts produced under another config hash only add a warning.
StageReport run_stage(Stage stage, const PipelineConfig& config, const StageOptions& options);

// Every stage in order.
std::vector<StageReport> run_pipeline(const PipelineConfig& config, const StageOptions& options);

}  // namespace segforge
