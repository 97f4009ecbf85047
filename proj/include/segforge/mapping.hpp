#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "segforge/clustering.hpp"
#include "segforge/contentspace.hpp"
#include "segforge/knowledge.hpp"

namespace segforge {

struct LibraryEntry {
  int compound_id = 0;
  DifficultyLevel difficulty = DifficultyLevel::Easy;
  std::int64_t cluster_id = 0;

  bool operator==(const LibraryEntry&) const = default;
};

struct GameRecord {
  GameParams params;
  DifficultyLevel difficulty = DifficultyLevel::Easy;

  bool operator==(const GameRecord&) const = default;
};

struct ClusterRecord {
  std::int64_t cluster_id = 0;
  DifficultyLevel difficulty = DifficultyLevel::Easy;
  std::size_t n = 0;
  double s = 0.0;
  std::vector<double> centroid;

  bool operator==(const ClusterRecord&) const = default;
};

struct MembershipRow {
  std::int64_t cluster_id = 0;
  std::string game_id;

  bool operator==(const MembershipRow&) const = default;
};

// Everything a game engine needs: both spaces, the clusters and the
// compound -> cluster mapping. Tables are kept in canonical (primary key)
// order so equal libraries serialize to equal bytes.
struct ContentLibrary {
  std::vector<CompoundAnnotation> compounds;
  std::vector<MazeRecord> mazes;
  std::vector<GameRecord> games;
  std::vector<ClusterRecord> clusters;
  std::vector<MembershipRow> membership;
  std::vector<LibraryEntry> mapping;
  std::map<std::string, std::string> metadata;

  bool operator==(const ContentLibrary&) const = default;
};

inline constexpr const char* kMetaConfigHash = "config_hash";
inline constexpr const char* kMetaScalerMin = "scaler.min";
inline constexpr const char* kMetaScalerMax = "scaler.max";

// N ascending, then S descending, then cluster_id ascending.
std::vector<ClusterSummary> sort_clusters(std::vector<ClusterSummary> clusters);

// Pairs the j-th easiest compound with the j-th cluster of every level after
// sorting both sides. Throws CardinalityMismatch when a level's cluster count
// differs from the compound count.
std::vector<LibraryEntry> deploy(
    std::vector<CompoundAnnotation> compounds,
    const std::map<DifficultyLevel, std::vector<ClusterSummary>>& clusters_by_level);

void canonicalize(ContentLibrary& library);

// Referential integrity, uniqueness and full mapping coverage.
// Throws IntegrityViolation naming the first problem found.
void validate(const ContentLibrary& library);

// Per-compound N and S for each level, in compound order.
// mapping_N.csv / mapping_S.csv: compound_id,formula,Easy,Medium,Hard
std::string mapping_plot_csv(const ContentLibrary& library, bool use_s);

}  // namespace segforge
