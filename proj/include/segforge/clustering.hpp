#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "segforge/birch.hpp"
#include "segforge/contentspace.hpp"

namespace segforge {

struct BirchConfig {
  std::size_t branching_factor = 2;
  std::size_t k_target = 100;
  std::vector<double> threshold_grid{0.005, 0.01, 0.02, 0.04, 0.08};
  std::size_t silhouette_sample = 2000;
  std::uint64_t seed = 7;
};

// Agglomerates the two nearest centroids (CF-additive merge) until exactly k
// clusters remain. Ties go to the pair with the lower cluster ids; a merged
// cluster keeps the lower id. Output is sorted by id.
// Throws TooFewClusters when fewer than k clusters are given.
std::vector<Cluster> refine_to_k(std::vector<Cluster> clusters, std::size_t k);

// Mean silhouette over all points, Euclidean metric. A point alone in its
// cluster has a = 0; a point with a = b = 0 scores 0.
// Throws SingleCluster when fewer than two labels occur.
double silhouette(const PointSet& points, std::span<const std::int64_t> labels);

// Silhouette of a seeded sample of at most `sample_cap` points (all points
// when the set is small enough).
double sampled_silhouette(const PointSet& points, std::span<const std::int64_t> labels,
                          std::size_t sample_cap, std::uint64_t seed);

// Label per point from a flat partition.
std::vector<std::int64_t> labels_from_clusters(const std::vector<Cluster>& clusters,
                                               std::size_t point_count);

struct ThresholdLogRow {
  double threshold = 0.0;
  std::size_t leaf_count = 0;
  std::optional<double> silhouette;  // empty when the threshold gave < k leaves
};

struct ThresholdSearchResult {
  double threshold = 0.0;
  std::vector<Cluster> clusters;
  double score = 0.0;
  std::vector<ThresholdLogRow> log;
};

// For every T in the grid: build a CF-tree over the points in order, refine
// the leaf entries to k and score the partition. Returns the best-scoring T
// (ties go to the smaller T). Throws NoFeasibleThreshold.
ThresholdSearchResult search_threshold(const PointSet& points, const BirchConfig& config);

struct ClusterSummary {
  std::int64_t cluster_id = 0;
  DifficultyLevel difficulty = DifficultyLevel::Easy;
  ClusteringFeature cf;
  std::vector<double> centroid;
  std::vector<std::string> member_game_ids;
  std::size_t n_games = 0;
  double s_sum = 0.0;

  bool operator==(const ClusterSummary&) const = default;
};

// Sum over dimensions of the population standard deviation of the rows.
double sum_of_stddevs(const PointSet& points, std::span<const std::size_t> rows);

// `game_ids` and `s_space` are indexed like the cluster members. S is computed
// from `s_space` (the raw vectors by default).
ClusterSummary summarize_cluster(const Cluster& cluster, DifficultyLevel difficulty,
                                 std::span<const std::string> game_ids, const PointSet& s_space);

// clusters CSV: cluster_id,difficulty,n,S,c0..c7
void write_clusters_csv(std::ostream& out, const std::vector<ClusterSummary>& clusters);
// membership CSV: cluster_id,game_id
void write_membership_csv(std::ostream& out, const std::vector<ClusterSummary>& clusters);
// Reassembles summaries (without CFs) from the two CSVs.
std::vector<ClusterSummary> read_cluster_csvs(std::istream& clusters, std::istream& membership);

void write_threshold_log_header(std::ostream& out);
void write_threshold_log(std::ostream& out, DifficultyLevel difficulty,
                         const std::vector<ThresholdLogRow>& rows);

}  // namespace segforge
