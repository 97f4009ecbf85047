#include "segforge/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "segforge/error.hpp"
#include "segforge/rng.hpp"
#include "segforge/text.hpp"

namespace segforge {

std::vector<Cluster> refine_to_k(std::vector<Cluster> clusters, std::size_t k) {
  if (clusters.size() < k) {
    throw TooFewClusters("have " + std::to_string(clusters.size()) + " clusters, need " +
                         std::to_string(k));
  }
  if (k == 0) throw TooFewClusters("k must be at least 1");
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
  const std::size_t m = clusters.size();
  if (m == k || m == 0) return clusters;

  const std::size_t dim = clusters.front().cf.dim();
  std::vector<double> centroids(m * dim);
  auto centroid = [&](std::size_t i) { return std::span<const double>(&centroids[i * dim], dim); };
  auto set_centroid = [&](std::size_t i) {
    const double inv = 1.0 / static_cast<double>(clusters[i].cf.n);
    for (std::size_t d = 0; d < dim; ++d) centroids[i * dim + d] = clusters[i].cf.ls[d] * inv;
  };
  for (std::size_t i = 0; i < m; ++i) set_centroid(i);

  std::vector<bool> active(m, true);
  std::vector<std::size_t> nn(m, m);
  std::vector<double> nn_dist(m, std::numeric_limits<double>::infinity());

  // Slots are sorted by id, so slot order is id order and comparing slots
  // compares ids.
  auto recompute = [&](std::size_t i) {
    nn[i] = m;
    nn_dist[i] = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i || !active[j]) continue;
      const double d = squared_distance(centroid(i), centroid(j));
      if (d < nn_dist[i]) {
        nn_dist[i] = d;
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < m; ++i) recompute(i);

  std::size_t remaining = m;
  while (remaining > k) {
    std::size_t best = m;
    auto key = [&](std::size_t i) {
      return std::make_tuple(nn_dist[i], std::min(i, nn[i]), std::max(i, nn[i]));
    };
    for (std::size_t i = 0; i < m; ++i) {
      if (!active[i]) continue;
      if (best == m || key(i) < key(best)) best = i;
    }
    const std::size_t keep = std::min(best, nn[best]);
    const std::size_t gone = std::max(best, nn[best]);

    clusters[keep].cf.merge(clusters[gone].cf);
    auto& km = clusters[keep].members;
    const auto& gm = clusters[gone].members;
    const auto mid = km.insert(km.end(), gm.begin(), gm.end());
    std::inplace_merge(km.begin(), mid, km.end());
    clusters[gone].members.clear();
    active[gone] = false;
    set_centroid(keep);
    --remaining;

    for (std::size_t i = 0; i < m; ++i) {
      if (!active[i] || i == keep) continue;
      if (nn[i] == keep || nn[i] == gone) {
        recompute(i);
        continue;
      }
      const double d = squared_distance(centroid(i), centroid(keep));
      if (d < nn_dist[i] || (d == nn_dist[i] && keep < nn[i])) {
        nn_dist[i] = d;
        nn[i] = keep;
      }
    }
    recompute(keep);
  }

  std::vector<Cluster> out;
  out.reserve(k);
  for (std::size_t i = 0; i < m; ++i) {
    if (active[i]) out.push_back(std::move(clusters[i]));
  }
  return out;
}

double silhouette(const PointSet& points, std::span<const std::int64_t> labels) {
  const std::size_t n = points.size();
  if (labels.size() != n) throw DimensionMismatch("one label per point required");

  std::map<std::int64_t, std::size_t> dense;
  for (auto l : labels) dense.emplace(l, 0);
  if (dense.size() < 2) throw SingleCluster("silhouette needs at least two clusters");
  std::size_t next = 0;
  for (auto& [label, idx] : dense) idx = next++;
  const std::size_t c = dense.size();

  std::vector<std::size_t> cls(n);
  std::vector<double> counts(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cls[i] = dense[labels[i]];
    counts[cls[i]] += 1.0;
  }

  double total = 0.0;
  std::vector<double> sums(c);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[cls[j]] += distance(points[i], points[j]);
    }
    const std::size_t own = cls[i];
    const double a = counts[own] > 1.0 ? sums[own] / (counts[own] - 1.0) : 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c; ++k) {
      if (k != own) b = std::min(b, sums[k] / counts[k]);
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

double sampled_silhouette(const PointSet& points, std::span<const std::int64_t> labels,
                          std::size_t sample_cap, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (labels.size() != n) throw DimensionMismatch("one label per point required");
  if (sample_cap == 0 || n <= sample_cap) return silhouette(points, labels);

  // Partial Fisher-Yates: the first sample_cap slots become the sample.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < sample_cap; ++i) {
    std::swap(idx[i], idx[i + rng.index(n - i)]);
  }
  idx.resize(sample_cap);
  std::sort(idx.begin(), idx.end());
  std::vector<std::int64_t> sub_labels;
  sub_labels.reserve(sample_cap);
  for (auto i : idx) sub_labels.push_back(labels[i]);
  return silhouette(points.subset(idx), sub_labels);
}

std::vector<std::int64_t> labels_from_clusters(const std::vector<Cluster>& clusters,
                                               std::size_t point_count) {
  std::vector<std::int64_t> labels(point_count, -1);
  for (const auto& c : clusters) {
    for (auto m : c.members) labels.at(m) = c.id;
  }
  return labels;
}

ThresholdSearchResult search_threshold(const PointSet& points, const BirchConfig& config) {
  if (points.size() < config.k_target) {
    throw TooFewClusters("only " + std::to_string(points.size()) + " points for k=" +
                         std::to_string(config.k_target));
  }
  ThresholdSearchResult result;
  bool found = false;
  for (double t : config.threshold_grid) {
    CFTree tree(points.dim(), config.branching_factor, t);
    for (std::size_t i = 0; i < points.size(); ++i) tree.insert(points[i], i);
    auto leaves = tree.leaf_clusters();

    ThresholdLogRow row;
    row.threshold = t;
    row.leaf_count = leaves.size();
    if (leaves.size() < config.k_target) {
      result.log.push_back(row);
      continue;
    }
    auto clusters = refine_to_k(std::move(leaves), config.k_target);
    const auto labels = labels_from_clusters(clusters, points.size());
    const double score =
        sampled_silhouette(points, labels, config.silhouette_sample, config.seed);
    row.silhouette = score;
    result.log.push_back(row);
    if (!found || score > result.score) {
      found = true;
      result.threshold = t;
      result.score = score;
      result.clusters = std::move(clusters);
    }
  }
  if (!found) {
    throw NoFeasibleThreshold("no threshold in the grid yields at least " +
                              std::to_string(config.k_target) + " leaf entries");
  }
  return result;
}

double sum_of_stddevs(const PointSet& points, std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  const std::size_t dim = points.dim();
  std::vector<double> mean(dim, 0.0);
  for (auto r : rows) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += points[r][d];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto& v : mean) v *= inv;
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double acc = 0.0;
    for (auto r : rows) {
      const double diff = points[r][d] - mean[d];
      acc += diff * diff;
    }
    s += std::sqrt(acc * inv);
  }
  return s;
}

ClusterSummary summarize_cluster(const Cluster& cluster, DifficultyLevel difficulty,
                                 std::span<const std::string> game_ids, const PointSet& s_space) {
  ClusterSummary s;
  s.cluster_id = cluster.id;
  s.difficulty = difficulty;
  s.cf = cluster.cf;
  s.centroid = cluster.cf.centroid();
  s.n_games = cluster.members.size();
  s.member_game_ids.reserve(cluster.members.size());
  for (auto m : cluster.members) s.member_game_ids.push_back(game_ids[m]);
  s.s_sum = sum_of_stddevs(s_space, cluster.members);
  return s;
}

void write_clusters_csv(std::ostream& out, const std::vector<ClusterSummary>& clusters) {
  out << "cluster_id,difficulty,n,S";
  for (std::size_t d = 0; d < kFeatureDim; ++d) out << ",c" << d;
  out << '\n';
  for (const auto& c : clusters) {
    out << c.cluster_id << ',' << to_string(c.difficulty) << ',' << c.n_games << ','
        << format_double(c.s_sum);
    for (double v : c.centroid) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_membership_csv(std::ostream& out, const std::vector<ClusterSummary>& clusters) {
  out << "cluster_id,game_id\n";
  for (const auto& c : clusters) {
    for (const auto& g : c.member_game_ids) out << c.cluster_id << ',' << g << '\n';
  }
}

std::vector<ClusterSummary> read_cluster_csvs(std::istream& clusters, std::istream& membership) {
  std::vector<ClusterSummary> out;
  std::map<std::int64_t, std::size_t> index;
  std::string line;
  if (!std::getline(clusters, line) || !line.starts_with("cluster_id,difficulty,n,S")) {
    throw MalformedRecord("clusters CSV is missing its header");
  }
  while (std::getline(clusters, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 4 + kFeatureDim) throw MalformedRecord("clusters CSV row: " + line);
    ClusterSummary c;
    c.cluster_id = parse_int64(f[0]);
    c.difficulty = parse_difficulty(f[1]);
    c.n_games = static_cast<std::size_t>(parse_int64(f[2]));
    c.s_sum = parse_double(f[3]);
    for (std::size_t d = 0; d < kFeatureDim; ++d) c.centroid.push_back(parse_double(f[4 + d]));
    index[c.cluster_id] = out.size();
    out.push_back(std::move(c));
  }
  if (!std::getline(membership, line) || line != "cluster_id,game_id") {
    throw MalformedRecord("membership CSV is missing its header");
  }
  while (std::getline(membership, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 2) throw MalformedRecord("membership CSV row: " + line);
    const auto it = index.find(parse_int64(f[0]));
    if (it == index.end()) throw MalformedRecord("membership references unknown cluster " + f[0]);
    out[it->second].member_game_ids.push_back(f[1]);
  }
  return out;
}

void write_threshold_log_header(std::ostream& out) { out << "difficulty,T,leaf_count,silhouette\n"; }

void write_threshold_log(std::ostream& out, DifficultyLevel difficulty,
                         const std::vector<ThresholdLogRow>& rows) {
  for (const auto& r : rows) {
    out << to_string(difficulty) << ',' << format_double(r.threshold) << ',' << r.leaf_count << ','
        << (r.silhouette ? format_double(*r.silhouette) : std::string()) << '\n';
  }
}

}  // namespace segforge
