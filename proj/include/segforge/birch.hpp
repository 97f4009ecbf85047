#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace segforge {

// Row-major set of equal-length points.
class PointSet {
 public:
  explicit PointSet(std::size_t dim = 0) : dim_(dim) {}
  template <typename Range>
  static PointSet from_rows(const Range& rows, std::size_t dim) {
    PointSet ps(dim);
    for (const auto& r : rows) ps.push_back(std::span<const double>(r.data(), r.size()));
    return ps;
  }

  // Throws DimensionMismatch.
  void push_back(std::span<const double> point);

  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return data_.empty(); }
  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  PointSet subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t dim_;
  std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

// (N, LS, SS): count, per-dimension linear sum and per-dimension sum of
// squares. Additive under merge.
struct ClusteringFeature {
  std::size_t n = 0;
  std::vector<double> ls;
  std::vector<double> ss;

  ClusteringFeature() = default;
  explicit ClusteringFeature(std::size_t dim) : ls(dim, 0.0), ss(dim, 0.0) {}
  static ClusteringFeature of(std::span<const double> point);

  std::size_t dim() const { return ls.size(); }
  void add(std::span<const double> point);
  void merge(const ClusteringFeature& other);

  std::vector<double> centroid() const;
  // ss/n - (ls/n)^2 per dimension, clamped at 0.
  std::vector<double> variance() const;
  // Root-mean-square distance of the members to the centroid.
  double radius() const;
  // Radius the entry would have after absorbing `point`, without mutating it.
  double radius_with(std::span<const double> point) const;
  double squared_distance_to_centroid(std::span<const double> point) const;

  bool operator==(const ClusteringFeature&) const = default;
};

ClusteringFeature merge(const ClusteringFeature& a, const ClusteringFeature& b);

// A flat cluster: CF plus the ids of its member points (ascending).
struct Cluster {
  std::int64_t id = 0;
  ClusteringFeature cf;
  std::vector<std::size_t> members;

  bool operator==(const Cluster&) const = default;
};

// Height-balanced CF-tree. Every node holds between 1 and `branching_factor`
// entries; a leaf entry absorbs a point when its radius stays within
// `threshold`.
class CFTree {
 public:
  CFTree(std::size_t dim, std::size_t branching_factor, double threshold);
  ~CFTree();
  CFTree(CFTree&&) noexcept;
  CFTree& operator=(CFTree&&) noexcept;

  // Throws DimensionMismatch.
  void insert(std::span<const double> point, std::size_t id);

  std::size_t dim() const { return dim_; }
  std::size_t branching_factor() const { return branching_factor_; }
  double threshold() const { return threshold_; }
  std::size_t point_count() const { return point_count_; }
  std::size_t leaf_entry_count() const;
  std::size_t height() const;
  ClusteringFeature root_cf() const;

  // Leaf entries left to right; ids are 0..leaf_entry_count()-1.
  std::vector<Cluster> leaf_clusters() const;

  // Structural audit used by the property tests: occupancy bounds, CF
  // additivity within `tolerance`, member counts and uniform leaf depth.
  // Returns an empty string when everything holds.
  std::string audit(double tolerance = 1e-9) const;

  struct Node;

 private:
  std::size_t dim_;
  std::size_t branching_factor_;
  double threshold_;
  std::size_t point_count_ = 0;
  std::unique_ptr<Node> root_;
};

}  // namespace segforge
