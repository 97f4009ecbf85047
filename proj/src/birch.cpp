#include "segforge/birch.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include "segforge/error.hpp"

namespace segforge {

void PointSet::push_back(std::span<const double> point) {
  if (point.size() != dim_) {
    throw DimensionMismatch("point has dimension " + std::to_string(point.size()) +
                            ", expected " + std::to_string(dim_));
  }
  data_.insert(data_.end(), point.begin(), point.end());
}

PointSet PointSet::subset(std::span<const std::size_t> rows) const {
  PointSet out(dim_);
  out.data_.reserve(rows.size() * dim_);
  for (auto r : rows) out.push_back((*this)[r]);
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

ClusteringFeature ClusteringFeature::of(std::span<const double> point) {
  ClusteringFeature cf(point.size());
  cf.add(point);
  return cf;
}

void ClusteringFeature::add(std::span<const double> point) {
  if (point.size() != dim()) {
    throw DimensionMismatch("CF of dimension " + std::to_string(dim()) + " given a point of " +
                            std::to_string(point.size()));
  }
  ++n;
  for (std::size_t d = 0; d < point.size(); ++d) {
    ls[d] += point[d];
    ss[d] += point[d] * point[d];
  }
}

void ClusteringFeature::merge(const ClusteringFeature& other) {
  if (other.dim() != dim()) throw DimensionMismatch("merging CFs of different dimension");
  n += other.n;
  for (std::size_t d = 0; d < dim(); ++d) {
    ls[d] += other.ls[d];
    ss[d] += other.ss[d];
  }
}

ClusteringFeature merge(const ClusteringFeature& a, const ClusteringFeature& b) {
  ClusteringFeature out = a;
  out.merge(b);
  return out;
}

std::vector<double> ClusteringFeature::centroid() const {
  std::vector<double> c(dim(), 0.0);
  if (n == 0) return c;
  for (std::size_t d = 0; d < dim(); ++d) c[d] = ls[d] / static_cast<double>(n);
  return c;
}

std::vector<double> ClusteringFeature::variance() const {
  std::vector<double> v(dim(), 0.0);
  if (n == 0) return v;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t d = 0; d < dim(); ++d) {
    const double mean = ls[d] * inv;
    v[d] = std::max(0.0, ss[d] * inv - mean * mean);
  }
  return v;
}

double ClusteringFeature::radius() const {
  double total = 0.0;
  for (double v : variance()) total += v;
  return std::sqrt(total);
}

double ClusteringFeature::radius_with(std::span<const double> point) const {
  const double inv = 1.0 / static_cast<double>(n + 1);
  double total = 0.0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double mean = (ls[d] + point[d]) * inv;
    total += std::max(0.0, (ss[d] + point[d] * point[d]) * inv - mean * mean);
  }
  return std::sqrt(total);
}

double ClusteringFeature::squared_distance_to_centroid(std::span<const double> point) const {
  const double inv = 1.0 / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double diff = ls[d] * inv - point[d];
    s += diff * diff;
  }
  return s;
}

struct CFTree::Node {
  struct Entry {
    ClusteringFeature cf;
    std::unique_ptr<Node> child;       // internal nodes
    std::vector<std::size_t> members;  // leaves
  };

  bool leaf = true;
  std::vector<Entry> entries;

  ClusteringFeature total(std::size_t dim) const {
    ClusteringFeature cf(dim);
    for (const auto& e : entries) cf.merge(e.cf);
    return cf;
  }
};

namespace {

using Node = CFTree::Node;
using Entry = Node::Entry;

std::size_t closest_entry(const Node& node, std::span<const double> point) {
  std::size_t best = 0;
  double best_d = node.entries[0].cf.squared_distance_to_centroid(point);
  for (std::size_t i = 1; i < node.entries.size(); ++i) {
    const double d = node.entries[i].cf.squared_distance_to_centroid(point);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Splits an over-full node around its farthest pair of entry centroids.
std::pair<std::unique_ptr<Node>, std::unique_ptr<Node>> split_node(Node& node) {
  const std::size_t m = node.entries.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(m);
  for (const auto& e : node.entries) centroids.push_back(e.cf.centroid());

  std::size_t seed_a = 0;
  std::size_t seed_b = 1;
  double far = -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = squared_distance(centroids[i], centroids[j]);
      if (d > far) {
        far = d;
        seed_a = i;
        seed_b = j;
      }
    }
  }

  auto left = std::make_unique<Node>();
  auto right = std::make_unique<Node>();
  left->leaf = right->leaf = node.leaf;
  for (std::size_t i = 0; i < m; ++i) {
    bool to_left;
    if (i == seed_a) {
      to_left = true;
    } else if (i == seed_b) {
      to_left = false;
    } else {
      to_left = squared_distance(centroids[i], centroids[seed_a]) <=
                squared_distance(centroids[i], centroids[seed_b]);
    }
    (to_left ? left : right)->entries.push_back(std::move(node.entries[i]));
  }
  node.entries.clear();
  return {std::move(left), std::move(right)};
}

using Split = std::optional<std::pair<std::unique_ptr<Node>, std::unique_ptr<Node>>>;

Split insert_into(Node& node, std::span<const double> point, std::size_t id, double threshold,
                  std::size_t branching_factor, std::size_t dim) {
  if (node.leaf) {
    if (!node.entries.empty()) {
      auto& e = node.entries[closest_entry(node, point)];
      if (e.cf.radius_with(point) <= threshold) {
        e.cf.add(point);
        e.members.push_back(id);
        return std::nullopt;
      }
    }
    Entry fresh;
    fresh.cf = ClusteringFeature::of(point);
    fresh.members.push_back(id);
    node.entries.push_back(std::move(fresh));
  } else {
    const std::size_t i = closest_entry(node, point);
    auto split = insert_into(*node.entries[i].child, point, id, threshold, branching_factor, dim);
    if (!split) {
      node.entries[i].cf.add(point);
      return std::nullopt;
    }
    Entry a;
    a.cf = split->first->total(dim);
    a.child = std::move(split->first);
    Entry b;
    b.cf = split->second->total(dim);
    b.child = std::move(split->second);
    node.entries[i] = std::move(a);
    node.entries.insert(node.entries.begin() + static_cast<std::ptrdiff_t>(i) + 1, std::move(b));
  }
  if (node.entries.size() > branching_factor) return split_node(node);
  return std::nullopt;
}

void collect_leaves(const Node& node, std::vector<Cluster>& out) {
  for (const auto& e : node.entries) {
    if (node.leaf) {
      Cluster c;
      c.id = static_cast<std::int64_t>(out.size());
      c.cf = e.cf;
      c.members = e.members;
      std::sort(c.members.begin(), c.members.end());
      out.push_back(std::move(c));
    } else {
      collect_leaves(*e.child, out);
    }
  }
}

bool cf_close(const ClusteringFeature& a, const ClusteringFeature& b, double tol) {
  if (a.n != b.n || a.dim() != b.dim()) return false;
  for (std::size_t d = 0; d < a.dim(); ++d) {
    const double scale_ls = std::max(1.0, std::abs(a.ls[d]));
    const double scale_ss = std::max(1.0, std::abs(a.ss[d]));
    if (std::abs(a.ls[d] - b.ls[d]) > tol * scale_ls) return false;
    if (std::abs(a.ss[d] - b.ss[d]) > tol * scale_ss) return false;
  }
  return true;
}

// Returns leaf depth, or -1 (with `why` filled) on the first violation.
int audit_node(const Node& node, std::size_t b, std::size_t dim, double tol, int depth,
               std::ostringstream& why) {
  if (node.entries.empty() || node.entries.size() > b) {
    why << "node at depth " << depth << " holds " << node.entries.size() << " entries";
    return -1;
  }
  int leaf_depth = -2;
  for (const auto& e : node.entries) {
    if (node.leaf) {
      if (e.child || e.members.size() != e.cf.n) {
        why << "leaf entry member count " << e.members.size() << " != n " << e.cf.n;
        return -1;
      }
      leaf_depth = depth;
      continue;
    }
    if (!e.child) {
      why << "internal entry without child at depth " << depth;
      return -1;
    }
    if (!cf_close(e.cf, e.child->total(dim), tol)) {
      why << "CF additivity violated at depth " << depth;
      return -1;
    }
    const int d = audit_node(*e.child, b, dim, tol, depth + 1, why);
    if (d < 0) return -1;
    if (leaf_depth != -2 && d != leaf_depth) {
      why << "leaves at unequal depths " << d << " and " << leaf_depth;
      return -1;
    }
    leaf_depth = d;
  }
  return leaf_depth;
}

std::size_t count_leaf_entries(const Node& node) {
  if (node.leaf) return node.entries.size();
  std::size_t total = 0;
  for (const auto& e : node.entries) total += count_leaf_entries(*e.child);
  return total;
}

}  // namespace

CFTree::CFTree(std::size_t dim, std::size_t branching_factor, double threshold)
    : dim_(dim), branching_factor_(branching_factor), threshold_(threshold),
      root_(std::make_unique<Node>()) {
  if (branching_factor < 2) throw Error("branching factor must be >= 2");
  if (!(threshold > 0.0)) throw Error("threshold must be > 0");
}

CFTree::~CFTree() = default;
CFTree::CFTree(CFTree&&) noexcept = default;
CFTree& CFTree::operator=(CFTree&&) noexcept = default;

void CFTree::insert(std::span<const double> point, std::size_t id) {
  if (point.size() != dim_) {
    throw DimensionMismatch("point has dimension " + std::to_string(point.size()) +
                            ", tree expects " + std::to_string(dim_));
  }
  auto split = insert_into(*root_, point, id, threshold_, branching_factor_, dim_);
  ++point_count_;
  if (!split) return;
  auto root = std::make_unique<Node>();
  root->leaf = false;
  Entry a;
  a.cf = split->first->total(dim_);
  a.child = std::move(split->first);
  Entry b;
  b.cf = split->second->total(dim_);
  b.child = std::move(split->second);
  root->entries.push_back(std::move(a));
  root->entries.push_back(std::move(b));
  root_ = std::move(root);
}

std::size_t CFTree::leaf_entry_count() const { return count_leaf_entries(*root_); }

std::size_t CFTree::height() const {
  std::size_t h = 1;
  for (const Node* n = root_.get(); !n->leaf; n = n->entries.front().child.get()) ++h;
  return h;
}

ClusteringFeature CFTree::root_cf() const { return root_->total(dim_); }

std::vector<Cluster> CFTree::leaf_clusters() const {
  std::vector<Cluster> out;
  collect_leaves(*root_, out);
  return out;
}

std::string CFTree::audit(double tolerance) const {
  if (point_count_ == 0) return root_->entries.empty() ? "" : "empty tree has entries";
  std::ostringstream why;
  if (audit_node(*root_, branching_factor_, dim_, tolerance, 0, why) < 0) return why.str();
  if (root_cf().n != point_count_) return "root CF count differs from inserted points";
  return {};
}

}  // namespace segforge
