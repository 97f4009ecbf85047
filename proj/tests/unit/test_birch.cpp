#include <gtest/gtest.h>

#include <set>

#include "segforge/birch.hpp"
#include "segforge/error.hpp"
#include "segforge/rng.hpp"

using namespace segforge;

namespace {

constexpr std::size_t kDim = 8;

std::vector<double> padded(double x) {
  std::vector<double> p(kDim, 0.0);
  p[0] = x;
  return p;
}

std::vector<double> random_point(Rng& rng, std::size_t dim) {
  std::vector<double> p(dim);
  for (auto& v : p) v = rng.uniform();
  return p;
}

}  // namespace

TEST(ClusteringFeature, MergeIsComponentwiseSum) {
  const std::vector<double> a{1.0, 2.0}, b{3.0, -1.0}, c{0.5, 0.5};
  auto left = ClusteringFeature::of(a);
  left.add(b);
  const auto right = ClusteringFeature::of(c);
  const auto m = merge(left, right);
  EXPECT_EQ(m.n, 3u);
  EXPECT_DOUBLE_EQ(m.ls[0], 4.5);
  EXPECT_DOUBLE_EQ(m.ls[1], 1.5);
  EXPECT_DOUBLE_EQ(m.ss[0], 1.0 + 9.0 + 0.25);
  EXPECT_DOUBLE_EQ(m.ss[1], 4.0 + 1.0 + 0.25);
  // Merged centroid is the count-weighted mean of the parts.
  const auto lc = left.centroid(), rc = right.centroid(), mc = m.centroid();
  for (std::size_t d = 0; d < 2; ++d) EXPECT_NEAR(mc[d], (2 * lc[d] + rc[d]) / 3.0, 1e-12);
}

TEST(ClusteringFeature, RadiusIsRmsDistanceToCentroid) {
  auto cf = ClusteringFeature::of(padded(0.0));
  cf.add(padded(1.0));
  EXPECT_NEAR(cf.radius(), 0.5, 1e-12);
  EXPECT_NEAR(ClusteringFeature::of(padded(0.0)).radius_with(padded(1.0)), 0.5, 1e-12);
  auto same = ClusteringFeature::of(padded(0.3));
  same.add(padded(0.3));
  EXPECT_EQ(same.radius(), 0.0);
  for (double v : same.variance()) EXPECT_GE(v, 0.0);
}

TEST(CFTree, SamePointTwiceIsOneEntry) {
  CFTree tree(kDim, 2, 0.01);
  tree.insert(padded(0.4), 0);
  tree.insert(padded(0.4), 1);
  const auto leaves = tree.leaf_clusters();
  ASSERT_EQ(leaves.size(), 1u);
  EXPECT_EQ(leaves[0].cf.n, 2u);
  EXPECT_EQ(leaves[0].members, (std::vector<std::size_t>{0, 1}));
}

TEST(CFTree, DistantPairSplitsUnderSmallThreshold) {
  CFTree tree(kDim, 2, 0.1);
  tree.insert(padded(0.0), 0);
  tree.insert(padded(1.0), 1);
  EXPECT_EQ(tree.leaf_entry_count(), 2u);
  CFTree loose(kDim, 2, 0.5);
  loose.insert(padded(0.0), 0);
  loose.insert(padded(1.0), 1);
  EXPECT_EQ(loose.leaf_entry_count(), 1u);
}

TEST(CFTree, RejectsWrongDimension) {
  CFTree tree(kDim, 2, 0.1);
  EXPECT_THROW(tree.insert(std::vector<double>(3, 0.0), 0), DimensionMismatch);
}

TEST(CFTree, RootCfIsSumOfAllPoints) {
  Rng rng(5);
  CFTree tree(kDim, 2, 0.05);
  ClusteringFeature expected(kDim);
  for (std::size_t i = 0; i < 300; ++i) {
    const auto p = random_point(rng, kDim);
    tree.insert(p, i);
    expected.add(p);
  }
  const auto root = tree.root_cf();
  EXPECT_EQ(root.n, expected.n);
  for (std::size_t d = 0; d < kDim; ++d) {
    EXPECT_NEAR(root.ls[d], expected.ls[d], 1e-9);
    EXPECT_NEAR(root.ss[d], expected.ss[d], 1e-9);
  }
}

// Random dimension, branching factor, threshold and point cloud; the tree
// must stay balanced, bounded and CF-additive after every sequence, and its
// leaves must partition the inserted ids.
TEST(CFTreeProperty, ThousandRandomInsertionSequences) {
  Rng meta(20240601);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + meta.index(8);
    const std::size_t branching = 2 + meta.index(4);
    const double threshold = 0.005 + 0.3 * meta.uniform();
    const std::size_t n = 1 + meta.index(120);
    Rng rng(derive_seed(99, trial));

    CFTree tree(dim, branching, threshold);
    for (std::size_t i = 0; i < n; ++i) {
      // Mix of clustered and scattered points, with exact duplicates.
      std::vector<double> p = random_point(rng, dim);
      if (rng.chance(0.3)) std::fill(p.begin(), p.end(), 0.25 * double(rng.index(4)));
      tree.insert(p, i);
      if (i % 16 == 0) ASSERT_EQ(tree.audit(), "") << "trial " << trial << " after " << i;
    }
    ASSERT_EQ(tree.audit(), "") << "trial " << trial;
    ASSERT_EQ(tree.point_count(), n);

    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (const auto& leaf : tree.leaf_clusters()) {
      ASSERT_EQ(leaf.cf.n, leaf.members.size());
      ASSERT_LE(leaf.cf.radius(), threshold + 1e-9);
      total += leaf.members.size();
      seen.insert(leaf.members.begin(), leaf.members.end());
    }
    ASSERT_EQ(total, n);
    ASSERT_EQ(seen.size(), n);
    ASSERT_EQ(*seen.rbegin(), n - 1);
  }
}

TEST(PointSet, SubsetAndDimensionCheck) {
  PointSet ps(2);
  ps.push_back(std::vector<double>{1, 2});
  ps.push_back(std::vector<double>{3, 4});
  ps.push_back(std::vector<double>{5, 6});
  EXPECT_THROW(ps.push_back(std::vector<double>{1}), DimensionMismatch);
  const std::vector<std::size_t> rows{2, 0};
  const auto sub = ps.subset(rows);
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub[0][0], 5);
  EXPECT_EQ(sub[1][1], 2);
}
