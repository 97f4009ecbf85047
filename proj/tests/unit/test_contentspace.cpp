#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "segforge/contentspace.hpp"
#include "segforge/error.hpp"

using namespace segforge;

namespace {

std::vector<MazeRecord> fake_mazes(std::size_t n) {
  std::vector<MazeRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    MazeRecord m;
    m.maze_id = format_maze_id(i);
    m.seed = i;
    m.width = m.height = 21;
    m.features = MazeFeatures{199, 40 + int(i % 7), 8, 12, (40.0 + double(i % 7) + 20.0) / 199.0};
    out.push_back(m);
  }
  return out;
}

GameParams game(EnemyType type, int enemies, int bullets = 1, std::string maze = "MZ00001") {
  return GameParams{make_game_id(maze, type, enemies, bullets), maze, type, enemies, bullets};
}

MazeRecord corridor() {
  MazeRecord m;
  m.maze_id = "MZ00001";
  m.features = MazeFeatures{5, 0, 0, 2, 0.4};
  return m;
}

}  // namespace

TEST(ContentSpace, SpaceSizeIsFiftyPerMaze) {
  EXPECT_EQ(enumerate_space(fake_mazes(1)).size(), 50u);
  EXPECT_EQ(enumerate_space(fake_mazes(972)).size(), 48600u);
  EXPECT_THROW(enumerate_space({}), EmptyMazeSet);
}

TEST(ContentSpace, GameIdsDistinct) {
  const auto space = enumerate_space(fake_mazes(2));
  ASSERT_EQ(space.size(), 100u);
  std::set<std::string> ids;
  for (const auto& g : space) ids.insert(g.game_id);
  EXPECT_EQ(ids.size(), 100u);
  EXPECT_EQ(space.front().game_id, "MZ00001-E0-N1-B1");
}

TEST(ContentSpace, DifficultyExamples) {
  EXPECT_EQ(classify_difficulty(game(EnemyType::RandomMove, 1)), DifficultyLevel::Easy);
  EXPECT_EQ(classify_difficulty(game(EnemyType::RandomMove, 4)), DifficultyLevel::Medium);
  EXPECT_EQ(classify_difficulty(game(EnemyType::Smart, 5)), DifficultyLevel::Hard);
  EXPECT_EQ(classify_difficulty(game(EnemyType::Smart, 2)), DifficultyLevel::Medium);
}

// Each (enemy_type, total_enemy) cell satisfies exactly one level predicate.
TEST(ContentSpace, DifficultyRulesPartitionTheEnemyGrid) {
  const std::map<std::pair<int, int>, DifficultyLevel> expected{
      {{0, 1}, DifficultyLevel::Easy},   {{0, 2}, DifficultyLevel::Easy},
      {{0, 3}, DifficultyLevel::Easy},   {{0, 4}, DifficultyLevel::Medium},
      {{0, 5}, DifficultyLevel::Medium}, {{1, 1}, DifficultyLevel::Medium},
      {{1, 2}, DifficultyLevel::Medium}, {{1, 3}, DifficultyLevel::Hard},
      {{1, 4}, DifficultyLevel::Hard},   {{1, 5}, DifficultyLevel::Hard}};
  for (int t = 0; t <= 1; ++t) {
    for (int e = kMinEnemies; e <= kMaxEnemies; ++e) {
      const bool easy = t == 0 && e <= 3;
      const bool medium = (t == 0 && e >= 4) || (t == 1 && e <= 2);
      const bool hard = t == 1 && e >= 3;
      ASSERT_EQ(easy + medium + hard, 1) << t << "," << e;
      for (int b = kMinBullets; b <= kMaxBullets; ++b) {
        EXPECT_EQ(classify_difficulty(game(EnemyType(t), e, b)), expected.at({t, e}));
      }
    }
  }
}

TEST(ContentSpace, LevelCountsFollowRuleCells) {
  const std::size_t mazes = 972;
  std::map<DifficultyLevel, std::size_t> counts;
  for (const auto& g : enumerate_space(fake_mazes(mazes))) ++counts[classify_difficulty(g)];
  // Each rule cell holds bullets x mazes games: 3, 4 and 3 cells.
  const std::size_t per_cell = (kMaxBullets - kMinBullets + 1) * mazes;
  EXPECT_EQ(counts[DifficultyLevel::Easy], 3 * per_cell);
  EXPECT_EQ(counts[DifficultyLevel::Medium], 4 * per_cell);
  EXPECT_EQ(counts[DifficultyLevel::Hard], 3 * per_cell);
  EXPECT_EQ(counts[DifficultyLevel::Easy] + counts[DifficultyLevel::Medium] +
                counts[DifficultyLevel::Hard],
            48600u);
}

TEST(ContentSpace, VectorizeCorridorExample) {
  const auto v = vectorize(game(EnemyType::Smart, 2, 3), corridor());
  const FeatureVector expected{1, 2, 3, 5, 0, 0, 2, 0.4};
  EXPECT_EQ(v, expected);
}

TEST(ContentSpace, VectorizeSharesMazeCoordinates) {
  const auto a = vectorize(game(EnemyType::Smart, 2, 3), corridor());
  const auto b = vectorize(game(EnemyType::RandomMove, 5, 1), corridor());
  for (std::size_t d = 3; d < kFeatureDim; ++d) EXPECT_EQ(a[d], b[d]);
}

TEST(ContentSpace, VectorizeRejectsForeignMaze) {
  EXPECT_THROW(vectorize(game(EnemyType::Smart, 2, 3, "MZ00002"), corridor()),
               MazeFeatureMismatch);
}

TEST(Normalize, Examples) {
  const auto one_dim = [](std::vector<double> values) {
    std::vector<FeatureVector> vs;
    for (double v : values) {
      FeatureVector f{};
      f[0] = v;
      vs.push_back(f);
    }
    std::vector<double> out;
    for (const auto& f : normalize(vs)) out.push_back(f[0]);
    return out;
  };
  EXPECT_EQ(one_dim({1, 5}), (std::vector<double>{0, 1}));
  EXPECT_EQ(one_dim({2, 2, 2}), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(one_dim({1, 2, 3}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_THROW(normalize({FeatureVector{}}), InsufficientData);
}

TEST(Normalize, RoundTripAndRange) {
  std::vector<FeatureVector> vs;
  const auto mazes = fake_mazes(20);
  for (const auto& g : enumerate_space(mazes)) {
    vs.push_back(vectorize(g, mazes[std::stoul(g.maze_id.substr(2)) - 1]));
  }
  const auto scaler = MinMaxScaler::fit(vs);
  for (const auto& v : vs) {
    const auto n = scaler.transform(v);
    const auto back = scaler.inverse(n);
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      ASSERT_GE(n[d], 0.0);
      ASSERT_LE(n[d], 1.0);
      ASSERT_NEAR(back[d], v[d], 1e-9);
    }
  }
}

TEST(ContentSpace, MazeStoreRoundTrip) {
  const auto mazes = generate_mazes(5, 11, 11, 99);
  std::stringstream io;
  write_maze_store(io, mazes);
  EXPECT_EQ(read_maze_store(io), mazes);
}

TEST(ContentSpace, SpaceCsvRoundTrip) {
  const auto mazes = fake_mazes(3);
  std::vector<SpaceRow> rows;
  for (const auto& g : enumerate_space(mazes)) {
    rows.push_back({g, classify_difficulty(g), mazes[std::stoul(g.maze_id.substr(2)) - 1].features});
  }
  std::stringstream io;
  write_space_csv(io, rows);
  const auto back = read_space_csv(io);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].game, rows[i].game);
    EXPECT_EQ(back[i].difficulty, rows[i].difficulty);
    EXPECT_EQ(back[i].features, rows[i].features);
  }
}

TEST(ContentSpace, GeneratedMazesAreDeterministic) {
  const auto a = generate_mazes(4, 9, 9, 7);
  const auto b = generate_mazes(4, 9, 9, 7);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0].maze_id, "MZ00001");
  EXPECT_NE(a[0].cells, a[1].cells);
}
