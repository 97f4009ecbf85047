#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "library_fixture.hpp"
#include "segforge/engine.hpp"
#include "segforge/error.hpp"
#include "segforge/rng.hpp"

using namespace segforge;

namespace {

const LibraryIndex& fixture_index() {
  static const LibraryIndex index(test::small_library());
  return index;
}

PoolEntry entry(std::string id, std::vector<double> f) { return PoolEntry{std::move(id), std::move(f)}; }

// Brute-force scan: pool mean, then the nearest member, lower id on ties.
std::string nearest_to_pool_mean(const std::vector<PoolEntry>& pool) {
  std::vector<double> mean(pool.front().features.size(), 0.0);
  for (const auto& e : pool) {
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += e.features[d];
  }
  for (auto& m : mean) m /= double(pool.size());
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& e : pool) {
    double d = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) d += (e.features[i] - mean[i]) * (e.features[i] - mean[i]);
    if (d < best_d || (d == best_d && e.game_id < best)) {
      best_d = d;
      best = e.game_id;
    }
  }
  return best;
}

}  // namespace

TEST(Score, Examples) {
  EXPECT_EQ(score(ActionTally{{5}, {2}, {1.0}, {1.0}}), 3.0);
  EXPECT_EQ(score(ActionTally{{3, 4}, {2}, {2.0, 1.0}, {0.5}}), 9.0);
  EXPECT_EQ(score(ActionTally{{3, 4}, {}, {2.0, 1.0}, {}}), 10.0);
}

TEST(Score, WeightLengthMismatch) {
  EXPECT_THROW(score(ActionTally{{1, 2}, {1}, {1.0}, {1.0}}), WeightLengthMismatch);
  EXPECT_THROW(score(ActionTally{{1}, {1}, {1.0}, {1.0, 2.0}}), WeightLengthMismatch);
}

TEST(Score, LinearInTallies) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    ActionTally a{{}, {}, {}, {}}, b;
    for (int i = 0; i < 3; ++i) {
      a.positives.push_back(std::int64_t(rng.index(20)));
      a.negatives.push_back(std::int64_t(rng.index(20)));
      a.alpha.push_back(double(rng.index(5)));
      a.beta.push_back(double(rng.index(5)));
    }
    b = a;
    for (auto& v : b.positives) v = std::int64_t(rng.index(20));
    for (auto& v : b.negatives) v = std::int64_t(rng.index(20));
    ActionTally sum = a;
    for (int i = 0; i < 3; ++i) {
      sum.positives[i] += b.positives[i];
      sum.negatives[i] += b.negatives[i];
    }
    ASSERT_DOUBLE_EQ(score(sum), score(a) + score(b));
  }
}

TEST(AssessLevel, HalfOpenBoundaries) {
  const ScoreThresholds th{4.0, 19.0};
  EXPECT_EQ(assess_level(4.0, th), DifficultyLevel::Medium);
  EXPECT_EQ(assess_level(std::nextafter(4.0, 0.0), th), DifficultyLevel::Easy);
  EXPECT_EQ(assess_level(19.0, th), DifficultyLevel::Hard);
  EXPECT_EQ(assess_level(std::nextafter(19.0, 0.0), th), DifficultyLevel::Medium);
  EXPECT_EQ(assess_level(-100.0, th), DifficultyLevel::Easy);
}

TEST(AssessLevel, MonotoneAndValidated) {
  const ScoreThresholds th{-1.5, 2.5};
  DifficultyLevel prev = DifficultyLevel::Easy;
  for (double s = -10.0; s <= 10.0; s += 0.25) {
    const auto level = assess_level(s, th);
    ASSERT_GE(static_cast<int>(level), static_cast<int>(prev));
    prev = level;
  }
  EXPECT_THROW(assess_level(0.0, ScoreThresholds{3.0, 3.0}), ConfigInvalid);
}

TEST(SelectGame, CentroidExample) {
  const std::vector<PoolEntry> pool{entry("a", {0, 0}), entry("b", {2, 2}), entry("c", {5, 5})};
  EXPECT_EQ(select_game(pool), "b");
}

TEST(SelectGame, SingletonAndTies) {
  EXPECT_EQ(select_game({entry("only", {0.3, 0.7})}), "only");
  EXPECT_EQ(select_game({entry("g2", {1, 0}), entry("g1", {-1, 0})}), "g1");
  EXPECT_THROW(select_game({}), EmptyPool);
}

TEST(SelectGame, MatchesBruteForceAndIgnoresOrder) {
  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    std::vector<PoolEntry> pool;
    const std::size_t n = 1 + rng.index(30);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> f(kFeatureDim);
      // Coarse grid values so exact ties occur.
      for (auto& v : f) v = 0.25 * double(rng.index(5));
      pool.push_back(entry("G" + std::to_string(1000 + rng.index(9000)) + "_" + std::to_string(i), f));
    }
    const auto expected = nearest_to_pool_mean(pool);
    ASSERT_EQ(select_game(pool), expected);
    std::reverse(pool.begin(), pool.end());
    ASSERT_EQ(select_game(pool), expected);
  }
}

TEST(CandidatePool, MembersMinusPlayed) {
  const auto& index = fixture_index();
  const auto cluster = index.cluster_for(1, DifficultyLevel::Medium);
  const auto& members = index.members(cluster);
  auto pool = candidate_pool(index, 1, DifficultyLevel::Medium, {});
  EXPECT_EQ(pool.size(), members.size());
  const std::set<std::string> played{members.front()};
  pool = candidate_pool(index, 1, DifficultyLevel::Medium, played);
  EXPECT_EQ(pool.size(), members.size() - 1);
  for (const auto& e : pool) EXPECT_NE(e.game_id, members.front());
  const std::set<std::string> all(members.begin(), members.end());
  EXPECT_THROW(candidate_pool(index, 1, DifficultyLevel::Medium, all), EmptyPool);
  EXPECT_THROW(candidate_pool(index, 42, DifficultyLevel::Medium, {}), UnknownMaterial);
}

TEST(NextMaterial, NewPlayerStartsAtOne) {
  PlayerProfile p;
  p.next_material_index = 3;
  EXPECT_EQ(next_material(p, 3), 1);
  p.session_history.emplace_back();
  EXPECT_EQ(next_material(p, 3), 3);
  p.next_material_index = 4;
  EXPECT_THROW(next_material(p, 3), CurriculumComplete);
}

TEST(Bot, DeterministicPerSeed) {
  const auto& index = fixture_index();
  const auto& g = index.library().games[17].params;
  const auto maze = index.maze_grid(g.maze_id);
  for (auto policy : {BotPolicy::Random, BotPolicy::Greedy}) {
    EXPECT_EQ(bot_simulate(g, maze, policy, 5), bot_simulate(g, maze, policy, 5));
  }
}

TEST(Bot, DurationCappedAndScoreConsistent) {
  const auto& index = fixture_index();
  const auto maze = index.maze_grid(index.library().mazes[0].maze_id);
  for (std::size_t i = 0; i < index.library().games.size(); ++i) {
    const auto& g = index.library().games[i].params;
    for (auto policy : {BotPolicy::Random, BotPolicy::Greedy}) {
      const auto r = bot_simulate(g, maze, policy, i);
      ASSERT_GE(r.duration, 0);
      ASSERT_LE(r.duration, kTimeLimitSeconds);
      ASSERT_EQ(r.score, score(r.tally));
      ASSERT_EQ(r.game, g);
      for (auto v : r.tally.positives) ASSERT_GE(v, 0);
      for (auto v : r.tally.negatives) ASSERT_GE(v, 0);
      if (r.outcome == Outcome::Victory) ASSERT_GE(r.tally.positives[0], kCorrectAtomsToOpenExit);
      for (std::size_t e = 1; e < r.log.size(); ++e) ASSERT_LE(r.log[e - 1].tick, r.log[e].tick);
    }
  }
}

TEST(Bot, RejectsForeignMaze) {
  const auto& index = fixture_index();
  auto g = index.library().games[0].params;
  g.maze_id = "MZ09999";
  EXPECT_THROW(bot_simulate(g, index.maze_grid("MZ00001"), BotPolicy::Greedy, 1),
               MazeFeatureMismatch);
}

TEST(Bot, GreedyOutscoresRandomOnEasyGames) {
  const auto mazes = generate_mazes(20, 21, 21, 11);
  double greedy = 0.0, random = 0.0;
  int runs = 0;
  for (std::size_t m = 0; m < mazes.size(); ++m) {
    for (int enemies = 1; enemies <= 3; ++enemies) {
      for (int bullets : {1, 3, 5}) {
        const auto& id = mazes[m].maze_id;
        const GameParams g{make_game_id(id, EnemyType::RandomMove, enemies, bullets), id,
                           EnemyType::RandomMove, enemies, bullets};
        ASSERT_EQ(classify_difficulty(g), DifficultyLevel::Easy);
        greedy += bot_simulate(g, mazes[m], BotPolicy::Greedy, runs).score;
        random += bot_simulate(g, mazes[m], BotPolicy::Random, runs).score;
        ++runs;
      }
    }
  }
  ASSERT_GE(runs, 100);
  EXPECT_GT(greedy / runs, random / runs);
}

TEST(Practice, ReassessesMastery) {
  const auto& index = fixture_index();
  PlayerProfile p;
  p.player_id = "P1";
  ScoringConfig scoring;
  scoring.thresholds = {-1e9, -1e8};  // everything is Hard
  auto [hard, rec] = practice_session(p, index, BotPolicy::Random, 1, scoring);
  EXPECT_EQ(hard.mastery, DifficultyLevel::Hard);
  EXPECT_EQ(rec.compound_id, 0);
  EXPECT_EQ(hard.practice_history.size(), 1u);
  EXPECT_TRUE(hard.session_history.empty());
  scoring.thresholds = {1e8, 1e9};  // everything is Easy
  auto [easy, rec2] = practice_session(hard, index, BotPolicy::Random, 1, scoring);
  EXPECT_EQ(easy.mastery, DifficultyLevel::Easy);
  EXPECT_EQ(rec2.game.enemy_type, EnemyType::RandomMove);
}

TEST(Session, ServesUnplayedClusterMembers) {
  const auto& index = fixture_index();
  PlayerProfile p;
  p.player_id = "P1";
  p.mastery = DifficultyLevel::Medium;
  std::set<std::string> served;
  for (std::uint64_t s = 0; s < 50; ++s) {
    std::pair<PlayerProfile, SessionRecord> r;
    try {
      r = run_session(p, index, BotPolicy::Random, s);
    } catch (const EmptyPool&) {
      // Defeats repeat the material until its cluster is exhausted.
      const auto& members = index.members(index.cluster_for(next_material(p, 3), p.mastery));
      for (const auto& m : members) EXPECT_TRUE(p.played_game_ids.contains(m));
      return;
    }
    const auto& rec = r.second;
    const auto& members = index.members(index.cluster_for(rec.compound_id, rec.difficulty));
    EXPECT_NE(std::find(members.begin(), members.end(), rec.game_id), members.end());
    EXPECT_TRUE(served.insert(rec.game_id).second) << "served twice: " << rec.game_id;
    EXPECT_EQ(rec.game_id, rec.game.game_id);
    p = std::move(r.first);
  }
  FAIL() << "random bot never exhausted a pool";
}

TEST(Session, RecycleClearsThePlayedSet) {
  const auto& index = fixture_index();
  PlayerProfile p;
  p.player_id = "P1";
  p.mastery = DifficultyLevel::Hard;
  SessionOptions opts;
  opts.recycle = true;
  const auto& first_cluster = index.members(index.cluster_for(1, DifficultyLevel::Hard));
  int recycled = 0;
  std::set<std::string> since_recycle;
  for (std::uint64_t s = 0; s < 40; ++s) {
    auto [next, rec] = run_session(p, index, BotPolicy::Random, s, opts);
    if (rec.recycled_pool) {
      ++recycled;
      since_recycle.clear();
    }
    EXPECT_TRUE(since_recycle.insert(rec.game_id).second);
    p = std::move(next);
  }
  EXPECT_GT(recycled, 0);
  EXPECT_EQ(first_cluster.size(), 2u);
}

TEST(Session, VictoryAdvancesMaterial) {
  const auto& index = fixture_index();
  PlayerProfile p;
  p.player_id = "P1";
  SessionOptions opts;
  opts.recycle = true;
  int previous = 1;
  for (std::uint64_t s = 0; s < 200; ++s) {
    int material = 0;
    try {
      material = next_material(p, index.material_count());
    } catch (const CurriculumComplete&) {
      break;
    }
    auto [next, rec] = run_session(p, index, BotPolicy::Greedy, s, opts);
    EXPECT_EQ(rec.compound_id, material);
    EXPECT_EQ(next.next_material_index,
              rec.outcome == Outcome::Victory ? material + 1 : material);
    previous = next.next_material_index;
    p = std::move(next);
  }
  EXPECT_GE(previous, 1);
}

TEST(SessionLog, JsonShapes) {
  const auto& index = fixture_index();
  PlayerProfile p;
  p.player_id = "P7";
  auto [next, rec] = run_session(p, index, BotPolicy::Greedy, 3);
  const auto summary = session_summary_json(rec);
  EXPECT_NE(summary.find("\"player_id\":\"P7\""), std::string::npos);
  EXPECT_NE(summary.find("\"game_id\":\"" + rec.game_id + "\""), std::string::npos);
  const auto events = session_events_jsonl(rec, 0);
  EXPECT_EQ(static_cast<std::size_t>(std::count(events.begin(), events.end(), '\n')), rec.log.size());
}
