#include "segforge/engine.hpp"

#include <algorithm>
#include <limits>

#include <nlohmann/json.hpp>

#include "segforge/error.hpp"
#include "segforge/rng.hpp"
#include "segforge/text.hpp"

namespace segforge {

double score(const ActionTally& t) {
  if (t.alpha.size() != t.positives.size() || t.beta.size() != t.negatives.size()) {
    throw WeightLengthMismatch("tally has " + std::to_string(t.positives.size()) + "/" +
                               std::to_string(t.negatives.size()) + " actions but " +
                               std::to_string(t.alpha.size()) + "/" +
                               std::to_string(t.beta.size()) + " weights");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < t.positives.size(); ++i) {
    s += t.alpha[i] * static_cast<double>(t.positives[i]);
  }
  for (std::size_t i = 0; i < t.negatives.size(); ++i) {
    s -= t.beta[i] * static_cast<double>(t.negatives[i]);
  }
  return s;
}

DifficultyLevel assess_level(double s, const ScoreThresholds& th) {
  if (!(th.easy_medium < th.medium_hard)) {
    throw ConfigInvalid("score thresholds must be strictly increasing");
  }
  if (s < th.easy_medium) return DifficultyLevel::Easy;
  if (s < th.medium_hard) return DifficultyLevel::Medium;
  return DifficultyLevel::Hard;
}

std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::Victory ? "Victory" : "Defeat";
}

std::string_view to_string(BotPolicy policy) {
  return policy == BotPolicy::Random ? "random" : "greedy";
}

BotPolicy parse_policy(std::string_view text) {
  if (text == "random") return BotPolicy::Random;
  if (text == "greedy") return BotPolicy::Greedy;
  throw ConfigInvalid("unknown bot policy '" + std::string(text) + "'");
}

std::string session_summary_json(const SessionRecord& r) {
  nlohmann::ordered_json j;
  j["player_id"] = r.player_id;
  j["compound_id"] = r.compound_id;
  j["difficulty"] = to_string(r.difficulty);
  j["game_id"] = r.game_id;
  j["maze_id"] = r.game.maze_id;
  j["enemy_type"] = static_cast<int>(r.game.enemy_type);
  j["total_enemy"] = r.game.total_enemy;
  j["total_bullets"] = r.game.total_bullets;
  j["positives"] = r.tally.positives;
  j["negatives"] = r.tally.negatives;
  j["alpha"] = r.tally.alpha;
  j["beta"] = r.tally.beta;
  j["score"] = r.score;
  j["outcome"] = to_string(r.outcome);
  j["duration"] = r.duration;
  j["recycled_pool"] = r.recycled_pool;
  j["events"] = r.log.size();
  return j.dump();
}

std::string session_events_jsonl(const SessionRecord& r, std::size_t session_index) {
  std::string out;
  for (const auto& e : r.log) {
    nlohmann::ordered_json j;
    j["player_id"] = r.player_id;
    j["session"] = session_index;
    j["tick"] = e.tick;
    j["event"] = e.type;
    j["payload"] = {{"x", e.x}, {"y", e.y}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& f : split_fields(text, ',')) out.push_back(parse_double(f));
  return out;
}

std::int64_t mapping_key(int compound_id, DifficultyLevel level) {
  return static_cast<std::int64_t>(compound_id) * 3 + static_cast<int>(level);
}

}  // namespace

LibraryIndex::LibraryIndex(ContentLibrary library) : library_(std::move(library)) {
  canonicalize(library_);
  for (std::size_t i = 0; i < library_.games.size(); ++i) {
    game_pos_.emplace(library_.games[i].params.game_id, i);
  }
  for (std::size_t i = 0; i < library_.mazes.size(); ++i) {
    maze_pos_.emplace(library_.mazes[i].maze_id, i);
  }
  for (const auto& m : library_.membership) members_[m.cluster_id].push_back(m.game_id);
  for (const auto& e : library_.mapping) {
    mapping_[mapping_key(e.compound_id, e.difficulty)] = e.cluster_id;
  }

  const auto lo = library_.metadata.find(kMetaScalerMin);
  const auto hi = library_.metadata.find(kMetaScalerMax);
  if (lo != library_.metadata.end() && hi != library_.metadata.end()) {
    const auto mins = parse_double_list(lo->second);
    const auto maxs = parse_double_list(hi->second);
    if (mins.size() != kFeatureDim || maxs.size() != kFeatureDim) {
      throw CorruptStore("library scaler metadata has the wrong dimension");
    }
    FeatureVector a{}, b{};
    std::copy(mins.begin(), mins.end(), a.begin());
    std::copy(maxs.begin(), maxs.end(), b.begin());
    scaler_ = MinMaxScaler(a, b);
  } else if (library_.games.size() >= 2) {
    std::vector<FeatureVector> raw;
    raw.reserve(library_.games.size());
    for (const auto& g : library_.games) raw.push_back(vectorize(g.params, maze(g.params.maze_id)));
    scaler_ = MinMaxScaler::fit(raw);
  }
}

std::int64_t LibraryIndex::cluster_for(int compound_id, DifficultyLevel level) const {
  const auto it = mapping_.find(mapping_key(compound_id, level));
  if (it == mapping_.end()) {
    throw UnknownMaterial("no " + std::string(to_string(level)) + " cluster for compound " +
                          std::to_string(compound_id));
  }
  return it->second;
}

const std::vector<std::string>& LibraryIndex::members(std::int64_t cluster_id) const {
  static const std::vector<std::string> kEmpty;
  const auto it = members_.find(cluster_id);
  return it == members_.end() ? kEmpty : it->second;
}

const GameRecord& LibraryIndex::game(const std::string& game_id) const {
  const auto it = game_pos_.find(game_id);
  if (it == game_pos_.end()) throw IntegrityViolation("unknown game " + game_id);
  return library_.games[it->second];
}

const MazeRecord& LibraryIndex::maze(const std::string& maze_id) const {
  const auto it = maze_pos_.find(maze_id);
  if (it == maze_pos_.end()) throw IntegrityViolation("unknown maze " + maze_id);
  return library_.mazes[it->second];
}

MazeGrid LibraryIndex::maze_grid(const std::string& maze_id) const {
  const auto& m = maze(maze_id);
  return generate_maze(m.seed, m.width, m.height, m.maze_id);
}

FeatureVector LibraryIndex::features(const std::string& game_id) const {
  const auto& g = game(game_id);
  return scaler_.transform(vectorize(g.params, maze(g.params.maze_id)));
}

std::vector<PoolEntry> candidate_pool(const LibraryIndex& index, int compound_id,
                                      DifficultyLevel level,
                                      const std::set<std::string>& played) {
  const auto cluster = index.cluster_for(compound_id, level);
  std::vector<PoolEntry> pool;
  for (const auto& id : index.members(cluster)) {
    if (played.contains(id)) continue;
    const auto f = index.features(id);
    pool.push_back(PoolEntry{id, std::vector<double>(f.begin(), f.end())});
  }
  if (pool.empty()) {
    throw EmptyPool("every game of cluster " + std::to_string(cluster) + " (compound " +
                    std::to_string(compound_id) + ", " + std::string(to_string(level)) +
                    ") has been played");
  }
  return pool;
}

std::string select_game(const std::vector<PoolEntry>& pool) {
  if (pool.empty()) throw EmptyPool("cannot select from an empty pool");
  // Sum in game_id order so the centroid does not depend on pool order.
  std::vector<const PoolEntry*> sorted;
  sorted.reserve(pool.size());
  for (const auto& e : pool) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const PoolEntry* a, const PoolEntry* b) { return a->game_id < b->game_id; });

  const std::size_t dim = sorted.front()->features.size();
  std::vector<double> centroid(dim, 0.0);
  for (const auto* e : sorted) {
    if (e->features.size() != dim) throw DimensionMismatch("pool vectors differ in dimension");
    for (std::size_t d = 0; d < dim; ++d) centroid[d] += e->features[d];
  }
  for (auto& c : centroid) c /= static_cast<double>(sorted.size());

  const PoolEntry* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto* e : sorted) {
    const double d = squared_distance(e->features, centroid);
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return best->game_id;
}

int next_material(const PlayerProfile& profile, std::size_t material_count) {
  const int e = profile.is_new() ? 1 : profile.next_material_index;
  if (e < 1 || static_cast<std::size_t>(e) > material_count) {
    throw CurriculumComplete("player " + profile.player_id + " has finished all " +
                             std::to_string(material_count) + " materials");
  }
  return e;
}

GameParams practice_game(const LibraryIndex& index) {
  if (index.library().mazes.empty()) throw IntegrityViolation("library has no mazes");
  const auto& maze_id = index.library().mazes.front().maze_id;
  return GameParams{make_game_id(maze_id, EnemyType::RandomMove, 2, 3), maze_id,
                    EnemyType::RandomMove, 2, 3};
}

std::pair<PlayerProfile, SessionRecord> practice_session(PlayerProfile profile,
                                                         const LibraryIndex& index,
                                                         BotPolicy policy, std::uint64_t seed,
                                                         const ScoringConfig& scoring) {
  const auto game = practice_game(index);
  auto record = bot_simulate(game, index.maze_grid(game.maze_id), policy, seed, scoring);
  record.player_id = profile.player_id;
  record.compound_id = 0;
  profile.mastery = assess_level(record.score, scoring.thresholds);
  record.difficulty = profile.mastery;
  profile.practice_history.push_back(record);
  return {std::move(profile), std::move(record)};
}

std::pair<PlayerProfile, SessionRecord> run_session(PlayerProfile profile,
                                                    const LibraryIndex& index, BotPolicy policy,
                                                    std::uint64_t seed,
                                                    const SessionOptions& options) {
  const int material = next_material(profile, index.material_count());
  const DifficultyLevel level = profile.mastery;

  bool recycled = false;
  std::vector<PoolEntry> pool;
  try {
    pool = candidate_pool(index, material, level, profile.played_game_ids);
  } catch (const EmptyPool&) {
    if (!options.recycle) throw;
    for (const auto& id : index.members(index.cluster_for(material, level))) {
      profile.played_game_ids.erase(id);
    }
    recycled = true;
    pool = candidate_pool(index, material, level, profile.played_game_ids);
  }

  const std::string game_id = select_game(pool);
  const auto& game = index.game(game_id).params;
  auto record = bot_simulate(game, index.maze_grid(game.maze_id), policy, seed, options.scoring);
  record.player_id = profile.player_id;
  record.compound_id = material;
  record.difficulty = level;
  record.recycled_pool = recycled;

  profile.played_game_ids.insert(game_id);
  profile.next_material_index =
      record.outcome == Outcome::Victory ? material + 1 : material;
  profile.session_history.push_back(record);
  return {std::move(profile), std::move(record)};
}

}  // namespace segforge
