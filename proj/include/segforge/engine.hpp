#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "segforge/contentspace.hpp"
#include "segforge/mapping.hpp"
#include "segforge/maze.hpp"

namespace segforge {

// Per-session action counts and their weights:
// score = sum(alpha_i * positives_i) - sum(beta_i * negatives_i).
struct ActionTally {
  std::vector<std::int64_t> positives;
  std::vector<std::int64_t> negatives;
  std::vector<double> alpha;
  std::vector<double> beta;

  bool operator==(const ActionTally&) const = default;
};

// Throws WeightLengthMismatch when a weight vector and its counts differ in
// length.
double score(const ActionTally& tally);

struct ScoreThresholds {
  double easy_medium = 0.0;
  double medium_hard = 0.0;
};

// [, easy_medium) -> Easy, [easy_medium, medium_hard) -> Medium,
// [medium_hard, ) -> Hard.
DifficultyLevel assess_level(double s, const ScoreThresholds& thresholds);

struct ScoringConfig {
  std::vector<double> alpha{1.0, 1.0, 1.0};
  std::vector<double> beta{1.0, 1.0, 1.0};
  // Calibrated against the bundled bots on the practice game: the random bot
  // lands in Easy, the greedy bot straddles Medium and Hard.
  ScoreThresholds thresholds{4.0, 19.0};
};

enum class Outcome { Victory, Defeat };
std::string_view to_string(Outcome outcome);

enum class BotPolicy { Random, Greedy };
std::string_view to_string(BotPolicy policy);
BotPolicy parse_policy(std::string_view text);

struct SessionEvent {
  int tick = 0;
  std::string type;
  int x = 0;
  int y = 0;

  bool operator==(const SessionEvent&) const = default;
};

struct SessionRecord {
  std::string player_id;
  int compound_id = 0;
  DifficultyLevel difficulty = DifficultyLevel::Easy;
  std::string game_id;
  GameParams game;
  ActionTally tally;
  double score = 0.0;
  Outcome outcome = Outcome::Defeat;
  int duration = 0;
  bool recycled_pool = false;
  std::vector<SessionEvent> log;

  bool operator==(const SessionRecord&) const = default;
};

std::string session_summary_json(const SessionRecord& record);
// One line per event, tagged with the player and session index.
std::string session_events_jsonl(const SessionRecord& record, std::size_t session_index);

struct PlayerProfile {
  std::string player_id;
  DifficultyLevel mastery = DifficultyLevel::Easy;
  int next_material_index = 1;
  std::set<std::string> played_game_ids;
  std::vector<SessionRecord> session_history;
  std::vector<SessionRecord> practice_history;

  bool is_new() const { return session_history.empty(); }
};

// Read-only lookup structure over a content library, shared between
// sessions.
class LibraryIndex {
 public:
  explicit LibraryIndex(ContentLibrary library);

  const ContentLibrary& library() const { return library_; }
  std::size_t material_count() const { return library_.compounds.size(); }

  // Throws UnknownMaterial.
  std::int64_t cluster_for(int compound_id, DifficultyLevel level) const;
  const std::vector<std::string>& members(std::int64_t cluster_id) const;
  const GameRecord& game(const std::string& game_id) const;
  const MazeRecord& maze(const std::string& maze_id) const;
  MazeGrid maze_grid(const std::string& maze_id) const;
  const MinMaxScaler& scaler() const { return scaler_; }
  // Min-max normalized feature vector of a library game.
  FeatureVector features(const std::string& game_id) const;

 private:
  ContentLibrary library_;
  MinMaxScaler scaler_;
  std::unordered_map<std::string, std::size_t> game_pos_;
  std::unordered_map<std::string, std::size_t> maze_pos_;
  std::unordered_map<std::int64_t, std::vector<std::string>> members_;
  std::unordered_map<std::int64_t, std::int64_t> mapping_;  // compound*3+level -> cluster
};

struct PoolEntry {
  std::string game_id;
  std::vector<double> features;
};

// Members of cluster(E, V) not yet played. Throws UnknownMaterial, and
// EmptyPool when every member has been played.
std::vector<PoolEntry> candidate_pool(const LibraryIndex& index, int compound_id,
                                      DifficultyLevel level,
                                      const std::set<std::string>& played);

// The pool member nearest to the pool's own centroid; ties go to the lower
// game_id. Throws EmptyPool.
std::string select_game(const std::vector<PoolEntry>& pool);

// Throws CurriculumComplete when every material has been passed.
int next_material(const PlayerProfile& profile, std::size_t material_count);

// Headless play of one game. One tick is one simulated second; the session
// ends on Victory (ten correct atoms, then the exit), on losing every life,
// or at the 90 second limit. Deterministic per (game, maze, policy, seed).
SessionRecord bot_simulate(const GameParams& game, const MazeGrid& maze, BotPolicy policy,
                           std::uint64_t seed, const ScoringConfig& scoring = {});

inline constexpr int kTimeLimitSeconds = 90;
inline constexpr int kCorrectAtomsToOpenExit = 10;

// Fixed practice game carrying dummy learning material: random-move
// enemies, two of them, three bullets, on the library's first maze.
GameParams practice_game(const LibraryIndex& index);

// Plays the practice game and re-assesses the player's mastery level.
std::pair<PlayerProfile, SessionRecord> practice_session(PlayerProfile profile,
                                                         const LibraryIndex& index,
                                                         BotPolicy policy, std::uint64_t seed,
                                                         const ScoringConfig& scoring = {});

struct SessionOptions {
  bool recycle = false;
  ScoringConfig scoring;
};

// next_material -> candidate_pool -> select_game -> bot_simulate, then
// records the game as played. A Victory advances to the next material.
std::pair<PlayerProfile, SessionRecord> run_session(PlayerProfile profile,
                                                    const LibraryIndex& index, BotPolicy policy,
                                                    std::uint64_t seed,
                                                    const SessionOptions& options = {});

}  // namespace segforge
