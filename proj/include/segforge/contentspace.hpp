#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "segforge/maze.hpp"

namespace segforge {

enum class DifficultyLevel : int { Easy = 0, Medium = 1, Hard = 2 };
inline constexpr std::array<DifficultyLevel, 3> kDifficultyLevels{
    DifficultyLevel::Easy, DifficultyLevel::Medium, DifficultyLevel::Hard};

std::string_view to_string(DifficultyLevel level);
DifficultyLevel parse_difficulty(std::string_view text);

enum class EnemyType : int { RandomMove = 0, Smart = 1 };

inline constexpr int kMinEnemies = 1;
inline constexpr int kMaxEnemies = 5;
inline constexpr int kMinBullets = 1;
inline constexpr int kMaxBullets = 5;

struct GameParams {
  std::string game_id;
  std::string maze_id;
  EnemyType enemy_type = EnemyType::RandomMove;
  int total_enemy = 1;
  int total_bullets = 1;

  bool operator==(const GameParams&) const = default;
};

std::string make_game_id(std::string_view maze_id, EnemyType type, int enemies, int bullets);

// Everything about a maze the later stages need; the grid itself is
// reproducible from (seed, width, height).
struct MazeRecord {
  std::string maze_id;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  MazeFeatures features;

  bool operator==(const MazeRecord&) const = default;
};

MazeRecord summarize_maze(const MazeGrid& maze);

inline constexpr std::size_t kFeatureDim = 8;
// [enemy_type, total_enemy, total_bullets, total_path, total_corners,
//  total_intersections, total_deadend, complexity]
using FeatureVector = std::array<double, kFeatureDim>;
inline constexpr std::array<std::string_view, kFeatureDim> kFeatureNames{
    "enemy_type",    "total_enemy",   "total_bullets",       "total_path",
    "total_corners", "total_intersections", "total_deadend", "complexity"};

std::string format_maze_id(std::size_t index);

// `count` mazes with ids MZ00001.. and per-maze seeds derived from base_seed.
std::vector<MazeGrid> generate_mazes(std::size_t count, int width, int height,
                                     std::uint64_t base_seed);

// maze x enemy_type x total_enemy x total_bullets. Throws EmptyMazeSet.
std::vector<GameParams> enumerate_space(const std::vector<MazeRecord>& mazes);

DifficultyLevel classify_difficulty(const GameParams& p);

// Throws MazeFeatureMismatch when `maze` is not p.maze_id.
FeatureVector vectorize(const GameParams& p, const MazeRecord& maze);

// Per-dimension min-max scaling. Constant dimensions map to 0 and invert to
// the stored minimum.
class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  MinMaxScaler(FeatureVector mins, FeatureVector maxs) : mins_(mins), maxs_(maxs) {}

  // Throws InsufficientData for fewer than two vectors.
  static MinMaxScaler fit(const std::vector<FeatureVector>& vectors);

  FeatureVector transform(const FeatureVector& v) const;
  FeatureVector inverse(const FeatureVector& v) const;
  std::vector<FeatureVector> transform(const std::vector<FeatureVector>& vs) const;

  const FeatureVector& mins() const { return mins_; }
  const FeatureVector& maxs() const { return maxs_; }

  bool operator==(const MinMaxScaler&) const = default;

 private:
  FeatureVector mins_{};
  FeatureVector maxs_{};
};

std::vector<FeatureVector> normalize(const std::vector<FeatureVector>& vectors);

// Maze store: one JSON object per line with maze_id, seed, width, height,
// run-length-encoded cells and the extracted features.
void write_maze_store(std::ostream& out, const std::vector<MazeGrid>& mazes);
std::vector<MazeGrid> read_maze_store(std::istream& in);

// Space export with header
// game_id,maze_id,enemy_type,total_enemy,total_bullets,difficulty,<5 features>.
struct SpaceRow {
  GameParams game;
  DifficultyLevel difficulty = DifficultyLevel::Easy;
  MazeFeatures features;
};

void write_space_csv(std::ostream& out, const std::vector<SpaceRow>& rows);
std::vector<SpaceRow> read_space_csv(std::istream& in);

}  // namespace segforge
