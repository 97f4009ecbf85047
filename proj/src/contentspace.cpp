#include "segforge/contentspace.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "segforge/error.hpp"
#include "segforge/rng.hpp"
#include "segforge/text.hpp"

namespace segforge {

std::string_view to_string(DifficultyLevel level) {
  switch (level) {
    case DifficultyLevel::Easy: return "Easy";
    case DifficultyLevel::Medium: return "Medium";
    case DifficultyLevel::Hard: return "Hard";
  }
  return "?";
}

DifficultyLevel parse_difficulty(std::string_view text) {
  if (text == "Easy") return DifficultyLevel::Easy;
  if (text == "Medium") return DifficultyLevel::Medium;
  if (text == "Hard") return DifficultyLevel::Hard;
  throw MalformedRecord("unknown difficulty '" + std::string(text) + "'");
}

std::string make_game_id(std::string_view maze_id, EnemyType type, int enemies, int bullets) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-E%d-N%d-B%d", static_cast<int>(type), enemies, bullets);
  return std::string(maze_id) + buf;
}

MazeRecord summarize_maze(const MazeGrid& maze) {
  return MazeRecord{maze.maze_id, maze.seed, maze.width, maze.height, extract_features(maze)};
}

std::string format_maze_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "MZ%05zu", index + 1);
  return buf;
}

std::vector<MazeGrid> generate_mazes(std::size_t count, int width, int height,
                                     std::uint64_t base_seed) {
  std::vector<MazeGrid> mazes;
  mazes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    mazes.push_back(generate_maze(derive_seed(base_seed, i), width, height, format_maze_id(i)));
  }
  return mazes;
}

std::vector<GameParams> enumerate_space(const std::vector<MazeRecord>& mazes) {
  if (mazes.empty()) throw EmptyMazeSet("content space needs at least one maze");
  std::vector<GameParams> space;
  space.reserve(mazes.size() * 2 * kMaxEnemies * kMaxBullets);
  for (const auto& maze : mazes) {
    for (const auto type : {EnemyType::RandomMove, EnemyType::Smart}) {
      for (int enemies = kMinEnemies; enemies <= kMaxEnemies; ++enemies) {
        for (int bullets = kMinBullets; bullets <= kMaxBullets; ++bullets) {
          space.push_back(GameParams{make_game_id(maze.maze_id, type, enemies, bullets),
                                     maze.maze_id, type, enemies, bullets});
        }
      }
    }
  }
  return space;
}

DifficultyLevel classify_difficulty(const GameParams& p) {
  if (p.enemy_type == EnemyType::RandomMove) {
    return p.total_enemy <= 3 ? DifficultyLevel::Easy : DifficultyLevel::Medium;
  }
  return p.total_enemy <= 2 ? DifficultyLevel::Medium : DifficultyLevel::Hard;
}

FeatureVector vectorize(const GameParams& p, const MazeRecord& maze) {
  if (p.maze_id != maze.maze_id) {
    throw MazeFeatureMismatch("game " + p.game_id + " is on maze " + p.maze_id + ", not " +
                              maze.maze_id);
  }
  const auto& f = maze.features;
  return FeatureVector{static_cast<double>(p.enemy_type),
                       static_cast<double>(p.total_enemy),
                       static_cast<double>(p.total_bullets),
                       static_cast<double>(f.total_path),
                       static_cast<double>(f.total_corners),
                       static_cast<double>(f.total_intersections),
                       static_cast<double>(f.total_deadend),
                       f.complexity};
}

MinMaxScaler MinMaxScaler::fit(const std::vector<FeatureVector>& vectors) {
  if (vectors.size() < 2) throw InsufficientData("min-max scaling needs at least two vectors");
  FeatureVector mins = vectors.front();
  FeatureVector maxs = vectors.front();
  for (const auto& v : vectors) {
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      mins[d] = std::min(mins[d], v[d]);
      maxs[d] = std::max(maxs[d], v[d]);
    }
  }
  return MinMaxScaler(mins, maxs);
}

FeatureVector MinMaxScaler::transform(const FeatureVector& v) const {
  FeatureVector out{};
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    const double range = maxs_[d] - mins_[d];
    out[d] = range > 0.0 ? (v[d] - mins_[d]) / range : 0.0;
  }
  return out;
}

FeatureVector MinMaxScaler::inverse(const FeatureVector& v) const {
  FeatureVector out{};
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    out[d] = mins_[d] + v[d] * (maxs_[d] - mins_[d]);
  }
  return out;
}

std::vector<FeatureVector> MinMaxScaler::transform(const std::vector<FeatureVector>& vs) const {
  std::vector<FeatureVector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(transform(v));
  return out;
}

std::vector<FeatureVector> normalize(const std::vector<FeatureVector>& vectors) {
  return MinMaxScaler::fit(vectors).transform(vectors);
}

void write_maze_store(std::ostream& out, const std::vector<MazeGrid>& mazes) {
  for (const auto& m : mazes) {
    const auto f = extract_features(m);
    nlohmann::ordered_json j;
    j["maze_id"] = m.maze_id;
    j["seed"] = m.seed;
    j["width"] = m.width;
    j["height"] = m.height;
    j["cells"] = encode_cells(m);
    j["features"] = {{"total_path", f.total_path},
                     {"total_corners", f.total_corners},
                     {"total_intersections", f.total_intersections},
                     {"total_deadend", f.total_deadend},
                     {"complexity", f.complexity}};
    out << j.dump() << '\n';
  }
}

std::vector<MazeGrid> read_maze_store(std::istream& in) {
  std::vector<MazeGrid> mazes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MazeGrid m;
      m.maze_id = j.at("maze_id").get<std::string>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.width = j.at("width").get<int>();
      m.height = j.at("height").get<int>();
      m.cells = decode_cells(j.at("cells").get<std::string>(),
                             static_cast<std::size_t>(m.width) * m.height);
      mazes.push_back(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecord(std::string("bad maze store line: ") + e.what());
    }
  }
  return mazes;
}

void write_space_csv(std::ostream& out, const std::vector<SpaceRow>& rows) {
  out << "game_id,maze_id,enemy_type,total_enemy,total_bullets,difficulty,"
         "total_path,total_corners,total_intersections,total_deadend,complexity\n";
  for (const auto& r : rows) {
    out << r.game.game_id << ',' << r.game.maze_id << ',' << static_cast<int>(r.game.enemy_type)
        << ',' << r.game.total_enemy << ',' << r.game.total_bullets << ','
        << to_string(r.difficulty) << ',' << r.features.total_path << ','
        << r.features.total_corners << ',' << r.features.total_intersections << ','
        << r.features.total_deadend << ',' << format_double(r.features.complexity) << '\n';
  }
}

std::vector<SpaceRow> read_space_csv(std::istream& in) {
  std::vector<SpaceRow> rows;
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("game_id,maze_id,")) {
    throw MalformedRecord("space CSV is missing its header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 11) throw MalformedRecord("space CSV row has wrong arity: " + line);
    SpaceRow r;
    r.game.game_id = f[0];
    r.game.maze_id = f[1];
    r.game.enemy_type = static_cast<EnemyType>(parse_int(f[2]));
    r.game.total_enemy = parse_int(f[3]);
    r.game.total_bullets = parse_int(f[4]);
    r.difficulty = parse_difficulty(f[5]);
    r.features.total_path = parse_int(f[6]);
    r.features.total_corners = parse_int(f[7]);
    r.features.total_intersections = parse_int(f[8]);
    r.features.total_deadend = parse_int(f[9]);
    r.features.complexity = parse_double(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace segforge
