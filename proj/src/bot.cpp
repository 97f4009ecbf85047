// Headless stand-in for the maze game: an avatar collects the correct atom
// ten times and walks out through the exit while enemies, wrong atoms and the
// clock get in the way.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "segforge/engine.hpp"
#include "segforge/error.hpp"
#include "segforge/rng.hpp"

namespace segforge {

namespace {

constexpr int kAvatarStepsPerSecond = 4;
constexpr int kStartLives = 3;
constexpr int kMaxLives = 5;
constexpr int kAmmoPerBullet = 3;
constexpr int kCorrectAtomsOnBoard = 3;
constexpr int kWrongAtomsOnBoard = 4;
constexpr int kXpPerLife = 5;
constexpr int kWeakSteps = 5 * kAvatarStepsPerSecond;
constexpr int kShotRange = 6;
constexpr int kSightRange = 4;
constexpr double kRandomShotChance = 0.15;
constexpr int kUnreachable = std::numeric_limits<int>::max();

enum Positive : std::size_t { kCorrectAtom, kAccurateShot, kWeakEnemyHit, kPositiveKinds };
enum Negative : std::size_t { kEnemyCollision, kWrongAtomHit, kMissedShot, kNegativeKinds };

constexpr std::array<GridPos, 4> kDirs{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

GridPos operator+(GridPos a, GridPos b) { return {a.x + b.x, a.y + b.y}; }

struct Enemy {
  GridPos pos;
  GridPos home;
  GridPos facing{1, 0};
  int weak_until = -1;
  bool weak(int step) const { return step < weak_until; }
};

enum class ActionKind { Move, Shoot, Wait };
struct Action {
  ActionKind kind = ActionKind::Wait;
  GridPos dir{0, 0};
};

class Simulation {
 public:
  Simulation(const GameParams& game, const MazeGrid& maze, BotPolicy policy, std::uint64_t seed)
      : game_(game), maze_(maze), policy_(policy), rng_(seed) {
    for (int y = 0; y < maze.height; ++y) {
      for (int x = 0; x < maze.width; ++x) {
        if (maze.is_path(x, y)) path_cells_.push_back({x, y});
      }
    }
    if (path_cells_.size() < 16) throw DimensionTooSmall("maze too small to play on");
    spawn_ = path_cells_.front();
    exit_ = path_cells_.back();
    avatar_ = spawn_;
    ammo_ = kAmmoPerBullet * game.total_bullets;
    place_enemies();
    for (int i = 0; i < kCorrectAtomsOnBoard; ++i) correct_.push_back(free_cell());
    for (int i = 0; i < kWrongAtomsOnBoard; ++i) wrong_.push_back(free_cell());
    potion_ = free_cell();
  }

  SessionRecord run(const ScoringConfig& scoring) {
    log("start");
    const int total_steps = kTimeLimitSeconds * kAvatarStepsPerSecond;
    for (step_ = 0; step_ < total_steps && !finished_; ++step_) {
      act(decide());
      if (finished_) break;
      if (step_ % 2 == 1) move_enemies();
    }
    if (!finished_) {
      outcome_ = Outcome::Defeat;
      step_ = total_steps - 1;
      log("timeout");
    }

    SessionRecord r;
    r.game_id = game_.game_id;
    r.game = game_;
    r.tally.positives.assign(positives_.begin(), positives_.end());
    r.tally.negatives.assign(negatives_.begin(), negatives_.end());
    r.tally.alpha = scoring.alpha;
    r.tally.beta = scoring.beta;
    r.score = score(r.tally);
    r.outcome = outcome_;
    r.duration = std::min(kTimeLimitSeconds, step_ / kAvatarStepsPerSecond + 1);
    r.log = std::move(log_);
    return r;
  }

 private:
  int tick() const { return std::min(kTimeLimitSeconds - 1, step_ / kAvatarStepsPerSecond); }

  void log(const char* type) { log_.push_back(SessionEvent{tick(), type, avatar_.x, avatar_.y}); }

  bool occupied(GridPos p) const {
    if (p == avatar_ || p == spawn_ || p == exit_) return true;
    if (potion_ && *potion_ == p) return true;
    const auto has = [&](const std::vector<GridPos>& v) {
      return std::find(v.begin(), v.end(), p) != v.end();
    };
    if (has(correct_) || has(wrong_)) return true;
    for (const auto& e : enemies_) {
      if (e.pos == p) return true;
    }
    return false;
  }

  GridPos free_cell() {
    for (int attempt = 0; attempt < 256; ++attempt) {
      const GridPos p = path_cells_[rng_.index(path_cells_.size())];
      if (std::abs(p.x - avatar_.x) + std::abs(p.y - avatar_.y) < 2) continue;
      if (!occupied(p)) return p;
    }
    for (const auto& p : path_cells_) {
      if (!occupied(p)) return p;
    }
    return exit_;
  }

  // Homes spread along the bottom-left to top-right diagonal.
  void place_enemies() {
    const int n = game_.total_enemy;
    for (int i = 0; i < n; ++i) {
      const double frac = static_cast<double>(i + 1) / static_cast<double>(n + 1);
      const double tx = 1.0 + frac * (maze_.width - 3);
      const double ty = (maze_.height - 2) - frac * (maze_.height - 3);
      GridPos best = path_cells_[1];
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& p : path_cells_) {
        if (p == spawn_ || p == exit_) continue;
        const double d = std::abs(p.x - tx) + std::abs(p.y - ty);
        if (d < best_d) {
          best_d = d;
          best = p;
        }
      }
      enemies_.push_back(Enemy{best, best});
    }
  }

  std::size_t cell(GridPos p) const { return static_cast<std::size_t>(p.y) * maze_.width + p.x; }

  // Multi-source BFS distances over path cells; blocked cells are not entered.
  std::vector<int> distances(const std::vector<GridPos>& sources,
                             const std::vector<bool>* blocked = nullptr) const {
    std::vector<int> dist(maze_.cells.size(), kUnreachable);
    std::deque<GridPos> q;
    for (const auto& s : sources) {
      if (dist[cell(s)] == 0) continue;
      dist[cell(s)] = 0;
      q.push_back(s);
    }
    while (!q.empty()) {
      const GridPos p = q.front();
      q.pop_front();
      for (const auto& d : kDirs) {
        const GridPos n = p + d;
        if (!maze_.is_path(n) || dist[cell(n)] != kUnreachable) continue;
        if (blocked && (*blocked)[cell(n)]) continue;
        dist[cell(n)] = dist[cell(p)] + 1;
        q.push_back(n);
      }
    }
    return dist;
  }

  std::optional<GridPos> downhill(GridPos from, const std::vector<int>& dist) const {
    std::optional<GridPos> best;
    int best_d = dist[cell(from)];
    for (const auto& d : kDirs) {
      const GridPos n = from + d;
      if (!maze_.is_path(n) || dist[cell(n)] >= best_d) continue;
      best_d = dist[cell(n)];
      best = d;
    }
    return best;
  }

  const Enemy* enemy_at(GridPos p) const {
    for (const auto& e : enemies_) {
      if (e.pos == p) return &e;
    }
    return nullptr;
  }

  bool has_wrong_atom(GridPos p) const {
    return std::find(wrong_.begin(), wrong_.end(), p) != wrong_.end();
  }

  Action decide() {
    if (policy_ == BotPolicy::Random) {
      if (ammo_ > 0 && rng_.chance(kRandomShotChance)) return {ActionKind::Shoot, facing_};
      std::array<GridPos, 4> open{};
      std::size_t n = 0;
      for (const auto& d : kDirs) {
        if (maze_.is_path(avatar_ + d)) open[n++] = d;
      }
      if (n == 0) return {};
      return {ActionKind::Move, open[rng_.index(n)]};
    }

    if (ammo_ > 0) {
      for (const auto& d : kDirs) {
        GridPos p = avatar_;
        for (int r = 0; r < kSightRange; ++r) {
          p = p + d;
          if (!maze_.is_path(p)) break;
          const Enemy* e = enemy_at(p);
          if (e && !e->weak(step_)) return {ActionKind::Shoot, d};
          if (e) break;
        }
      }
    }

    std::vector<GridPos> targets;
    if (collected_ >= kCorrectAtomsToOpenExit) {
      targets.push_back(exit_);
    } else {
      targets = correct_;
    }
    std::vector<bool> blocked(maze_.cells.size(), false);
    for (const auto& w : wrong_) blocked[cell(w)] = true;
    for (const auto& e : enemies_) {
      if (!e.weak(step_)) blocked[cell(e.pos)] = true;
    }
    for (const auto& t : targets) blocked[cell(t)] = false;
    blocked[cell(avatar_)] = false;

    auto dist = distances(targets, &blocked);
    if (dist[cell(avatar_)] == kUnreachable) dist = distances(targets);
    const auto dir = downhill(avatar_, dist);
    if (!dir) return {};
    const GridPos next = avatar_ + *dir;
    const Enemy* e = enemy_at(next);
    if (ammo_ > 0 && (has_wrong_atom(next) || (e && !e->weak(step_)))) {
      return {ActionKind::Shoot, *dir};
    }
    return {ActionKind::Move, *dir};
  }

  void act(const Action& a) {
    switch (a.kind) {
      case ActionKind::Wait:
        return;
      case ActionKind::Shoot:
        facing_ = a.dir;
        shoot(a.dir);
        return;
      case ActionKind::Move:
        facing_ = a.dir;
        avatar_ = avatar_ + a.dir;
        arrive();
        if (!finished_) check_enemy_contact();
        return;
    }
  }

  void gain_xp() {
    if (++xp_ < kXpPerLife) return;
    xp_ = 0;
    if (lives_ < kMaxLives) {
      ++lives_;
      log("extra_life");
    }
  }

  void shoot(GridPos dir) {
    if (ammo_ <= 0) return;
    --ammo_;
    GridPos p = avatar_;
    for (int r = 0; r < kShotRange; ++r) {
      p = p + dir;
      if (!maze_.is_path(p)) break;
      for (auto& e : enemies_) {
        if (e.pos != p) continue;
        e.weak_until = step_ + kWeakSteps;
        ++positives_[kAccurateShot];
        log("enemy_weakened");
        gain_xp();
        return;
      }
      for (auto* atoms : {&wrong_, &correct_}) {
        const auto it = std::find(atoms->begin(), atoms->end(), p);
        if (it == atoms->end()) continue;
        *it = free_cell();
        ++positives_[kAccurateShot];
        log("atom_shot");
        gain_xp();
        return;
      }
    }
    ++negatives_[kMissedShot];
    log("shot_missed");
  }

  void lose_life() {
    if (--lives_ <= 0) {
      lives_ = 0;
      finished_ = true;
      outcome_ = Outcome::Defeat;
      log("defeat");
    }
  }

  void arrive() {
    if (auto it = std::find(correct_.begin(), correct_.end(), avatar_); it != correct_.end()) {
      ++collected_;
      ++positives_[kCorrectAtom];
      log("correct_atom");
      *it = free_cell();
      if (collected_ == kCorrectAtomsToOpenExit) log("exit_open");
    }
    if (auto it = std::find(wrong_.begin(), wrong_.end(), avatar_); it != wrong_.end()) {
      ++negatives_[kWrongAtomHit];
      log("wrong_atom");
      *it = free_cell();
      lose_life();
      if (finished_) return;
    }
    if (potion_ && *potion_ == avatar_) {
      potion_.reset();
      lives_ = std::max(lives_, kStartLives);
      log("potion");
    }
    if (avatar_ == exit_ && collected_ >= kCorrectAtomsToOpenExit) {
      finished_ = true;
      outcome_ = Outcome::Victory;
      log("victory");
    }
  }

  void check_enemy_contact() {
    for (auto& e : enemies_) {
      if (e.pos != avatar_) continue;
      if (e.weak(step_)) {
        ++positives_[kWeakEnemyHit];
        log("weak_enemy_hit");
        gain_xp();
      } else {
        ++negatives_[kEnemyCollision];
        log("enemy_collision");
        lose_life();
      }
      e.pos = e.home;
      e.weak_until = -1;
      if (finished_) return;
    }
  }

  void move_enemies() {
    std::vector<int> to_avatar;
    for (auto& e : enemies_) {
      std::optional<GridPos> dir;
      if (game_.enemy_type == EnemyType::Smart && !e.weak(step_)) {
        if (to_avatar.empty()) to_avatar = distances({avatar_});
        dir = downhill(e.pos, to_avatar);
      } else {
        std::array<GridPos, 4> open{};
        std::size_t n = 0;
        const GridPos back{-e.facing.x, -e.facing.y};
        for (const auto& d : kDirs) {
          if (maze_.is_path(e.pos + d) && !(d == back)) open[n++] = d;
        }
        if (n == 0) {
          if (maze_.is_path(e.pos + back)) dir = back;
        } else {
          dir = open[rng_.index(n)];
        }
      }
      if (!dir) continue;
      e.pos = e.pos + *dir;
      e.facing = *dir;
    }
    check_enemy_contact();
  }

  const GameParams& game_;
  const MazeGrid& maze_;
  BotPolicy policy_;
  Rng rng_;

  std::vector<GridPos> path_cells_;
  GridPos spawn_;
  GridPos exit_;
  GridPos avatar_;
  GridPos facing_{1, 0};
  std::vector<Enemy> enemies_;
  std::vector<GridPos> correct_;
  std::vector<GridPos> wrong_;
  std::optional<GridPos> potion_;

  int step_ = 0;
  int lives_ = kStartLives;
  int ammo_ = 0;
  int xp_ = 0;
  int collected_ = 0;
  bool finished_ = false;
  Outcome outcome_ = Outcome::Defeat;
  std::array<std::int64_t, kPositiveKinds> positives_{};
  std::array<std::int64_t, kNegativeKinds> negatives_{};
  std::vector<SessionEvent> log_;
};

}  // namespace

SessionRecord bot_simulate(const GameParams& game, const MazeGrid& maze, BotPolicy policy,
                           std::uint64_t seed, const ScoringConfig& scoring) {
  if (game.maze_id != maze.maze_id) {
    throw MazeFeatureMismatch("game " + game.game_id + " is on maze " + game.maze_id +
                              ", simulator was given " + maze.maze_id);
  }
  Simulation sim(game, maze, policy, seed);
  return sim.run(scoring);
}

}  // namespace segforge
