#include "segforge/library_store.hpp"

#include <sqlite3.h>
#include <unistd.h>

#include <memory>

#include <nlohmann/json.hpp>

#include "segforge/error.hpp"
#include "segforge/text.hpp"

namespace segforge {

namespace {

constexpr const char* kSchema = R"sql(
PRAGMA page_size = 4096;
CREATE TABLE metadata(key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE compounds(
  compound_id INTEGER PRIMARY KEY,
  formula TEXT NOT NULL UNIQUE,
  atom_1_number INTEGER NOT NULL,
  atom_2_number INTEGER NOT NULL,
  total_types_of_atom INTEGER NOT NULL,
  total_atom INTEGER NOT NULL,
  total_character_symbol_1 INTEGER NOT NULL,
  total_character_symbol_2 INTEGER NOT NULL);
CREATE TABLE mazes(
  maze_id TEXT PRIMARY KEY,
  seed TEXT NOT NULL,
  width INTEGER NOT NULL,
  height INTEGER NOT NULL,
  total_path INTEGER NOT NULL,
  total_corners INTEGER NOT NULL,
  total_intersections INTEGER NOT NULL,
  total_deadend INTEGER NOT NULL,
  complexity REAL NOT NULL);
CREATE TABLE games(
  game_id TEXT PRIMARY KEY,
  maze_id TEXT NOT NULL REFERENCES mazes(maze_id),
  enemy_type INTEGER NOT NULL,
  total_enemy INTEGER NOT NULL,
  total_bullets INTEGER NOT NULL,
  difficulty TEXT NOT NULL);
CREATE TABLE clusters(
  cluster_id INTEGER PRIMARY KEY,
  difficulty TEXT NOT NULL,
  n INTEGER NOT NULL,
  s REAL NOT NULL,
  c0 REAL, c1 REAL, c2 REAL, c3 REAL, c4 REAL, c5 REAL, c6 REAL, c7 REAL);
CREATE TABLE membership(
  cluster_id INTEGER NOT NULL REFERENCES clusters(cluster_id),
  game_id TEXT NOT NULL REFERENCES games(game_id),
  PRIMARY KEY(cluster_id, game_id));
CREATE TABLE mapping(
  compound_id INTEGER NOT NULL REFERENCES compounds(compound_id),
  difficulty TEXT NOT NULL,
  cluster_id INTEGER NOT NULL REFERENCES clusters(cluster_id),
  UNIQUE(compound_id, difficulty),
  UNIQUE(difficulty, cluster_id));
)sql";

struct DbCloser {
  void operator()(sqlite3* db) const { sqlite3_close(db); }
};
struct StmtFinalizer {
  void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};
using Db = std::unique_ptr<sqlite3, DbCloser>;
using Stmt = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

template <typename E>
void check(sqlite3* db, int rc, const std::string& what) {
  if (rc != SQLITE_OK && rc != SQLITE_DONE && rc != SQLITE_ROW) {
    throw E(what + ": " + sqlite3_errmsg(db));
  }
}

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw Error(std::string("sqlite: ") + msg);
  }
}

Stmt prepare(sqlite3* db, const char* sql) {
  sqlite3_stmt* raw = nullptr;
  if (sqlite3_prepare_v2(db, sql, -1, &raw, nullptr) != SQLITE_OK) {
    throw CorruptStore(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
  }
  return Stmt(raw);
}

// Binds positional values and steps once.
class Inserter {
 public:
  Inserter(sqlite3* db, const char* sql) : db_(db), stmt_(prepare(db, sql)) {}

  Inserter& text(std::string_view v) {
    sqlite3_bind_text(stmt_.get(), ++col_, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Inserter& integer(long long v) {
    sqlite3_bind_int64(stmt_.get(), ++col_, v);
    return *this;
  }
  Inserter& real(double v) {
    sqlite3_bind_double(stmt_.get(), ++col_, v);
    return *this;
  }
  void run() {
    check<Error>(db_, sqlite3_step(stmt_.get()), "sqlite insert");
    sqlite3_reset(stmt_.get());
    sqlite3_clear_bindings(stmt_.get());
    col_ = 0;
  }

 private:
  sqlite3* db_;
  Stmt stmt_;
  int col_ = 0;
};

std::string col_text(sqlite3_stmt* s, int i) {
  const auto* p = sqlite3_column_text(s, i);
  return p ? reinterpret_cast<const char*>(p) : "";
}

template <typename Fn>
void each_row(sqlite3* db, const char* sql, Fn&& fn) {
  auto stmt = prepare(db, sql);
  int rc;
  while ((rc = sqlite3_step(stmt.get())) == SQLITE_ROW) fn(stmt.get());
  if (rc != SQLITE_DONE) throw CorruptStore(std::string("sqlite read: ") + sqlite3_errmsg(db));
}

}  // namespace

void persist(const ContentLibrary& library, const std::filesystem::path& path) {
  ContentLibrary lib = library;
  canonicalize(lib);
  validate(lib);

  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  std::filesystem::remove(tmp);
  {
    sqlite3* raw = nullptr;
    if (sqlite3_open_v2(tmp.c_str(), &raw, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) !=
        SQLITE_OK) {
      Db guard(raw);
      throw Error("cannot create " + tmp.string());
    }
    Db db(raw);
    exec(db.get(), kSchema);
    exec(db.get(), "BEGIN");

    Inserter meta(db.get(), "INSERT INTO metadata VALUES(?,?)");
    for (const auto& [k, v] : lib.metadata) meta.text(k).text(v).run();

    Inserter compounds(db.get(), "INSERT INTO compounds VALUES(?,?,?,?,?,?,?,?)");
    for (const auto& c : lib.compounds) {
      compounds.integer(c.compound_id)
          .text(c.formula)
          .integer(c.atom_1_number)
          .integer(c.atom_2_number)
          .integer(c.total_types_of_atom)
          .integer(c.total_atom)
          .integer(c.total_character_symbol_1)
          .integer(c.total_character_symbol_2)
          .run();
    }

    Inserter mazes(db.get(), "INSERT INTO mazes VALUES(?,?,?,?,?,?,?,?,?)");
    for (const auto& m : lib.mazes) {
      mazes.text(m.maze_id)
          .text(std::to_string(m.seed))
          .integer(m.width)
          .integer(m.height)
          .integer(m.features.total_path)
          .integer(m.features.total_corners)
          .integer(m.features.total_intersections)
          .integer(m.features.total_deadend)
          .real(m.features.complexity)
          .run();
    }

    Inserter games(db.get(), "INSERT INTO games VALUES(?,?,?,?,?,?)");
    for (const auto& g : lib.games) {
      games.text(g.params.game_id)
          .text(g.params.maze_id)
          .integer(static_cast<int>(g.params.enemy_type))
          .integer(g.params.total_enemy)
          .integer(g.params.total_bullets)
          .text(to_string(g.difficulty))
          .run();
    }

    Inserter clusters(db.get(), "INSERT INTO clusters VALUES(?,?,?,?,?,?,?,?,?,?,?,?)");
    for (const auto& c : lib.clusters) {
      if (c.centroid.size() != kFeatureDim) {
        throw IntegrityViolation("cluster " + std::to_string(c.cluster_id) +
                                 " centroid has wrong dimension");
      }
      clusters.integer(c.cluster_id)
          .text(to_string(c.difficulty))
          .integer(static_cast<long long>(c.n))
          .real(c.s);
      for (double v : c.centroid) clusters.real(v);
      clusters.run();
    }

    Inserter membership(db.get(), "INSERT INTO membership VALUES(?,?)");
    for (const auto& m : lib.membership) membership.integer(m.cluster_id).text(m.game_id).run();

    Inserter mapping(db.get(), "INSERT INTO mapping VALUES(?,?,?)");
    for (const auto& e : lib.mapping) {
      mapping.integer(e.compound_id).text(to_string(e.difficulty)).integer(e.cluster_id).run();
    }
    exec(db.get(), "COMMIT");
  }
  std::filesystem::rename(tmp, path);
}

ContentLibrary load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw CorruptStore("library file " + path.string() + " does not exist");
  }
  sqlite3* raw = nullptr;
  if (sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
    Db guard(raw);
    throw CorruptStore("cannot open library " + path.string());
  }
  Db db(raw);
  ContentLibrary lib;
  try {
    each_row(db.get(), "SELECT key, value FROM metadata ORDER BY key", [&](sqlite3_stmt* s) {
      lib.metadata.emplace(col_text(s, 0), col_text(s, 1));
    });
    each_row(db.get(), "SELECT * FROM compounds ORDER BY compound_id", [&](sqlite3_stmt* s) {
      CompoundAnnotation c;
      c.compound_id = sqlite3_column_int(s, 0);
      c.formula = col_text(s, 1);
      c.atom_1_number = sqlite3_column_int(s, 2);
      c.atom_2_number = sqlite3_column_int(s, 3);
      c.total_types_of_atom = sqlite3_column_int(s, 4);
      c.total_atom = sqlite3_column_int(s, 5);
      c.total_character_symbol_1 = sqlite3_column_int(s, 6);
      c.total_character_symbol_2 = sqlite3_column_int(s, 7);
      lib.compounds.push_back(std::move(c));
    });
    each_row(db.get(), "SELECT * FROM mazes ORDER BY maze_id", [&](sqlite3_stmt* s) {
      MazeRecord m;
      m.maze_id = col_text(s, 0);
      m.seed = std::stoull(col_text(s, 1));
      m.width = sqlite3_column_int(s, 2);
      m.height = sqlite3_column_int(s, 3);
      m.features.total_path = sqlite3_column_int(s, 4);
      m.features.total_corners = sqlite3_column_int(s, 5);
      m.features.total_intersections = sqlite3_column_int(s, 6);
      m.features.total_deadend = sqlite3_column_int(s, 7);
      m.features.complexity = sqlite3_column_double(s, 8);
      lib.mazes.push_back(std::move(m));
    });
    each_row(db.get(), "SELECT * FROM games ORDER BY game_id", [&](sqlite3_stmt* s) {
      GameRecord g;
      g.params.game_id = col_text(s, 0);
      g.params.maze_id = col_text(s, 1);
      g.params.enemy_type = static_cast<EnemyType>(sqlite3_column_int(s, 2));
      g.params.total_enemy = sqlite3_column_int(s, 3);
      g.params.total_bullets = sqlite3_column_int(s, 4);
      g.difficulty = parse_difficulty(col_text(s, 5));
      lib.games.push_back(std::move(g));
    });
    each_row(db.get(), "SELECT * FROM clusters ORDER BY cluster_id", [&](sqlite3_stmt* s) {
      ClusterRecord c;
      c.cluster_id = sqlite3_column_int64(s, 0);
      c.difficulty = parse_difficulty(col_text(s, 1));
      c.n = static_cast<std::size_t>(sqlite3_column_int64(s, 2));
      c.s = sqlite3_column_double(s, 3);
      for (int d = 0; d < static_cast<int>(kFeatureDim); ++d) {
        c.centroid.push_back(sqlite3_column_double(s, 4 + d));
      }
      lib.clusters.push_back(std::move(c));
    });
    each_row(db.get(), "SELECT cluster_id, game_id FROM membership ORDER BY cluster_id, game_id",
             [&](sqlite3_stmt* s) {
               lib.membership.push_back(MembershipRow{sqlite3_column_int64(s, 0), col_text(s, 1)});
             });
    each_row(db.get(), "SELECT compound_id, difficulty, cluster_id FROM mapping",
             [&](sqlite3_stmt* s) {
               lib.mapping.push_back(LibraryEntry{sqlite3_column_int(s, 0),
                                                  parse_difficulty(col_text(s, 1)),
                                                  sqlite3_column_int64(s, 2)});
             });
  } catch (const MalformedRecord& e) {
    throw CorruptStore(std::string("library ") + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptStore(std::string("library ") + path.string() + ": " + e.what());
  }
  canonicalize(lib);
  validate(lib);
  return lib;
}

std::string library_to_json(const ContentLibrary& library) {
  ContentLibrary lib = library;
  canonicalize(lib);
  nlohmann::ordered_json j;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : lib.metadata) j["metadata"][k] = v;
  auto& compounds = j["compounds"] = nlohmann::ordered_json::array();
  for (const auto& c : lib.compounds) {
    compounds.push_back({{"compound_id", c.compound_id},
                         {"formula", c.formula},
                         {"atom_1_number", c.atom_1_number},
                         {"atom_2_number", c.atom_2_number},
                         {"total_types_of_atom", c.total_types_of_atom},
                         {"total_atom", c.total_atom},
                         {"total_character_symbol_1", c.total_character_symbol_1},
                         {"total_character_symbol_2", c.total_character_symbol_2}});
  }
  auto& mazes = j["mazes"] = nlohmann::ordered_json::array();
  for (const auto& m : lib.mazes) {
    mazes.push_back({{"maze_id", m.maze_id},
                     {"seed", m.seed},
                     {"width", m.width},
                     {"height", m.height},
                     {"total_path", m.features.total_path},
                     {"total_corners", m.features.total_corners},
                     {"total_intersections", m.features.total_intersections},
                     {"total_deadend", m.features.total_deadend},
                     {"complexity", m.features.complexity}});
  }
  auto& games = j["games"] = nlohmann::ordered_json::array();
  for (const auto& g : lib.games) {
    games.push_back({{"game_id", g.params.game_id},
                     {"maze_id", g.params.maze_id},
                     {"enemy_type", static_cast<int>(g.params.enemy_type)},
                     {"total_enemy", g.params.total_enemy},
                     {"total_bullets", g.params.total_bullets},
                     {"difficulty", to_string(g.difficulty)}});
  }
  auto& clusters = j["clusters"] = nlohmann::ordered_json::array();
  for (const auto& c : lib.clusters) {
    clusters.push_back({{"cluster_id", c.cluster_id},
                        {"difficulty", to_string(c.difficulty)},
                        {"n", c.n},
                        {"s", c.s},
                        {"centroid", c.centroid}});
  }
  auto& membership = j["membership"] = nlohmann::ordered_json::array();
  for (const auto& m : lib.membership) {
    membership.push_back({{"cluster_id", m.cluster_id}, {"game_id", m.game_id}});
  }
  auto& mapping = j["mapping"] = nlohmann::ordered_json::array();
  for (const auto& e : lib.mapping) {
    mapping.push_back({{"compound_id", e.compound_id},
                       {"difficulty", to_string(e.difficulty)},
                       {"cluster_id", e.cluster_id}});
  }
  return j.dump(1) + "\n";
}

ContentLibrary library_from_json(std::string_view text) {
  ContentLibrary lib;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [k, v] : j.at("metadata").items()) lib.metadata[k] = v.get<std::string>();
    for (const auto& c : j.at("compounds")) {
      CompoundAnnotation a;
      a.compound_id = c.at("compound_id").get<int>();
      a.formula = c.at("formula").get<std::string>();
      a.atom_1_number = c.at("atom_1_number").get<int>();
      a.atom_2_number = c.at("atom_2_number").get<int>();
      a.total_types_of_atom = c.at("total_types_of_atom").get<int>();
      a.total_atom = c.at("total_atom").get<int>();
      a.total_character_symbol_1 = c.at("total_character_symbol_1").get<int>();
      a.total_character_symbol_2 = c.at("total_character_symbol_2").get<int>();
      lib.compounds.push_back(std::move(a));
    }
    for (const auto& m : j.at("mazes")) {
      MazeRecord r;
      r.maze_id = m.at("maze_id").get<std::string>();
      r.seed = m.at("seed").get<std::uint64_t>();
      r.width = m.at("width").get<int>();
      r.height = m.at("height").get<int>();
      r.features.total_path = m.at("total_path").get<int>();
      r.features.total_corners = m.at("total_corners").get<int>();
      r.features.total_intersections = m.at("total_intersections").get<int>();
      r.features.total_deadend = m.at("total_deadend").get<int>();
      r.features.complexity = m.at("complexity").get<double>();
      lib.mazes.push_back(std::move(r));
    }
    for (const auto& g : j.at("games")) {
      GameRecord r;
      r.params.game_id = g.at("game_id").get<std::string>();
      r.params.maze_id = g.at("maze_id").get<std::string>();
      r.params.enemy_type = static_cast<EnemyType>(g.at("enemy_type").get<int>());
      r.params.total_enemy = g.at("total_enemy").get<int>();
      r.params.total_bullets = g.at("total_bullets").get<int>();
      r.difficulty = parse_difficulty(g.at("difficulty").get<std::string>());
      lib.games.push_back(std::move(r));
    }
    for (const auto& c : j.at("clusters")) {
      ClusterRecord r;
      r.cluster_id = c.at("cluster_id").get<std::int64_t>();
      r.difficulty = parse_difficulty(c.at("difficulty").get<std::string>());
      r.n = c.at("n").get<std::size_t>();
      r.s = c.at("s").get<double>();
      r.centroid = c.at("centroid").get<std::vector<double>>();
      lib.clusters.push_back(std::move(r));
    }
    for (const auto& m : j.at("membership")) {
      lib.membership.push_back(
          MembershipRow{m.at("cluster_id").get<std::int64_t>(), m.at("game_id").get<std::string>()});
    }
    for (const auto& e : j.at("mapping")) {
      lib.mapping.push_back(LibraryEntry{e.at("compound_id").get<int>(),
                                         parse_difficulty(e.at("difficulty").get<std::string>()),
                                         e.at("cluster_id").get<std::int64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptStore(std::string("library JSON: ") + e.what());
  } catch (const MalformedRecord& e) {
    throw CorruptStore(std::string("library JSON: ") + e.what());
  }
  canonicalize(lib);
  validate(lib);
  return lib;
}

std::optional<std::string> check_config_hash(const ContentLibrary& library,
                                             std::string_view expected_hash) {
  const auto it = library.metadata.find(kMetaConfigHash);
  const std::string stored = it == library.metadata.end() ? std::string("<none>") : it->second;
  if (stored == expected_hash) return std::nullopt;
  return "library was built with config hash " + stored + ", current config hashes to " +
         std::string(expected_hash);
}

}  // namespace segforge
