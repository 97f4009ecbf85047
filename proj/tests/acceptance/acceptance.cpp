// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "segforge/birch.hpp"
#include "segforge/clustering.hpp"
#include "segforge/config.hpp"
#include "segforge/contentspace.hpp"
#include "segforge/engine.hpp"
#include "segforge/error.hpp"
#include "segforge/knowledge.hpp"
#include "segforge/library_store.hpp"
#include "segforge/pipeline.hpp"
#include "segforge/rng.hpp"
#include "segforge/stats.hpp"
#include "segforge/text.hpp"

using namespace segforge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const fs::path kData = SEGFORGE_TEST_DATA_DIR;
fs::path g_work;

const PeriodicTable& table() {
  static const PeriodicTable t = PeriodicTable::load((kData / "periodic_table.txt").string());
  return t;
}

PipelineConfig default_config() {
  return PipelineConfig::load(kData / ".." / "config" / "default.cfg");
}

// ---- 1 -------------------------------------------------------------------
std::string annotation_fidelity() {
  const auto spec = parse_compound("CO2|carbon dioxide|1 C|2 O", table());
  const auto t0 = Clock::now();
  const auto a = annotate(spec, table());
  const double elapsed = seconds_since(t0);
  check(a.atom_1_number == 6 && a.atom_2_number == 8 && a.total_types_of_atom == 2 &&
            a.total_atom == 3 && a.total_character_symbol_1 == 1 && a.total_character_symbol_2 == 1,
        "CO2 annotation differs");
  check(elapsed < 1e-3, "annotate took " + std::to_string(elapsed) + " s");
  return "CO2 -> (6, 8, 2, 3, 1, 1) in " + format_fixed(elapsed * 1e6, 1) + " us";
}

// ---- 2 -------------------------------------------------------------------
std::string ordering_fidelity() {
  std::vector<CompoundAnnotation> annotations;
  for (const auto& s : load_compounds((kData / "compounds.txt").string(), table())) {
    annotations.push_back(annotate(s, table()));
  }
  const auto ordered = order_compounds(std::move(annotations));
  check(ordered.size() == 100, "dataset has " + std::to_string(ordered.size()) + " compounds");
  std::map<std::string, int> id;
  for (const auto& a : ordered) id[a.formula] = a.compound_id;
  check(id.at("H2") == 1, "compound_id(H2) = " + std::to_string(id.at("H2")));
  check(id.at("CaB6") == 100, "compound_id(CaB6) = " + std::to_string(id.at("CaB6")));
  return "compound_id(H2)=1, compound_id(CaB6)=100";
}

// ---- 3 -------------------------------------------------------------------
std::string space_size() {
  const auto cfg = default_config();
  std::vector<MazeRecord> mazes;
  for (const auto& g : generate_mazes(972, cfg.maze_width, cfg.maze_height, cfg.space_seed)) {
    mazes.push_back(summarize_maze(g));
  }
  const auto space = enumerate_space(mazes);
  check(space.size() == 48600, "space has " + std::to_string(space.size()) + " configurations");

  // Truth table: each (enemy_type, total_enemy) cell satisfies exactly one rule.
  std::map<DifficultyLevel, std::size_t> rule_cells;
  for (int t = 0; t <= 1; ++t) {
    for (int e = kMinEnemies; e <= kMaxEnemies; ++e) {
      const bool easy = t == 0 && e <= 3;
      const bool medium = (t == 0 && e >= 4) || (t == 1 && e <= 2);
      const bool hard = t == 1 && e >= 3;
      check(easy + medium + hard == 1, "rules overlap or leave a gap");
      const auto level = easy ? DifficultyLevel::Easy
                              : medium ? DifficultyLevel::Medium : DifficultyLevel::Hard;
      const GameParams g{"x", "x", EnemyType(t), e, 1};
      check(classify_difficulty(g) == level, "classifier disagrees with the rule table");
      ++rule_cells[level];
    }
  }
  std::map<DifficultyLevel, std::size_t> counts;
  for (const auto& g : space) ++counts[classify_difficulty(g)];
  const std::size_t per_cell = std::size_t(kMaxBullets - kMinBullets + 1) * mazes.size();
  std::string detail;
  for (auto level : kDifficultyLevels) {
    check(counts[level] == per_cell * rule_cells[level],
          std::string(to_string(level)) + " has " + std::to_string(counts[level]));
    detail += " " + std::string(to_string(level)) + "=" + std::to_string(counts[level]);
  }
  return "48600 configurations;" + detail + " (5 bullets x 972 mazes x rule cells)";
}

// ---- 4 -------------------------------------------------------------------
using Partition = std::set<std::set<std::size_t>>;

Partition medoid_oracle(const PointSet& ps, std::size_t k) {
  const std::size_t n = ps.size();
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  double best = std::numeric_limits<double>::infinity();
  Partition best_partition;
  while (true) {
    double cost = 0.0;
    std::vector<std::set<std::size_t>> groups(k);
    for (std::size_t p = 0; p < n; ++p) {
      std::size_t arg = 0;
      double d_best = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < k; ++m) {
        const double d = distance(ps[p], ps[pick[m]]);
        if (d < d_best) {
          d_best = d;
          arg = m;
        }
      }
      cost += d_best;
      groups[arg].insert(p);
    }
    if (cost < best) {
      best = cost;
      best_partition = Partition(groups.begin(), groups.end());
    }
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best_partition;
}

PointSet blobs(std::uint64_t seed, std::size_t k, std::size_t per_blob) {
  Rng rng(seed);
  std::vector<std::vector<double>> centres;
  while (centres.size() < k) {
    std::vector<double> c(kFeatureDim);
    for (auto& v : c) v = 0.1 + 0.8 * rng.uniform();
    bool far = true;
    for (const auto& o : centres) far = far && distance(c, o) > 0.6;
    if (far) centres.push_back(c);
  }
  PointSet ps(kFeatureDim);
  for (std::size_t i = 0; i < per_blob; ++i) {
    for (const auto& c : centres) {
      auto p = c;
      for (auto& v : p) v += 0.03 * (rng.uniform() - 0.5);
      ps.push_back(p);
    }
  }
  return ps;
}

std::string birch_correctness() {
  BirchConfig cfg;
  cfg.k_target = 4;
  cfg.threshold_grid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ps = blobs(seed, 4, 8);
    const auto t0 = Clock::now();
    const auto result = search_threshold(ps, cfg);
    slowest = std::max(slowest, seconds_since(t0));
    Partition got;
    for (const auto& c : result.clusters) got.emplace(c.members.begin(), c.members.end());
    check(got == medoid_oracle(ps, 4), "blob layout " + std::to_string(seed) + " differs from oracle");
  }
  check(slowest < 1.0, "search took " + std::to_string(slowest) + " s");

  Rng meta(424242);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + meta.index(8);
    const std::size_t branching = 2 + meta.index(4);
    const double threshold = 0.005 + 0.3 * meta.uniform();
    const std::size_t n = 1 + meta.index(150);
    Rng rng(derive_seed(17, trial));
    CFTree tree(dim, branching, threshold);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p(dim);
      for (auto& v : p) v = rng.uniform();
      tree.insert(p, i);
    }
    const auto problem = tree.audit();
    check(problem.empty(), "insertion sequence " + std::to_string(trial) + ": " + problem);
  }
  return "20 blob layouts match the exhaustive oracle (slowest " + format_fixed(slowest * 1e3, 2) +
         " ms); 1000 random CF-trees pass the audit";
}

// ---- 5 -------------------------------------------------------------------
double textbook_silhouette(const PointSet& ps, const std::vector<std::int64_t>& labels) {
  const std::set<std::int64_t> distinct(labels.begin(), labels.end());
  double total = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::map<std::int64_t, std::pair<double, std::size_t>> acc;
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (j == i) continue;
      auto& [sum, cnt] = acc[labels[j]];
      sum += distance(ps[i], ps[j]);
      ++cnt;
    }
    const auto own = acc.find(labels[i]);
    const double a = own == acc.end() ? 0.0 : own->second.first / double(own->second.second);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, sc] : acc) {
      if (label != labels[i]) b = std::min(b, sc.first / double(sc.second));
    }
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / double(ps.size());
}

std::string silhouette_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(199);
    const std::size_t k = 2 + rng.index(std::min<std::size_t>(n - 1, 10));
    PointSet ps(kFeatureDim);
    std::vector<std::int64_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p(kFeatureDim);
      for (auto& v : p) v = rng.uniform();
      ps.push_back(p);
      labels[i] = std::int64_t(i < k ? i : rng.index(k));
    }
    const double diff =
        std::abs(sampled_silhouette(ps, labels, 2000, 7) - textbook_silhouette(ps, labels));
    worst = std::max(worst, diff);
  }
  check(worst <= 1e-9, "max deviation " + std::to_string(worst));

  // Pipeline log: every grid T scored within [-1, 1] and the argmax chosen.
  std::istringstream log(read_file(g_work / "run1" / artifact::kThresholdSearch));
  std::string line;
  std::getline(log, line);
  std::map<std::string, std::pair<double, double>> best;  // level -> (silhouette, T)
  std::map<std::string, std::size_t> rows;
  while (std::getline(log, line)) {
    const auto f = split_fields(line, ',');
    check(f.size() == 4 && !f[3].empty(), "threshold " + f[1] + " for " + f[0] + " has no silhouette");
    const double s = parse_double(f[3]);
    check(s >= -1.0 && s <= 1.0, "silhouette out of range: " + line);
    ++rows[f[0]];
    auto it = best.find(f[0]);
    if (it == best.end() || s > it->second.first) best[f[0]] = {s, parse_double(f[1])};
  }
  const auto meta = load(g_work / "run1" / artifact::kLibrary).metadata;
  const std::size_t grid = default_config().birch.threshold_grid.size();
  std::string detail;
  for (auto level : kDifficultyLevels) {
    const std::string name(to_string(level));
    check(rows[name] == grid, name + " logged " + std::to_string(rows[name]) + " thresholds");
    check(parse_double(meta.at("threshold." + name)) == best[name].second,
          name + " did not select the argmax threshold");
    detail += " " + name + ":T=" + format_double(best[name].second) + ",s=" +
              format_fixed(best[name].first, 3);
  }
  std::ostringstream dev;
  dev << worst;
  return "100 random sets within " + dev.str() + " of the O(n^2) definition;" + detail;
}

// ---- 6 -------------------------------------------------------------------
double g_run1_seconds = 0.0;

std::string mapping_structure() {
  const auto dir = g_work / "run1";
  fs::remove_all(dir);
  StageOptions opts;
  opts.work_dir = dir;
  opts.export_plots = true;
  const auto t0 = Clock::now();
  run_pipeline(default_config(), opts);
  g_run1_seconds = seconds_since(t0);
  check(g_run1_seconds < 300.0, "pipeline took " + std::to_string(g_run1_seconds) + " s");

  const auto lib = load(dir / artifact::kLibrary);
  check(lib.clusters.size() == 300, std::to_string(lib.clusters.size()) + " clusters");
  std::map<DifficultyLevel, std::size_t> per_level;
  std::map<std::int64_t, const ClusterRecord*> by_id;
  for (const auto& c : lib.clusters) {
    ++per_level[c.difficulty];
    by_id[c.cluster_id] = &c;
  }
  for (auto level : kDifficultyLevels) {
    check(per_level[level] == 100, std::string(to_string(level)) + " has " +
                                       std::to_string(per_level[level]) + " clusters");
  }
  std::map<int, std::size_t> entries;
  std::map<DifficultyLevel, std::set<std::int64_t>> used;
  std::map<DifficultyLevel, std::map<int, std::size_t>> n_by_compound;
  for (const auto& e : lib.mapping) {
    ++entries[e.compound_id];
    const auto* c = by_id.at(e.cluster_id);
    check(c->difficulty == e.difficulty, "mapping crosses levels");
    check(used[e.difficulty].insert(e.cluster_id).second, "cluster mapped twice");
    n_by_compound[e.difficulty][e.compound_id] = c->n;
  }
  check(entries.size() == 100, std::to_string(entries.size()) + " compounds mapped");
  for (const auto& [id, count] : entries) {
    check(count == 3, "compound " + std::to_string(id) + " has " + std::to_string(count) + " entries");
  }
  for (auto level : kDifficultyLevels) {
    check(used[level].size() == 100, "level is not a bijection");
    std::size_t prev = 0;
    for (const auto& [id, n] : n_by_compound[level]) {
      check(n >= prev, "N decreases at compound " + std::to_string(id));
      prev = n;
    }
  }
  return "300 clusters (100/level), 3 entries per compound, bijective, N non-decreasing; " +
         format_fixed(g_run1_seconds, 1) + " s";
}

// ---- 7 -------------------------------------------------------------------
std::string nearest_to_mean(const std::vector<std::pair<std::string, FeatureVector>>& pool) {
  std::vector<double> mean(kFeatureDim, 0.0);
  for (const auto& [id, f] : pool) {
    for (std::size_t d = 0; d < kFeatureDim; ++d) mean[d] += f[d];
  }
  for (auto& m : mean) m /= double(pool.size());
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, f] : pool) {
    double d = 0.0;
    for (std::size_t i = 0; i < kFeatureDim; ++i) d += (f[i] - mean[i]) * (f[i] - mean[i]);
    if (d < best_d || (d == best_d && id < best)) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

std::string engine_contracts() {
  const LibraryIndex index(load(g_work / "run1" / artifact::kLibrary));
  const auto& lib = index.library();
  std::map<std::pair<int, DifficultyLevel>, std::int64_t> mapping;
  for (const auto& e : lib.mapping) mapping[{e.compound_id, e.difficulty}] = e.cluster_id;
  std::map<std::int64_t, std::vector<std::string>> members;
  for (const auto& m : lib.membership) members[m.cluster_id].push_back(m.game_id);

  const auto cfg = default_config();
  SessionOptions options{true, cfg.scoring};
  std::size_t sessions = 0, recycles = 0, victories = 0;
  std::set<DifficultyLevel> levels_seen;
  for (std::size_t player = 0; sessions < 1000; ++player) {
    PlayerProfile p;
    p.player_id = "A" + std::to_string(player);
    const auto policy = player % 3 == 0 ? BotPolicy::Random : BotPolicy::Greedy;
    p = practice_session(std::move(p), index, policy, derive_seed(5, player), cfg.scoring).first;
    // Served games since the last recycle of each cluster.
    std::map<std::int64_t, std::set<std::string>> served;
    for (int s = 0; s < 100 && sessions < 1000; ++s) {
      int material = 0;
      try {
        material = next_material(p, index.material_count());
      } catch (const CurriculumComplete&) {
        break;
      }
      const auto cluster = mapping.at({material, p.mastery});
      std::vector<std::pair<std::string, FeatureVector>> pool;
      for (const auto& id : members.at(cluster)) {
        if (!p.played_game_ids.contains(id)) pool.emplace_back(id, index.features(id));
      }
      if (pool.empty()) {
        for (const auto& id : members.at(cluster)) pool.emplace_back(id, index.features(id));
      }
      const auto expected = nearest_to_mean(pool);

      auto [next, rec] = run_session(p, index, policy, derive_seed(player, s), options);
      ++sessions;
      levels_seen.insert(rec.difficulty);
      check(rec.game_id == expected, "select_game chose " + rec.game_id + ", scan chose " + expected);
      const auto& m = members.at(cluster);
      check(std::find(m.begin(), m.end(), rec.game_id) != m.end(),
            rec.game_id + " is not in cluster(E, V)");
      if (rec.recycled_pool) {
        ++recycles;
        served[cluster].clear();
      }
      check(served[cluster].insert(rec.game_id).second, rec.game_id + " served twice before recycle");
      check(rec.duration <= kTimeLimitSeconds, "session exceeded the time limit");
      p = std::move(next);
      if (rec.outcome == Outcome::Victory) {
        ++victories;
        p = practice_session(std::move(p), index, policy, derive_seed(player, 1000 + s), cfg.scoring).first;
      }
    }
  }
  return std::to_string(sessions) + " sessions, " + std::to_string(victories) + " victories, " +
         std::to_string(recycles) + " recycles, " + std::to_string(levels_seen.size()) +
         " mastery levels; no repeats, all in cluster(E, V), selection == brute-force scan";
}

// ---- 8 -------------------------------------------------------------------
std::string statistics_fidelity() {
  const auto two = proportion_ztest(352, 540, 0.5, Alternative::TwoSided);
  const auto greater = proportion_ztest(352, 540, 0.5, Alternative::Greater);
  const auto less = proportion_ztest(352, 540, 0.5, Alternative::Less);
  check(std::abs(two.z - 7.06) <= 0.01, "z = " + std::to_string(two.z));
  check(format_p_value(two.p_value) == "0.00000", "p rendered " + format_p_value(two.p_value));
  check(two.h0_rejected && greater.h0_rejected && !less.h0_rejected, "rejection pattern differs");

  std::ifstream in(kData / "survey_reports.jsonl");
  const auto reports = read_survey_reports(in);
  std::vector<OutcomePair> pairs;
  for (const auto& r : reports) {
    if (r.pre == 0) pairs.push_back({r.fun, r.post == 1});
  }
  const auto t = crosstab(pairs);
  check(t == (ContingencyTable2x2{154, 48, 65, 42}), "crosstab differs");
  return "z=" + format_fixed(two.z, 4) + ", p=" + format_p_value(two.p_value) +
         ", rejected/rejected/not rejected, crosstab {154, 48, 65, 42}";
}

// ---- 9 -------------------------------------------------------------------
std::string end_to_end_determinism() {
  const auto dir = g_work / "run2";
  fs::remove_all(dir);
  StageOptions opts;
  opts.work_dir = dir;
  opts.export_plots = true;
  const auto t0 = Clock::now();
  run_pipeline(default_config(), opts);
  const double total = g_run1_seconds + seconds_since(t0);
  const auto h1 = sha256_hex(read_file(g_work / "run1" / artifact::kLibrary));
  const auto h2 = sha256_hex(read_file(dir / artifact::kLibrary));
  check(h1 == h2, "library hashes differ: " + h1 + " vs " + h2);
  check(total < 600.0, "two runs took " + std::to_string(total) + " s");
  return "library sha256 " + h1.substr(0, 16) + "... identical across runs; " +
         format_fixed(total, 1) + " s for both";
}

}  // namespace

int main(int argc, char** argv) {
  g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "segforge_acceptance";
  fs::create_directories(g_work);

  // Criterion 6 produces the library that 5 and 7 inspect, so it runs first;
  // the report is printed in criterion order.
  const std::vector<std::pair<int, std::pair<std::string, std::function<std::string()>>>> order{
      {6, {"mapping structure", mapping_structure}},
      {1, {"annotation fidelity", annotation_fidelity}},
      {2, {"ordering fidelity", ordering_fidelity}},
      {3, {"space size", space_size}},
      {4, {"BIRCH correctness", birch_correctness}},
      {5, {"silhouette oracle", silhouette_oracle}},
      {7, {"engine contracts", engine_contracts}},
      {8, {"statistics fidelity", statistics_fidelity}},
      {9, {"end-to-end determinism", end_to_end_determinism}},
  };
  std::map<int, std::string> lines;
  int failures = 0;
  for (const auto& [id, test] : order) {
    const auto& [name, fn] = test;
    std::string status = "PASS", detail;
    try {
      detail = fn();
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = e.what();
      ++failures;
    }
    lines[id] = "[" + status + "] " + std::to_string(id) + ". " + name + ": " + detail;
    std::cerr << lines[id] << '\n';
  }
  for (const auto& [id, line] : lines) std::cout << line << '\n';
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all 9 criteria passed")
            << '\n';
  return failures;
}
