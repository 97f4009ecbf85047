#include "segforge/mapping.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "segforge/error.hpp"
#include "segforge/text.hpp"

namespace segforge {

std::vector<ClusterSummary> sort_clusters(std::vector<ClusterSummary> clusters) {
  std::sort(clusters.begin(), clusters.end(), [](const ClusterSummary& a, const ClusterSummary& b) {
    if (a.n_games != b.n_games) return a.n_games < b.n_games;
    if (a.s_sum != b.s_sum) return a.s_sum > b.s_sum;
    return a.cluster_id < b.cluster_id;
  });
  return clusters;
}

std::vector<LibraryEntry> deploy(
    std::vector<CompoundAnnotation> compounds,
    const std::map<DifficultyLevel, std::vector<ClusterSummary>>& clusters_by_level) {
  std::sort(compounds.begin(), compounds.end(),
            [](const auto& a, const auto& b) { return a.compound_id < b.compound_id; });
  std::vector<LibraryEntry> entries;
  entries.reserve(compounds.size() * clusters_by_level.size());
  for (const auto& [level, clusters] : clusters_by_level) {
    if (clusters.size() != compounds.size()) {
      throw CardinalityMismatch(std::to_string(compounds.size()) + " compounds but " +
                                std::to_string(clusters.size()) + " " +
                                std::string(to_string(level)) + " clusters");
    }
  }
  std::map<DifficultyLevel, std::vector<ClusterSummary>> sorted;
  for (const auto& [level, clusters] : clusters_by_level) sorted[level] = sort_clusters(clusters);
  for (std::size_t j = 0; j < compounds.size(); ++j) {
    for (const auto& [level, clusters] : sorted) {
      entries.push_back(LibraryEntry{compounds[j].compound_id, level, clusters[j].cluster_id});
    }
  }
  return entries;
}

void canonicalize(ContentLibrary& lib) {
  std::sort(lib.compounds.begin(), lib.compounds.end(),
            [](const auto& a, const auto& b) { return a.compound_id < b.compound_id; });
  std::sort(lib.mazes.begin(), lib.mazes.end(),
            [](const auto& a, const auto& b) { return a.maze_id < b.maze_id; });
  std::sort(lib.games.begin(), lib.games.end(),
            [](const auto& a, const auto& b) { return a.params.game_id < b.params.game_id; });
  std::sort(lib.clusters.begin(), lib.clusters.end(),
            [](const auto& a, const auto& b) { return a.cluster_id < b.cluster_id; });
  std::sort(lib.membership.begin(), lib.membership.end(), [](const auto& a, const auto& b) {
    return std::tie(a.cluster_id, a.game_id) < std::tie(b.cluster_id, b.game_id);
  });
  std::sort(lib.mapping.begin(), lib.mapping.end(), [](const auto& a, const auto& b) {
    return std::tie(a.compound_id, a.difficulty) < std::tie(b.compound_id, b.difficulty);
  });
}

namespace {

[[noreturn]] void violation(const std::string& what) { throw IntegrityViolation(what); }

}  // namespace

void validate(const ContentLibrary& lib) {
  std::unordered_set<int> compound_ids;
  std::unordered_set<std::string> formulas;
  for (const auto& c : lib.compounds) {
    if (!compound_ids.insert(c.compound_id).second) {
      violation("duplicate compound_id " + std::to_string(c.compound_id));
    }
    if (!formulas.insert(c.formula).second) violation("duplicate compound formula " + c.formula);
  }

  std::unordered_set<std::string> maze_ids;
  for (const auto& m : lib.mazes) {
    if (!maze_ids.insert(m.maze_id).second) violation("duplicate maze_id " + m.maze_id);
  }

  std::unordered_map<std::string, DifficultyLevel> game_level;
  for (const auto& g : lib.games) {
    if (!maze_ids.contains(g.params.maze_id)) {
      violation("game " + g.params.game_id + " references unknown maze " + g.params.maze_id);
    }
    if (classify_difficulty(g.params) != g.difficulty) {
      violation("game " + g.params.game_id + " has inconsistent difficulty");
    }
    if (!game_level.emplace(g.params.game_id, g.difficulty).second) {
      violation("duplicate game_id " + g.params.game_id);
    }
  }

  std::unordered_map<std::int64_t, const ClusterRecord*> clusters;
  for (const auto& c : lib.clusters) {
    if (!clusters.emplace(c.cluster_id, &c).second) {
      violation("duplicate cluster_id " + std::to_string(c.cluster_id));
    }
  }

  std::unordered_map<std::int64_t, std::size_t> member_counts;
  std::unordered_set<std::string> clustered_games;
  for (const auto& row : lib.membership) {
    const auto c = clusters.find(row.cluster_id);
    if (c == clusters.end()) {
      violation("membership references unknown cluster " + std::to_string(row.cluster_id));
    }
    const auto g = game_level.find(row.game_id);
    if (g == game_level.end()) violation("membership references unknown game " + row.game_id);
    if (g->second != c->second->difficulty) {
      violation("game " + row.game_id + " sits in a cluster of another difficulty");
    }
    if (!clustered_games.insert(row.game_id).second) {
      violation("game " + row.game_id + " belongs to two clusters");
    }
    ++member_counts[row.cluster_id];
  }
  for (const auto& c : lib.clusters) {
    if (member_counts[c.cluster_id] != c.n) {
      violation("cluster " + std::to_string(c.cluster_id) + " has n=" + std::to_string(c.n) +
                " but " + std::to_string(member_counts[c.cluster_id]) + " members");
    }
  }

  std::set<std::pair<int, DifficultyLevel>> by_compound;
  std::set<std::pair<DifficultyLevel, std::int64_t>> by_cluster;
  for (const auto& e : lib.mapping) {
    if (!compound_ids.contains(e.compound_id)) {
      violation("mapping references unknown compound " + std::to_string(e.compound_id));
    }
    const auto c = clusters.find(e.cluster_id);
    if (c == clusters.end()) {
      violation("mapping references unknown cluster " + std::to_string(e.cluster_id));
    }
    if (c->second->difficulty != e.difficulty) {
      violation("mapping pairs compound " + std::to_string(e.compound_id) +
                " with a cluster of another difficulty");
    }
    if (!by_compound.emplace(e.compound_id, e.difficulty).second) {
      violation("compound " + std::to_string(e.compound_id) + " mapped twice at one level");
    }
    if (!by_cluster.emplace(e.difficulty, e.cluster_id).second) {
      violation("cluster " + std::to_string(e.cluster_id) + " mapped to two compounds");
    }
  }
  for (const auto& c : lib.compounds) {
    for (auto level : kDifficultyLevels) {
      if (!by_compound.contains({c.compound_id, level})) {
        violation("compound " + std::to_string(c.compound_id) + " has no " +
                  std::string(to_string(level)) + " cluster");
      }
    }
  }
}

std::string mapping_plot_csv(const ContentLibrary& lib, bool use_s) {
  std::unordered_map<std::int64_t, const ClusterRecord*> clusters;
  for (const auto& c : lib.clusters) clusters.emplace(c.cluster_id, &c);
  std::map<std::pair<int, DifficultyLevel>, std::int64_t> mapped;
  for (const auto& e : lib.mapping) mapped[{e.compound_id, e.difficulty}] = e.cluster_id;

  std::ostringstream out;
  out << "compound_id,formula,Easy,Medium,Hard\n";
  for (const auto& c : lib.compounds) {
    out << c.compound_id << ',' << c.formula;
    for (auto level : kDifficultyLevels) {
      const auto* cluster = clusters.at(mapped.at({c.compound_id, level}));
      out << ',' << (use_s ? format_double(cluster->s) : std::to_string(cluster->n));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace segforge
