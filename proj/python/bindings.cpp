#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "segforge/clustering.hpp"
#include "segforge/config.hpp"
#include "segforge/contentspace.hpp"
#include "segforge/engine.hpp"
#include "segforge/error.hpp"
#include "segforge/knowledge.hpp"
#include "segforge/library_store.hpp"
#include "segforge/mapping.hpp"
#include "segforge/maze.hpp"
#include "segforge/pipeline.hpp"
#include "segforge/stats.hpp"

namespace py = pybind11;
using namespace segforge;

namespace {

PointSet to_points(const std::vector<std::vector<double>>& rows) {
  return PointSet::from_rows(rows, rows.empty() ? 0 : rows.front().size());
}

template <typename E>
void register_error(py::module_& m, const char* name, py::handle base) {
  py::register_exception<E>(m, name, base);
}

}  // namespace

PYBIND11_MODULE(_segforge, m) {
  m.doc() = "Content segmentation pipeline for educational maze games";

  auto base = py::register_exception<Error>(m, "SegforgeError", PyExc_RuntimeError);
#define SEGFORGE_ERROR(Name) register_error<Name>(m, #Name, base)
  SEGFORGE_ERROR(UnknownElement);
  SEGFORGE_ERROR(MalformedRecord);
  SEGFORGE_ERROR(DuplicateCompound);
  SEGFORGE_ERROR(DimensionTooSmall);
  SEGFORGE_ERROR(EmptyMazeSet);
  SEGFORGE_ERROR(MazeFeatureMismatch);
  SEGFORGE_ERROR(InsufficientData);
  SEGFORGE_ERROR(DimensionMismatch);
  SEGFORGE_ERROR(TooFewClusters);
  SEGFORGE_ERROR(SingleCluster);
  SEGFORGE_ERROR(NoFeasibleThreshold);
  SEGFORGE_ERROR(CardinalityMismatch);
  SEGFORGE_ERROR(IntegrityViolation);
  SEGFORGE_ERROR(CorruptStore);
  SEGFORGE_ERROR(WeightLengthMismatch);
  SEGFORGE_ERROR(UnknownMaterial);
  SEGFORGE_ERROR(EmptyPool);
  SEGFORGE_ERROR(CurriculumComplete);
  SEGFORGE_ERROR(InsufficientSample);
  SEGFORGE_ERROR(MissingPrerequisite);
  SEGFORGE_ERROR(ConfigInvalid);
#undef SEGFORGE_ERROR

  // ---- knowledge
  py::class_<PeriodicTable>(m, "PeriodicTable")
      .def_static("load", &PeriodicTable::load, py::arg("path"))
      .def("atomic_number", &PeriodicTable::atomic_number)
      .def("__contains__", &PeriodicTable::contains)
      .def("__len__", &PeriodicTable::size);

  py::class_<CompoundSpec>(m, "CompoundSpec");

  py::class_<CompoundAnnotation>(m, "CompoundAnnotation")
      .def_readonly("formula", &CompoundAnnotation::formula)
      .def_readonly("atom_1_number", &CompoundAnnotation::atom_1_number)
      .def_readonly("atom_2_number", &CompoundAnnotation::atom_2_number)
      .def_readonly("total_types_of_atom", &CompoundAnnotation::total_types_of_atom)
      .def_readonly("total_atom", &CompoundAnnotation::total_atom)
      .def_readonly("total_character_symbol_1", &CompoundAnnotation::total_character_symbol_1)
      .def_readonly("total_character_symbol_2", &CompoundAnnotation::total_character_symbol_2)
      .def_readonly("compound_id", &CompoundAnnotation::compound_id)
      .def("to_json", &annotation_to_json)
      .def("__repr__", [](const CompoundAnnotation& a) {
        return "<CompoundAnnotation " + a.formula + " id=" + std::to_string(a.compound_id) + ">";
      });

  m.def("parse_compound", &parse_compound, py::arg("record"), py::arg("table"));
  m.def("load_compounds", &load_compounds, py::arg("path"), py::arg("table"));
  m.def("annotate", &annotate, py::arg("spec"), py::arg("table"));
  m.def("order_compounds", &order_compounds, py::arg("annotations"));

  // ---- maze / contentspace
  py::enum_<DifficultyLevel>(m, "DifficultyLevel")
      .value("Easy", DifficultyLevel::Easy)
      .value("Medium", DifficultyLevel::Medium)
      .value("Hard", DifficultyLevel::Hard);
  py::enum_<EnemyType>(m, "EnemyType")
      .value("RandomMove", EnemyType::RandomMove)
      .value("Smart", EnemyType::Smart);

  py::class_<MazeFeatures>(m, "MazeFeatures")
      .def_readonly("total_path", &MazeFeatures::total_path)
      .def_readonly("total_corners", &MazeFeatures::total_corners)
      .def_readonly("total_intersections", &MazeFeatures::total_intersections)
      .def_readonly("total_deadend", &MazeFeatures::total_deadend)
      .def_readonly("complexity", &MazeFeatures::complexity);

  py::class_<MazeGrid>(m, "MazeGrid")
      .def_readonly("maze_id", &MazeGrid::maze_id)
      .def_readonly("seed", &MazeGrid::seed)
      .def_readonly("width", &MazeGrid::width)
      .def_readonly("height", &MazeGrid::height)
      .def("rows", &maze_to_rows)
      .def("is_path", py::overload_cast<int, int>(&MazeGrid::is_path, py::const_));

  m.def("generate_maze", &generate_maze, py::arg("seed"), py::arg("width"), py::arg("height"),
        py::arg("maze_id") = std::string{});
  m.def("maze_from_rows", &maze_from_rows, py::arg("rows"), py::arg("maze_id") = "fixture");
  m.def("extract_features", &extract_features, py::arg("maze"));

  py::class_<MazeRecord>(m, "MazeRecord")
      .def_readonly("maze_id", &MazeRecord::maze_id)
      .def_readonly("seed", &MazeRecord::seed)
      .def_readonly("width", &MazeRecord::width)
      .def_readonly("height", &MazeRecord::height)
      .def_readonly("features", &MazeRecord::features);
  m.def("summarize_maze", &summarize_maze, py::arg("maze"));
  m.def("generate_mazes", &generate_mazes, py::arg("count"), py::arg("width"), py::arg("height"),
        py::arg("seed"));

  py::class_<GameParams>(m, "GameParams")
      .def(py::init([](std::string maze_id, EnemyType type, int enemies, int bullets) {
             return GameParams{make_game_id(maze_id, type, enemies, bullets), maze_id, type,
                               enemies, bullets};
           }),
           py::arg("maze_id"), py::arg("enemy_type"), py::arg("total_enemy"),
           py::arg("total_bullets"))
      .def_readonly("game_id", &GameParams::game_id)
      .def_readonly("maze_id", &GameParams::maze_id)
      .def_readonly("enemy_type", &GameParams::enemy_type)
      .def_readonly("total_enemy", &GameParams::total_enemy)
      .def_readonly("total_bullets", &GameParams::total_bullets);

  m.def("enumerate_space", &enumerate_space, py::arg("mazes"));
  m.def("classify_difficulty", &classify_difficulty, py::arg("game"));
  m.def("vectorize", &vectorize, py::arg("game"), py::arg("maze"));
  m.def("normalize", &normalize, py::arg("vectors"));

  // ---- clustering
  py::class_<BirchConfig>(m, "BirchConfig")
      .def(py::init<>())
      .def_readwrite("branching_factor", &BirchConfig::branching_factor)
      .def_readwrite("k_target", &BirchConfig::k_target)
      .def_readwrite("threshold_grid", &BirchConfig::threshold_grid)
      .def_readwrite("silhouette_sample", &BirchConfig::silhouette_sample)
      .def_readwrite("seed", &BirchConfig::seed);

  m.def(
      "silhouette",
      [](const std::vector<std::vector<double>>& points, const std::vector<std::int64_t>& labels) {
        return silhouette(to_points(points), labels);
      },
      py::arg("points"), py::arg("labels"));

  m.def(
      "search_threshold",
      [](const std::vector<std::vector<double>>& points, const BirchConfig& config) {
        const auto r = search_threshold(to_points(points), config);
        py::list clusters, log;
        for (const auto& c : r.clusters) clusters.append(c.members);
        for (const auto& row : r.log) {
          py::dict d;
          d["threshold"] = row.threshold;
          d["leaf_count"] = row.leaf_count;
          d["silhouette"] = row.silhouette ? py::cast(*row.silhouette) : py::none();
          log.append(d);
        }
        py::dict out;
        out["threshold"] = r.threshold;
        out["score"] = r.score;
        out["clusters"] = clusters;
        out["log"] = log;
        return out;
      },
      py::arg("points"), py::arg("config") = BirchConfig{});

  // ---- mapping / store
  py::class_<LibraryEntry>(m, "LibraryEntry")
      .def_readonly("compound_id", &LibraryEntry::compound_id)
      .def_readonly("difficulty", &LibraryEntry::difficulty)
      .def_readonly("cluster_id", &LibraryEntry::cluster_id);

  py::class_<ClusterRecord>(m, "ClusterRecord")
      .def_readonly("cluster_id", &ClusterRecord::cluster_id)
      .def_readonly("difficulty", &ClusterRecord::difficulty)
      .def_readonly("n", &ClusterRecord::n)
      .def_readonly("s", &ClusterRecord::s)
      .def_readonly("centroid", &ClusterRecord::centroid);

  py::class_<ContentLibrary>(m, "ContentLibrary")
      .def_readonly("compounds", &ContentLibrary::compounds)
      .def_readonly("mazes", &ContentLibrary::mazes)
      .def_readonly("clusters", &ContentLibrary::clusters)
      .def_readonly("mapping", &ContentLibrary::mapping)
      .def_readonly("metadata", &ContentLibrary::metadata)
      .def_property_readonly("game_count", [](const ContentLibrary& l) { return l.games.size(); })
      .def("validate", [](const ContentLibrary& l) { validate(l); })
      .def("to_json", &library_to_json)
      .def("persist", [](const ContentLibrary& l, const std::filesystem::path& p) { persist(l, p); });

  m.def("load_library", &load, py::arg("path"));
  m.def("library_from_json", &library_from_json, py::arg("json"));

  // ---- engine
  py::enum_<BotPolicy>(m, "BotPolicy")
      .value("Random", BotPolicy::Random)
      .value("Greedy", BotPolicy::Greedy);
  py::enum_<Outcome>(m, "Outcome")
      .value("Victory", Outcome::Victory)
      .value("Defeat", Outcome::Defeat);

  py::class_<ScoreThresholds>(m, "ScoreThresholds")
      .def(py::init([](double em, double mh) { return ScoreThresholds{em, mh}; }),
           py::arg("easy_medium"), py::arg("medium_hard"))
      .def_readwrite("easy_medium", &ScoreThresholds::easy_medium)
      .def_readwrite("medium_hard", &ScoreThresholds::medium_hard);

  m.def(
      "score",
      [](std::vector<std::int64_t> pos, std::vector<std::int64_t> neg, std::vector<double> alpha,
         std::vector<double> beta) {
        return score(ActionTally{std::move(pos), std::move(neg), std::move(alpha), std::move(beta)});
      },
      py::arg("positives"), py::arg("negatives"), py::arg("alpha"), py::arg("beta"));
  m.def("assess_level", &assess_level, py::arg("score"),
        py::arg("thresholds") = ScoringConfig{}.thresholds);
  m.def(
      "select_game",
      [](const std::vector<std::pair<std::string, std::vector<double>>>& pool) {
        std::vector<PoolEntry> entries;
        for (const auto& [id, f] : pool) entries.push_back(PoolEntry{id, f});
        return select_game(entries);
      },
      py::arg("pool"));

  py::class_<SessionRecord>(m, "SessionRecord")
      .def_readonly("player_id", &SessionRecord::player_id)
      .def_readonly("compound_id", &SessionRecord::compound_id)
      .def_readonly("difficulty", &SessionRecord::difficulty)
      .def_readonly("game_id", &SessionRecord::game_id)
      .def_readonly("score", &SessionRecord::score)
      .def_readonly("outcome", &SessionRecord::outcome)
      .def_readonly("duration", &SessionRecord::duration)
      .def_readonly("recycled_pool", &SessionRecord::recycled_pool)
      .def("to_json", &session_summary_json);

  m.def(
      "bot_simulate",
      [](const GameParams& game, const MazeGrid& maze, BotPolicy policy, std::uint64_t seed) {
        return bot_simulate(game, maze, policy, seed);
      },
      py::arg("game"), py::arg("maze"), py::arg("policy"), py::arg("seed"));

  // ---- stats
  py::enum_<Alternative>(m, "Alternative")
      .value("TwoSided", Alternative::TwoSided)
      .value("Greater", Alternative::Greater)
      .value("Less", Alternative::Less);

  py::class_<ZTestResult>(m, "ZTestResult")
      .def_readonly("successes", &ZTestResult::successes)
      .def_readonly("trials", &ZTestResult::trials)
      .def_readonly("p_hat", &ZTestResult::p_hat)
      .def_readonly("z", &ZTestResult::z)
      .def_readonly("p_value", &ZTestResult::p_value)
      .def_readonly("ci_lo", &ZTestResult::ci_lo)
      .def_readonly("ci_hi", &ZTestResult::ci_hi)
      .def_readonly("h0_rejected", &ZTestResult::h0_rejected);

  m.def(
      "proportion_ztest",
      [](std::int64_t x, std::int64_t n, double pi0, Alternative alt) {
        return proportion_ztest(x, n, pi0, alt);
      },
      py::arg("successes"), py::arg("trials"), py::arg("pi0") = 0.5,
      py::arg("alternative") = Alternative::TwoSided);
  m.def("format_p_value", &format_p_value, py::arg("p"));

  py::class_<ContingencyTable2x2>(m, "ContingencyTable2x2")
      .def_readonly("fun_learning", &ContingencyTable2x2::fun_learning)
      .def_readonly("fun_not_learning", &ContingencyTable2x2::fun_not_learning)
      .def_readonly("not_fun_learning", &ContingencyTable2x2::not_fun_learning)
      .def_readonly("not_fun_not_learning", &ContingencyTable2x2::not_fun_not_learning)
      .def("total", &ContingencyTable2x2::total);

  m.def(
      "crosstab",
      [](const std::vector<std::pair<bool, bool>>& sessions) {
        std::vector<OutcomePair> pairs;
        for (const auto& [fun, learned] : sessions) pairs.push_back(OutcomePair{fun, learned});
        return crosstab(pairs);
      },
      py::arg("sessions"));

  // ---- pipeline
  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def_static("defaults", &PipelineConfig::defaults)
      .def_static("load", &PipelineConfig::load, py::arg("path"))
      .def_static(
          "parse",
          [](const std::string& text, const std::filesystem::path& base_dir) {
            std::istringstream in(text);
            return PipelineConfig::parse(in, base_dir);
          },
          py::arg("text"), py::arg("base_dir"))
      .def("set", &PipelineConfig::set, py::arg("key"), py::arg("value"))
      .def("validate", &PipelineConfig::validate)
      .def("canonical", &PipelineConfig::canonical)
      .def("hash", &PipelineConfig::hash);

  py::class_<StageReport>(m, "StageReport")
      .def_property_readonly("stage",
                             [](const StageReport& r) { return std::string(to_string(r.stage)); })
      .def_readonly("artifacts", &StageReport::artifacts)
      .def_readonly("warnings", &StageReport::warnings);

  const auto options = [](const std::filesystem::path& dir, bool plots) {
    StageOptions o;
    o.work_dir = dir;
    o.export_plots = plots;
    return o;
  };
  m.def(
      "run_stage",
      [options](const std::string& stage, const PipelineConfig& config,
                const std::filesystem::path& work_dir, bool export_plots) {
        py::gil_scoped_release release;
        return run_stage(parse_stage(stage), config, options(work_dir, export_plots));
      },
      py::arg("stage"), py::arg("config"), py::arg("work_dir"), py::arg("export_plots") = false);
  m.def(
      "run_pipeline",
      [options](const PipelineConfig& config, const std::filesystem::path& work_dir,
                bool export_plots) {
        py::gil_scoped_release release;
        return run_pipeline(config, options(work_dir, export_plots));
      },
      py::arg("config"), py::arg("work_dir"), py::arg("export_plots") = false);
}
