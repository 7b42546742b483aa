#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "lsw/cli.hpp"
#include "lsw/dci.hpp"
#include "lsw/editor.hpp"
#include "lsw/evalsuite.hpp"
#include "lsw/forest.hpp"
#include "lsw/inversion.hpp"
#include "lsw/ranking.hpp"
#include "lsw/toygen.hpp"

namespace py = pybind11;
using namespace lsw;

namespace {

forest::ForestConfig forest_config(std::size_t n_trees, std::optional<std::size_t> max_depth,
                                   std::size_t min_samples_leaf, const std::string& max_features, bool bootstrap,
                                   std::uint64_t seed) {
  forest::ForestConfig cfg;
  cfg.n_trees = n_trees;
  cfg.max_depth = max_depth;
  cfg.min_samples_leaf = min_samples_leaf;
  cfg.bootstrap = bootstrap;
  cfg.seed = seed;
  if (max_features == "sqrt") cfg.max_features = forest::FeatureFraction::Sqrt;
  else if (max_features == "third") cfg.max_features = forest::FeatureFraction::Third;
  else if (max_features == "all") cfg.max_features = forest::FeatureFraction::All;
  else throw ValidationError("max_features must be 'sqrt', 'third' or 'all'");
  return cfg;
}

#define LSW_FOREST_ARGS                                                                                   \
  py::arg("n_trees") = 100, py::arg("max_depth") = py::none(), py::arg("min_samples_leaf") = 5,          \
      py::arg("max_features") = "sqrt", py::arg("bootstrap") = true, py::arg("seed") = 0

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Latent dimension ranking, swap editing and evaluation";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<LatentDataset>(m, "LatentDataset")
      .def(py::init<>())
      .def_property(
          "space", [](const LatentDataset& d) { return std::string(to_string(d.space)); },
          [](LatentDataset& d, const std::string& s) { d.space = latent_space_from_string(s); })
      .def_readwrite("latents", &LatentDataset::latents)
      .def_readwrite("attribute_names", &LatentDataset::attribute_names)
      .def_readwrite("scores", &LatentDataset::scores)
      .def_readwrite("embeddings", &LatentDataset::embeddings)
      .def_readwrite("domain", &LatentDataset::domain)
      .def_property_readonly("n_samples", &LatentDataset::n_samples)
      .def_property_readonly("n_dims", &LatentDataset::n_dims)
      .def("validate", &LatentDataset::validate)
      .def("select", &LatentDataset::select);

  m.def("read_dataset", &read_dataset_dir, py::arg("dir"));
  m.def("write_dataset", &write_dataset_dir, py::arg("dir"), py::arg("dataset"));
  m.def("read_matrix", &read_matrix_f32, py::arg("path"));
  m.def("write_matrix", &write_matrix_f32, py::arg("path"), py::arg("matrix"));
  m.def("split_train_test", &split_train_test, py::arg("dataset"), py::arg("train_fraction") = 0.8);

  py::class_<FeatureRanking>(m, "FeatureRanking")
      .def_readonly("attribute", &FeatureRanking::attribute)
      .def_readonly("order", &FeatureRanking::order)
      .def_readonly("importances", &FeatureRanking::importances)
      .def_property_readonly("ranker", [](const FeatureRanking& r) { return std::string(to_string(r.ranker)); });
  m.def("save_ranking", &save_ranking, py::arg("path"), py::arg("ranking"));
  m.def("load_ranking", &load_ranking, py::arg("path"));

  m.def(
      "rank_forest",
      [](const LatentDataset& ds, const std::string& attr, std::size_t n_trees, std::optional<std::size_t> max_depth,
         std::size_t leaf, const std::string& mf, bool bootstrap, std::uint64_t seed) {
        const auto cfg = forest_config(n_trees, max_depth, leaf, mf, bootstrap, seed);
        py::gil_scoped_release release;
        return ranking::rank_forest(ds, attr, cfg);
      },
      py::arg("dataset"), py::arg("attribute"), LSW_FOREST_ARGS);
  m.def("rank_score_topk", &ranking::rank_score_topk, py::arg("dataset"), py::arg("attribute"));
  m.def(
      "rank_linear_coef",
      [](const LatentDataset& ds, const std::string& attr, double l2, std::size_t epochs, std::uint64_t seed) {
        return ranking::rank_linear_coef(ds, attr, {l2, epochs, seed});
      },
      py::arg("dataset"), py::arg("attribute"), py::arg("l2") = 1e-2, py::arg("epochs") = 20, py::arg("seed") = 0);

  m.def("default_k_grid", &editor::default_k_grid, py::arg("n_dims"));
  m.def("default_tau", &editor::default_tau, py::arg("domain"));
  m.def("swap_top_k", &editor::swap_top_k, py::arg("target"), py::arg("reference"), py::arg("ranking"), py::arg("k"));
  m.def("linear_edit_baseline", &editor::linear_edit_baseline, py::arg("target"), py::arg("reference"),
        py::arg("ranking"), py::arg("k"), py::arg("step"));

  py::class_<editor::EditResult>(m, "EditResult")
      .def_readonly("edited_latent", &editor::EditResult::edited_latent)
      .def_readonly("reference_index", &editor::EditResult::reference_index)
      .def_readonly("chosen_k", &editor::EditResult::chosen_k)
      .def_readonly("identity_loss", &editor::EditResult::identity_loss)
      .def_readonly("satisfied", &editor::EditResult::satisfied)
      .def_readonly("grid_losses", &editor::EditResult::grid_losses);
  m.def(
      "choose_k",
      [](const Vector& target, const LatentDataset& ds, const FeatureRanking& ranking, const editor::IdentityLoss& id,
         const std::string& direction, std::optional<double> tau, std::size_t support_n,
         std::vector<std::size_t> k_grid) {
        editor::EditConfig cfg;
        cfg.attribute = ranking.attribute;
        cfg.direction = editor::direction_from_string(direction);
        cfg.tau = tau.value_or(editor::default_tau(ds.domain));
        cfg.support_n = support_n;
        cfg.k_grid = k_grid.empty() ? editor::default_k_grid(ds.n_dims()) : std::move(k_grid);
        cfg.ranking = ranking;
        return editor::choose_k(target, ds, cfg, id);
      },
      py::arg("target"), py::arg("dataset"), py::arg("ranking"), py::arg("identity_loss"),
      py::arg("direction") = "add", py::arg("tau") = py::none(), py::arg("support_n") = 32,
      py::arg("k_grid") = std::vector<std::size_t>{});

  py::class_<dci::DciReport>(m, "DciReport")
      .def_property_readonly("space", [](const dci::DciReport& r) { return std::string(to_string(r.space)); })
      .def_readonly("disentanglement", &dci::DciReport::disentanglement)
      .def_readonly("completeness", &dci::DciReport::completeness)
      .def_readonly("informativeness", &dci::DciReport::informativeness)
      .def_readonly("importance_matrix", &dci::DciReport::importance_matrix)
      .def_readonly("per_attribute_accuracy", &dci::DciReport::per_attribute_accuracy);
  m.def(
      "dci_scores",
      [](const Matrix& importance) {
        const auto s = dci::scores_from_importance(importance);
        return std::pair{s.disentanglement, s.completeness};
      },
      py::arg("importance"));
  m.def(
      "compute_dci",
      [](const LatentDataset& train, const LatentDataset& test, std::size_t n_trees,
         std::optional<std::size_t> max_depth, std::size_t leaf, const std::string& mf, bool bootstrap,
         std::uint64_t seed) {
        const auto cfg = forest_config(n_trees, max_depth, leaf, mf, bootstrap, seed);
        py::gil_scoped_release release;
        return dci::compute_dci(train, test, cfg);
      },
      py::arg("train"), py::arg("test"), LSW_FOREST_ARGS);

  py::class_<toygen::ToyGenerator>(m, "ToyGenerator")
      .def(py::init([](std::uint64_t seed) { return toygen::ToyGenerator(toygen::ToyGeneratorSpec::make_default(seed)); }),
           py::arg("seed") = 7)
      .def_static("from_json",
                  [](const std::string& text) { return toygen::ToyGenerator(toygen::ToyGeneratorSpec::from_json(text)); })
      .def("spec_json", [](const toygen::ToyGenerator& g) { return g.spec().to_json(); })
      .def_property_readonly("planted_dims", [](const toygen::ToyGenerator& g) { return g.spec().planted_dims; })
      .def_property_readonly("beta_role_dims", [](const toygen::ToyGenerator& g) { return g.spec().beta_role_dims(); })
      .def("render", [](const toygen::ToyGenerator& g, const Vector& s, double cam) { return g.render(s, cam).pixels; },
           py::arg("s"), py::arg("camera") = 0.0)
      .def("oracle_classify",
           [](const toygen::ToyGenerator& g, const Vector& px) { return g.oracle_classify({px}); }, py::arg("pixels"))
      .def("identity_embed",
           [](const toygen::ToyGenerator& g, const Vector& px) { return g.identity_embed({px}); }, py::arg("pixels"))
      .def("identity_loss",
           [](const toygen::ToyGenerator& g, const Vector& a, const Vector& b) { return g.identity_loss({a}, {b}); })
      .def("mix", &toygen::ToyGenerator::mix)
      .def("unmix", &toygen::ToyGenerator::unmix)
      .def("sample_dataset", &toygen::ToyGenerator::sample_dataset, py::arg("n"), py::arg("seed"));

  py::class_<inversion::InversionResult>(m, "InversionResult")
      .def_readonly("s_hat", &inversion::InversionResult::s_hat)
      .def_readonly("camera_hat", &inversion::InversionResult::camera_hat)
      .def_readonly("final_loss", &inversion::InversionResult::final_loss)
      .def_readonly("loss_trace", &inversion::InversionResult::loss_trace);
  m.def(
      "invert",
      [](const toygen::ToyGenerator& g, const Vector& target, std::size_t n_alternations, std::size_t final_steps,
         std::uint64_t seed) {
        inversion::InversionConfig cfg;
        cfg.n_alternations = n_alternations;
        cfg.final_latent_steps = final_steps;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return inversion::invert(g, toygen::RenderedOutput{target}, cfg);
      },
      py::arg("generator"), py::arg("target"), py::arg("n_alternations") = 30, py::arg("final_latent_steps") = 200,
      py::arg("seed") = 0);

  m.def(
      "semantic_correctness",
      [](const std::vector<double>& before, const std::vector<double>& after, double threshold) {
        const auto r = evalsuite::semantic_correctness(before, after, threshold);
        return std::pair{r.before, r.after};
      },
      py::arg("before"), py::arg("after"), py::arg("threshold") = 0.5);
  m.def("identity_preservation", &evalsuite::identity_preservation, py::arg("before"), py::arg("after"),
        py::arg("sim_threshold") = 0.5);
  m.def(
      "frechet_distance", [](const Matrix& a, const Matrix& b) { return evalsuite::frechet_distance(a, b).distance; },
      py::arg("a"), py::arg("b"));
  m.def("kernel_distance", &evalsuite::kernel_distance, py::arg("a"), py::arg("b"), py::arg("subset_size") = 100,
        py::arg("n_subsets") = 10, py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
