#include "lsw/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsw/dataio.hpp"
#include "lsw/dci.hpp"
#include "lsw/editor.hpp"
#include "lsw/evalsuite.hpp"
#include "lsw/forest.hpp"
#include "lsw/inversion.hpp"
#include "lsw/ranking.hpp"
#include "lsw/toygen.hpp"

namespace lsw::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ForestFlags {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 5;
  std::string max_features = "sqrt";
  bool no_bootstrap = false;
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--n-trees", n_trees, "Trees per forest")->capture_default_str();
    app->add_option("--max-depth", max_depth, "Maximum tree depth (0 = unlimited)")->capture_default_str();
    app->add_option("--min-samples-leaf", min_samples_leaf, "Minimum samples per leaf")->capture_default_str();
    app->add_option("--max-features", max_features, "sqrt|third|all|<count>")->capture_default_str();
    app->add_flag("--no-bootstrap", no_bootstrap, "Train every tree on the full sample");
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  forest::ForestConfig config() const {
    forest::ForestConfig cfg;
    cfg.n_trees = n_trees;
    if (max_depth > 0) cfg.max_depth = max_depth;
    cfg.min_samples_leaf = min_samples_leaf;
    cfg.bootstrap = !no_bootstrap;
    cfg.seed = seed;
    if (max_features == "sqrt") {
      cfg.max_features = forest::FeatureFraction::Sqrt;
    } else if (max_features == "third") {
      cfg.max_features = forest::FeatureFraction::Third;
    } else if (max_features == "all") {
      cfg.max_features = forest::FeatureFraction::All;
    } else {
      try {
        std::size_t pos = 0;
        auto k = std::stoull(max_features, &pos);
        if (pos != max_features.size()) throw std::invalid_argument(max_features);
        cfg.max_features = static_cast<std::size_t>(k);
      } catch (const std::exception&) {
        throw ValidationError("--max-features must be sqrt, third, all or a count");
      }
    }
    return cfg;
  }

  json to_json() const {
    return {{"n_trees", n_trees},
            {"max_depth", max_depth == 0 ? json(nullptr) : json(max_depth)},
            {"min_samples_leaf", min_samples_leaf},
            {"max_features", max_features},
            {"bootstrap", !no_bootstrap},
            {"seed", seed}};
  }
};

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

// Resolved argument list of the invoked subcommand; replaying it reproduces the run.
using Argv = std::vector<std::string>;

Argv resolved_argv(const CLI::App& sub) {
  Argv argv{sub.get_name()};
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names[0] == "help") continue;
    const std::string flag = "--" + names[0];
    if (opt->get_expected_min() == 0) {
      if (opt->count() > 0) argv.push_back(flag);
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    if (value.empty()) continue;
    argv.push_back(flag);
    argv.push_back(value);
  }
  return argv;
}

void write_run(const fs::path& path, const Argv& argv, json config) {
  write_json(path, {{"tool", "lsw"},
                    {"version", kVersion},
                    {"command", argv.front()},
                    {"argv", argv},
                    {"config", std::move(config)}});
}

// Run record for commands whose output is a single file.
fs::path run_record_for(const fs::path& out_file) {
  return out_file.parent_path() / (out_file.filename().string() + ".run.json");
}

toygen::ToyGeneratorSpec load_spec(const fs::path& path) { return toygen::ToyGeneratorSpec::from_json(read_text_file(path)); }

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::uint64_t spec_seed = 7;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_synth(const SynthArgs& a, const Argv& argv, std::ostream& out) {
  const auto spec = a.spec.empty() ? toygen::ToyGeneratorSpec::make_default(a.spec_seed) : load_spec(a.spec);
  if (a.n < 1) throw ValidationError("--n must be at least 1");
  const toygen::ToyGenerator gen(spec);
  auto [z, s] = gen.sample_dataset(a.n, a.seed);
  const fs::path dir(a.out);
  write_text_file(dir / "spec.json", spec.to_json() + "\n");
  write_dataset_dir(dir / "z", z);
  write_dataset_dir(dir / "s", s);
  write_run(dir / "run.json", argv,
            {{"spec", a.spec.empty() ? json(nullptr) : json(a.spec)},
             {"spec_seed", a.spec_seed},
             {"n", a.n},
             {"seed", a.seed},
             {"out", a.out},
             {"resolved_spec", json::parse(spec.to_json())}});
  out << "wrote " << a.n << " paired Z/S samples to " << dir.string() << "\n";
}

// --- rank ------------------------------------------------------------------

struct RankArgs {
  std::string data;
  std::string attr;
  std::string ranker = "forest_mdi";
  std::string out;
  ForestFlags forest;
  double l2 = 1e-2;
  std::size_t epochs = 20;
};

void cmd_rank(const RankArgs& a, const Argv& argv, std::ostream& out) {
  const auto ds = read_dataset_dir(a.data);
  const auto id = ranker_from_string(a.ranker);
  FeatureRanking r;
  switch (id) {
    case RankerId::ForestMdi: r = ranking::rank_forest(ds, a.attr, a.forest.config()); break;
    case RankerId::ScoreTopk: r = ranking::rank_score_topk(ds, a.attr); break;
    case RankerId::LinearCoef: r = ranking::rank_linear_coef(ds, a.attr, {a.l2, a.epochs, a.forest.seed}); break;
  }
  save_ranking(a.out, r);
  write_run(run_record_for(a.out), argv,
            {{"data", a.data},
             {"attr", a.attr},
             {"ranker", a.ranker},
             {"out", a.out},
             {"forest", a.forest.to_json()},
             {"l2", a.l2},
             {"epochs", a.epochs}});
  out << "top dims for " << a.attr << ":";
  for (std::size_t i = 0; i < std::min<std::size_t>(8, r.order.size()); ++i) out << ' ' << r.order[i];
  out << "\n";
}

// --- edit ------------------------------------------------------------------

struct EditArgs {
  std::string data;
  std::string ranking;
  std::string attr;
  std::string dir = "add";
  std::optional<double> tau;
  std::size_t support_n = 32;
  std::vector<std::size_t> k_grid;
  std::string spec;
  std::size_t limit = 0;
  double camera = 0.0;
  std::string out;
};

std::optional<fs::path> find_spec(const EditArgs& a) {
  if (!a.spec.empty()) return fs::path(a.spec);
  const fs::path guess = fs::path(a.data).lexically_normal().parent_path() / "spec.json";
  if (fs::exists(guess)) return guess;
  return std::nullopt;
}

void cmd_edit(const EditArgs& a, const Argv& argv, std::ostream& out) {
  const auto ds = read_dataset_dir(a.data);
  const auto rk = load_ranking(a.ranking);
  if (rk.attribute != a.attr)
    throw ValidationError("ranking is for attribute '" + rk.attribute + "', not '" + a.attr + "'");

  editor::EditConfig cfg;
  cfg.attribute = a.attr;
  cfg.direction = editor::direction_from_string(a.dir);
  cfg.tau = a.tau.value_or(editor::default_tau(ds.domain));
  cfg.support_n = a.support_n;
  cfg.k_grid = a.k_grid.empty() ? editor::default_k_grid(ds.n_dims()) : a.k_grid;
  cfg.ranking = rk;
  cfg.validate(ds.n_dims());

  const auto spec_path = find_spec(a);
  std::optional<toygen::ToyGenerator> gen;
  if (spec_path) gen.emplace(load_spec(*spec_path));
  if (gen && gen->spec().d_s != ds.n_dims())
    throw ValidationError("generator spec latent width differs from the dataset");

  auto to_s = [&](const Vector& latent) { return ds.space == LatentSpace::Z ? gen->mix(latent) : latent; };
  auto render = [&](const Vector& latent) { return gen->render(to_s(latent), a.camera); };
  editor::IdentityLoss id_loss;
  if (gen) {
    id_loss = [&](const Vector& orig, const Vector& edited) { return gen->identity_loss(render(orig), render(edited)); };
  } else {
    // Without a generator the loss falls back to latent cosine distance.
    id_loss = [](const Vector& orig, const Vector& edited) {
      const double n = orig.norm() * edited.norm();
      return n == 0.0 ? 0.0 : std::max(0.0, 1.0 - orig.dot(edited) / n);
    };
  }

  const auto attr = static_cast<Eigen::Index>(ds.attribute_index(a.attr));
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    const bool has = ds.scores(static_cast<Eigen::Index>(i), attr) >= 0.5;
    if (cfg.direction == editor::Direction::Add ? !has : has) rows.push_back(i);
    if (a.limit > 0 && rows.size() == a.limit) break;
  }

  std::string report = "id,reference_index,chosen_k,identity_loss,satisfied\n";
  Matrix edited(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.n_dims()));
  std::size_t satisfied = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vector target = ds.latents.row(static_cast<Eigen::Index>(rows[r])).transpose();
    const auto res = editor::choose_k(target, ds, cfg, id_loss);
    edited.row(static_cast<Eigen::Index>(r)) = res.edited_latent.transpose();
    satisfied += res.satisfied;
    std::ostringstream line;
    line.precision(17);
    line << rows[r] << ',' << res.reference_index << ',' << res.chosen_k << ',' << res.identity_loss << ','
         << (res.satisfied ? "true" : "false") << '\n';
    report += line.str();
  }

  const fs::path dir(a.out);
  write_text_file(dir / "report.csv", report);
  write_matrix_f32(dir / "edited_latents.f32", edited);
  if (gen) {
    LatentDataset before = ds.select(rows);
    LatentDataset after = before;
    Matrix emb(edited.rows(), static_cast<Eigen::Index>(gen->spec().embed_dim));
    for (Eigen::Index i = 0; i < edited.rows(); ++i) {
      const auto o = render(edited.row(i).transpose());
      after.latents.row(i) = edited.row(i);
      after.scores.row(i) = gen->oracle_classify(o).transpose();
      emb.row(i) = gen->identity_embed(o).transpose();
    }
    after.embeddings = std::move(emb);
    write_dataset_dir(dir / "before", before);
    write_dataset_dir(dir / "after", after);
  }
  json k_grid = cfg.k_grid;
  write_run(dir / "run.json", argv,
            {{"data", a.data},
             {"ranking", a.ranking},
             {"attr", a.attr},
             {"dir", std::string(editor::to_string(cfg.direction))},
             {"tau", cfg.tau},
             {"support_n", cfg.support_n},
             {"k_grid", k_grid},
             {"spec", spec_path ? json(spec_path->string()) : json(nullptr)},
             {"identity_loss", gen ? "toy_embedding" : "latent_cosine"},
             {"limit", a.limit},
             {"camera", a.camera},
             {"out", a.out}});
  out << "edited " << rows.size() << " samples, " << satisfied << " within tau=" << cfg.tau << "\n";
}

// --- dci -------------------------------------------------------------------

struct DciArgs {
  std::string data_z;
  std::string data_s;
  std::string out;
  double train_fraction = 0.8;
  ForestFlags forest;
};

void cmd_dci(const DciArgs& a, const Argv& argv, std::ostream& out) {
  std::vector<dci::DciReport> reports;
  json j = json::object();
  const auto cfg = a.forest.config();
  for (const auto& path : {a.data_z, a.data_s}) {
    if (path.empty()) continue;
    const auto ds = read_dataset_dir(path);
    auto [train, test] = split_train_test(ds, a.train_fraction);
    reports.push_back(dci::compute_dci(train, test, cfg));
    j[std::string(to_string(ds.space))] = json::parse(dci::to_json(reports.back()));
  }
  if (reports.empty()) throw ValidationError("dci needs --data-z and/or --data-s");
  write_json(a.out, j);
  write_run(run_record_for(a.out), argv,
            {{"data_z", a.data_z}, {"data_s", a.data_s}, {"out", a.out}, {"train_fraction", a.train_fraction},
             {"forest", a.forest.to_json()}});
  out << dci::format_table(reports);
}

// --- invert / render -------------------------------------------------------

struct InvertArgs {
  std::string spec;
  std::string target;
  std::string out;
  inversion::InversionConfig cfg;
};

void cmd_invert(const InvertArgs& a, const Argv& argv, std::ostream& out) {
  const toygen::ToyGenerator gen(load_spec(a.spec));
  const Matrix target = read_matrix_f32(a.target);
  if (target.rows() != 1) throw ValidationError("invert: target file must hold exactly one row");
  if (static_cast<std::size_t>(target.cols()) != gen.spec().out_dim)
    throw ValidationError("invert: target width " + std::to_string(target.cols()) + " differs from out_dim " +
                          std::to_string(gen.spec().out_dim));
  const auto res = inversion::invert(gen, toygen::RenderedOutput{target.row(0).transpose()}, a.cfg);
  write_text_file(a.out, res.to_json() + "\n");
  const auto& c = a.cfg;
  write_run(run_record_for(a.out), argv,
            {{"spec", a.spec},
             {"target", a.target},
             {"out", a.out},
             {"lambda1", c.lambda1},
             {"lambda2", c.lambda2},
             {"lambda3", c.lambda3},
             {"n_alternations", c.n_alternations},
             {"steps_per_phase", c.steps_per_phase},
             {"final_latent_steps", c.final_latent_steps},
             {"learning_rate", c.learning_rate},
             {"momentum", c.momentum},
             {"fd_epsilon", c.fd_epsilon},
             {"projection_dim", c.projection_dim},
             {"mean_draws", c.mean_draws},
             {"seed", c.seed}});
  out << "final loss " << res.final_loss << ", camera " << res.camera_hat << "\n";
}

struct RenderArgs {
  std::string spec;
  std::string data;
  std::size_t index = 0;
  double camera = 0.0;
  std::string out;
};

void cmd_render(const RenderArgs& a, const Argv& argv, std::ostream& out) {
  const toygen::ToyGenerator gen(load_spec(a.spec));
  const auto ds = read_dataset_dir(a.data);
  if (a.index >= ds.n_samples()) throw ValidationError("render: --index out of range");
  if (ds.n_dims() != gen.spec().d_s) throw ValidationError("render: dataset width differs from spec d_s");
  Vector latent = ds.latents.row(static_cast<Eigen::Index>(a.index)).transpose();
  if (ds.space == LatentSpace::Z) latent = gen.mix(latent);
  const auto o = gen.render(latent, a.camera);
  write_matrix_f32(a.out, Matrix(o.pixels.transpose()));
  write_run(run_record_for(a.out), argv,
            {{"spec", a.spec}, {"data", a.data}, {"index", a.index}, {"camera", a.camera}, {"out", a.out}});
  out << "rendered sample " << a.index << " to " << a.out << "\n";
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string before;
  std::string after;
  std::string out;
  std::string attr;
  double threshold = 0.5;
  double sim_threshold = 0.5;
  std::size_t kid_subset_size = 100;
  std::size_t kid_subsets = 10;
  std::uint64_t seed = 0;
};

void cmd_eval(const EvalArgs& a, const Argv& argv, std::ostream& out) {
  const auto before = read_dataset_dir(a.before);
  const auto after = read_dataset_dir(a.after);
  if (before.attribute_names != after.attribute_names) throw ValidationError("eval: attribute lists differ");
  if (before.n_samples() != after.n_samples()) throw ValidationError("eval: datasets must have matching rows");

  json report = json::object();
  json sem = json::object();
  for (std::size_t j = 0; j < before.n_attributes(); ++j) {
    const auto& name = before.attribute_names[j];
    if (!a.attr.empty() && name != a.attr) continue;
    const Vector b = before.scores.col(static_cast<Eigen::Index>(j));
    const Vector c = after.scores.col(static_cast<Eigen::Index>(j));
    const auto rates = evalsuite::semantic_correctness({b.data(), static_cast<std::size_t>(b.size())},
                                                       {c.data(), static_cast<std::size_t>(c.size())}, a.threshold);
    sem[name] = {{"rate_before", rates.before}, {"rate_after", rates.after}};
  }
  if (!a.attr.empty() && sem.empty()) before.attribute_index(a.attr);
  report["semantic_correctness"] = sem;

  if (before.embeddings && after.embeddings) {
    const auto& eb = *before.embeddings;
    const auto& ea = *after.embeddings;
    report["identity_preservation"] = evalsuite::identity_preservation(eb, ea, a.sim_threshold);
    if (eb.rows() >= eb.cols() + 1 && ea.rows() >= ea.cols() + 1) {
      const auto fd = evalsuite::frechet_distance(eb, ea);
      report["frechet_distance"] = {{"value", fd.distance}, {"regularized", fd.regularized}};
    } else {
      report["frechet_distance"] = nullptr;
    }
    const auto m = std::min<std::size_t>(a.kid_subset_size, static_cast<std::size_t>(std::min(eb.rows(), ea.rows())));
    report["kernel_distance"] = m >= 2 ? json(evalsuite::kernel_distance(eb, ea, m, a.kid_subsets, a.seed)) : json(nullptr);
  } else {
    report["identity_preservation"] = nullptr;
    report["frechet_distance"] = nullptr;
    report["kernel_distance"] = nullptr;
  }
  write_json(a.out, report);
  write_run(run_record_for(a.out), argv,
            {{"before", a.before},
             {"after", a.after},
             {"out", a.out},
             {"attr", a.attr},
             {"threshold", a.threshold},
             {"sim_threshold", a.sim_threshold},
             {"kid_subset_size", a.kid_subset_size},
             {"kid_subsets", a.kid_subsets},
             {"seed", a.seed}});
  out << report.dump(2) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent dimension ranking and swap-based attribute editing", "lsw"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* sc_synth = app.add_subcommand("synth", "Sample paired Z/S datasets from the toy generator");
  sc_synth->add_option("--spec", synth.spec, "Generator spec JSON (default: built-in)");
  sc_synth->add_option("--spec-seed", synth.spec_seed, "Seed for the built-in spec")->capture_default_str();
  sc_synth->add_option("--n", synth.n, "Number of samples")->capture_default_str();
  sc_synth->add_option("--seed", synth.seed, "Sampling seed")->capture_default_str();
  sc_synth->add_option("--out", synth.out, "Output directory")->required();

  RankArgs rank;
  auto* sc_rank = app.add_subcommand("rank", "Rank latent dimensions for one attribute");
  sc_rank->add_option("--data", rank.data, "Dataset directory")->required();
  sc_rank->add_option("--attr", rank.attr, "Attribute name")->required();
  sc_rank->add_option("--ranker", rank.ranker, "forest_mdi|score_topk|linear_coef")->capture_default_str();
  sc_rank->add_option("--out", rank.out, "Ranking JSON path")->required();
  sc_rank->add_option("--l2", rank.l2, "L2 penalty of the linear ranker")->capture_default_str();
  sc_rank->add_option("--epochs", rank.epochs, "Epochs of the linear ranker")->capture_default_str();
  rank.forest.attach(sc_rank);

  EditArgs edit;
  auto* sc_edit = app.add_subcommand("edit", "Swap top-ranked dimensions with a reference sample");
  sc_edit->add_option("--data", edit.data, "Dataset directory")->required();
  sc_edit->add_option("--ranking", edit.ranking, "Ranking JSON")->required();
  sc_edit->add_option("--attr", edit.attr, "Attribute name")->required();
  sc_edit->add_option("--dir", edit.dir, "add|remove")->capture_default_str();
  sc_edit->add_option("--tau", edit.tau, "Identity-loss budget (default 0.25 for face data, else 0.1)");
  sc_edit->add_option("--support-n", edit.support_n, "Candidate references")->capture_default_str();
  sc_edit->add_option("--k-grid", edit.k_grid, "Candidate K values (default powers of two)")->delimiter(',');
  sc_edit->add_option("--spec", edit.spec, "Toy generator spec used for the identity loss");
  sc_edit->add_option("--limit", edit.limit, "Edit at most this many samples (0 = all)")->capture_default_str();
  sc_edit->add_option("--camera", edit.camera, "Camera angle for rendering")->capture_default_str();
  sc_edit->add_option("--out", edit.out, "Output directory")->required();

  DciArgs dci_args;
  auto* sc_dci = app.add_subcommand("dci", "Disentanglement, completeness and informativeness");
  sc_dci->add_option("--data-z", dci_args.data_z, "Z-space dataset directory");
  sc_dci->add_option("--data-s", dci_args.data_s, "S-space dataset directory");
  sc_dci->add_option("--out", dci_args.out, "Report JSON path")->required();
  sc_dci->add_option("--train-fraction", dci_args.train_fraction, "Leading fraction used for training")
      ->capture_default_str();
  dci_args.forest.attach(sc_dci);

  InvertArgs inv;
  auto* sc_inv = app.add_subcommand("invert", "Recover latent code and camera for a target output");
  sc_inv->add_option("--spec", inv.spec, "Toy generator spec")->required();
  sc_inv->add_option("--target", inv.target, "Target output (binary matrix, one row)")->required();
  sc_inv->add_option("--out", inv.out, "Result JSON path")->required();
  sc_inv->add_option("--lambda1", inv.cfg.lambda1)->capture_default_str();
  sc_inv->add_option("--lambda2", inv.cfg.lambda2)->capture_default_str();
  sc_inv->add_option("--lambda3", inv.cfg.lambda3)->capture_default_str();
  sc_inv->add_option("--alternations", inv.cfg.n_alternations)->capture_default_str();
  sc_inv->add_option("--steps-per-phase", inv.cfg.steps_per_phase)->capture_default_str();
  sc_inv->add_option("--final-steps", inv.cfg.final_latent_steps)->capture_default_str();
  sc_inv->add_option("--lr", inv.cfg.learning_rate)->capture_default_str();
  sc_inv->add_option("--fd-epsilon", inv.cfg.fd_epsilon)->capture_default_str();
  sc_inv->add_option("--seed", inv.cfg.seed)->capture_default_str();

  RenderArgs rend;
  auto* sc_render = app.add_subcommand("render", "Render one dataset sample to a target file");
  sc_render->add_option("--spec", rend.spec, "Toy generator spec")->required();
  sc_render->add_option("--data", rend.data, "Dataset directory")->required();
  sc_render->add_option("--index", rend.index, "Sample index")->capture_default_str();
  sc_render->add_option("--camera", rend.camera, "Camera angle")->capture_default_str();
  sc_render->add_option("--out", rend.out, "Output path")->required();

  EvalArgs ev;
  auto* sc_eval = app.add_subcommand("eval", "Edit-quality and distribution metrics");
  sc_eval->add_option("--before", ev.before, "Dataset directory before editing")->required();
  sc_eval->add_option("--after", ev.after, "Dataset directory after editing")->required();
  sc_eval->add_option("--out", ev.out, "Report JSON path")->required();
  sc_eval->add_option("--attr", ev.attr, "Restrict to one attribute");
  sc_eval->add_option("--threshold", ev.threshold, "Score threshold")->capture_default_str();
  sc_eval->add_option("--sim-threshold", ev.sim_threshold, "Cosine threshold")->capture_default_str();
  sc_eval->add_option("--kid-subset-size", ev.kid_subset_size)->capture_default_str();
  sc_eval->add_option("--kid-subsets", ev.kid_subsets)->capture_default_str();
  sc_eval->add_option("--seed", ev.seed)->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidation;
  }

  try {
    if (*sc_synth) cmd_synth(synth, resolved_argv(*sc_synth), out);
    else if (*sc_rank) cmd_rank(rank, resolved_argv(*sc_rank), out);
    else if (*sc_edit) cmd_edit(edit, resolved_argv(*sc_edit), out);
    else if (*sc_dci) cmd_dci(dci_args, resolved_argv(*sc_dci), out);
    else if (*sc_inv) cmd_invert(inv, resolved_argv(*sc_inv), out);
    else if (*sc_render) cmd_render(rend, resolved_argv(*sc_render), out);
    else if (*sc_eval) cmd_eval(ev, resolved_argv(*sc_eval), out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace lsw::cli
