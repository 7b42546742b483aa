// Acceptance checks on the toy substrate. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lsw/cli.hpp"
#include "lsw/dci.hpp"
#include "lsw/editor.hpp"
#include "lsw/evalsuite.hpp"
#include "lsw/inversion.hpp"
#include "lsw/ranking.hpp"
#include "lsw/toygen.hpp"
#include "support.hpp"

using namespace lsw;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double time_limit_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (time_limit_s > 0 && secs >= time_limit_s) {
    c.pass = false;
    c.detail << " [over time limit " << time_limit_s << " s]";
  }
  failures += !c.pass;
  std::cout << (c.pass ? "PASS " : "FAIL ") << name << ":" << c.detail.str() << " (" << std::fixed
            << std::setprecision(2) << secs << " s)" << std::endl;
  std::cout.unsetf(std::ios::fixed);
}

const toygen::ToyGenerator& toy() {
  static const toygen::ToyGenerator gen(toygen::ToyGeneratorSpec::make_default(7));
  return gen;
}

editor::IdentityLoss toy_identity(const toygen::ToyGenerator& gen) {
  return [&gen](const Vector& a, const Vector& b) { return gen.identity_loss(gen.render(a, 0.0), gen.render(b, 0.0)); };
}

FeatureRanking random_ranking(std::size_t d, std::mt19937_64& rng) {
  FeatureRanking r;
  r.attribute = "attr0";
  r.order.resize(d);
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::shuffle(r.order.begin(), r.order.end(), rng);
  r.importances.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) r.importances[r.order[i]] = static_cast<double>(d - i);
  return r;
}

void swap_algebra(Check& c) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 256);
  std::size_t passed = 0;
  const std::size_t cases = 1000;
  for (std::size_t t = 0; t < cases; ++t) {
    const std::size_t d = dim(rng);
    const auto r = random_ranking(d, rng);
    const Vector x = testing::gaussian(d, 1, rng()).col(0);
    const Vector y = testing::gaussian(d, 1, rng()).col(0);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, d)(rng);
    const Vector e = editor::swap_top_k(x, y, r, k);
    bool ok = editor::swap_top_k(x, y, r, 0) == x && editor::swap_top_k(x, y, r, d) == y;
    ok = ok && editor::swap_top_k(e, y, r, k) == e;
    std::vector<bool> top(d, false);
    for (std::size_t i = 0; i < k; ++i) top[r.order[i]] = true;
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      ok = ok && e(ii) == (top[i] ? y(ii) : x(ii));
    }
    passed += ok;
  }
  c.detail << " " << passed << "/" << cases << " cases";
  c.require(passed == cases, "100% of cases");
}

void planted_recovery(Check& c) {
  const auto& gen = toy();
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t attr = seed % 4;
    const auto s = gen.sample_dataset(10000, seed).second;
    forest::ForestConfig cfg;
    cfg.seed = seed;
    const auto r = ranking::rank_forest(s, s.attribute_names[attr], cfg);
    const auto& planted = gen.spec().planted_dims[attr];
    hits += std::find(planted.begin(), planted.end(), r.order[0]) != planted.end();
  }
  c.detail << " planted dim at rank 0 in " << hits << "/20 seeds";
  c.require(hits >= 18, ">= 18/20");
}

void periodicity(Check& c) {
  const auto& gen = toy();
  const auto smp = gen.sample_latents(200, 5);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < smp.s.rows(); ++i) {
    const Vector s = smp.s.row(i).transpose();
    const double cam = 0.01 * static_cast<double>(i % 50) - 0.25;
    const Vector base = gen.render(s, cam).pixels;
    for (auto d : gen.spec().beta_role_dims()) {
      Vector t = s;
      t(static_cast<Eigen::Index>(d)) += 2.0 * std::numbers::pi;
      worst = std::max(worst, (gen.render(t, cam).pixels - base).cwiseAbs().maxCoeff());
    }
    Vector all = s;
    for (auto d : gen.spec().beta_role_dims()) all(static_cast<Eigen::Index>(d)) -= 2.0 * std::numbers::pi;
    worst = std::max(worst, (gen.render(all, cam).pixels - base).cwiseAbs().maxCoeff());
  }
  c.detail << " max render change " << worst;
  c.require(worst < 1e-9, "render change < 1e-9");

  // Remove the attribute from positive samples with both editors at the same K.
  const auto data = gen.sample_dataset(5000, 6).second;
  forest::ForestConfig fc;
  fc.n_trees = 50;
  editor::EditConfig ec;
  ec.attribute = "attr2";
  ec.direction = editor::Direction::Remove;
  ec.ranking = ranking::rank_forest(data, "attr2", fc);
  ec.k_grid = editor::default_k_grid(gen.spec().d_s);
  const auto id = toy_identity(gen);
  const auto pool = gen.sample_dataset(600, 7).second;
  double lin_worst = 0.0, swap_mean = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pool.n_samples() && n < 200; ++i) {
    if (pool.scores(static_cast<Eigen::Index>(i), 2) < 0.5) continue;
    ++n;
    const Vector x = pool.latents.row(static_cast<Eigen::Index>(i)).transpose();
    const double before = gen.oracle_classify(gen.render(x, 0.0))(2);
    const auto res = editor::choose_k(x, data, ec, id);
    const Vector ref = data.latents.row(static_cast<Eigen::Index>(res.reference_index)).transpose();
    const Vector lin = editor::linear_edit_baseline(x, ref, ec.ranking, res.chosen_k, 2.0 * std::numbers::pi);
    lin_worst = std::max(lin_worst, std::abs(gen.oracle_classify(gen.render(lin, 0.0))(2) - before));
    swap_mean += std::abs(gen.oracle_classify(gen.render(res.edited_latent, 0.0))(2) - before);
  }
  swap_mean /= static_cast<double>(n);
  c.detail << "; " << n << " positive->negative cases: linear 2pi max score change " << lin_worst
           << ", swap mean score change " << swap_mean;
  c.require(lin_worst < 0.01, "linear change < 0.01");
  c.require(swap_mean > 0.5, "swap change > 0.5");
}

void dci_checks(Check& c) {
  Matrix diag = Matrix::Zero(6, 6);
  diag.diagonal() << 0.1, 0.3, 0.2, 0.15, 0.05, 0.2;
  const auto d = dci::scores_from_importance(diag);
  const auto u = dci::scores_from_importance(Matrix::Ones(64, 4));
  c.detail << " diagonal D=" << d.disentanglement << " C=" << d.completeness << "; uniform D=" << u.disentanglement
           << " C=" << u.completeness;
  c.require(std::abs(d.disentanglement - 1.0) < 1e-9 && std::abs(d.completeness - 1.0) < 1e-9, "diagonal = 1");
  c.require(u.disentanglement < 0.05 && u.completeness < 0.05, "uniform < 0.05");

  int wins = 0;
  dci::DciScores mean_z, mean_s;
  double inf_z = 0, inf_s = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [z, s] = toy().sample_dataset(3000, 100 + seed);
    forest::ForestConfig cfg;
    cfg.n_trees = 30;
    cfg.seed = seed;
    auto [zt, ze] = split_train_test(z);
    auto [st, se] = split_train_test(s);
    const auto rz = dci::compute_dci(zt, ze, cfg);
    const auto rs = dci::compute_dci(st, se, cfg);
    wins += rs.disentanglement > rz.disentanglement && rs.completeness > rz.completeness &&
            rs.informativeness > rz.informativeness;
    mean_z.disentanglement += rz.disentanglement / 10;
    mean_z.completeness += rz.completeness / 10;
    mean_s.disentanglement += rs.disentanglement / 10;
    mean_s.completeness += rs.completeness / 10;
    inf_z += rz.informativeness / 10;
    inf_s += rs.informativeness / 10;
  }
  c.detail << "; S beats Z on all three in " << wins << "/10 seeds (mean S " << mean_s.disentanglement << "/"
           << mean_s.completeness << "/" << inf_s << " vs Z " << mean_z.disentanglement << "/" << mean_z.completeness
           << "/" << inf_z << ")";
  c.require(wins == 10, "10/10 seeds");
}

void edit_effectiveness(Check& c) {
  const auto& gen = toy();
  const auto data = gen.sample_dataset(10000, 1).second;
  editor::EditConfig ec;
  ec.attribute = "attr0";
  ec.tau = 0.25;
  ec.support_n = 32;
  ec.ranking = ranking::rank_forest(data, "attr0", forest::ForestConfig{});
  ec.k_grid = editor::default_k_grid(gen.spec().d_s);
  const auto id = toy_identity(gen);
  const auto pool = gen.sample_dataset(6000, 99).second;
  std::size_t n = 0, flipped = 0;
  for (std::size_t i = 0; i < pool.n_samples() && n < 2000; ++i) {
    if (pool.scores(static_cast<Eigen::Index>(i), 0) >= 0.5) continue;
    ++n;
    const auto res = editor::choose_k(pool.latents.row(static_cast<Eigen::Index>(i)).transpose(), data, ec, id);
    flipped += gen.oracle_classify(gen.render(res.edited_latent, 0.0))(0) >= 0.5;
  }
  const double rate = static_cast<double>(flipped) / static_cast<double>(n);
  c.detail << " post-edit positive rate " << rate << " over " << n << " samples";
  c.require(n == 2000, "2000 samples");
  c.require(rate >= 0.9, "rate >= 0.9");
}

void identity_trend(Check& c) {
  const auto& gen = toy();
  const auto id = toy_identity(gen);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = gen.sample_dataset(5000, 200 + seed).second;
    forest::ForestConfig fc;
    fc.n_trees = 50;
    fc.seed = seed;
    editor::EditConfig ec;
    ec.attribute = "attr1";
    ec.ranking = ranking::rank_forest(data, "attr1", fc);
    ec.k_grid = editor::default_k_grid(gen.spec().d_s);
    const auto pool = gen.sample_dataset(1000, 300 + seed).second;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < pool.n_samples() && rows.size() < 300; ++i)
      if (pool.scores(static_cast<Eigen::Index>(i), 1) < 0.5) rows.push_back(i);
    double rate[2];
    const double taus[2] = {0.15, 0.45};
    for (int t = 0; t < 2; ++t) {
      ec.tau = taus[t];
      Matrix before(static_cast<Eigen::Index>(rows.size()), 16), after(before.rows(), 16);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Vector x = pool.latents.row(static_cast<Eigen::Index>(rows[r])).transpose();
        const auto res = editor::choose_k(x, data, ec, id);
        before.row(static_cast<Eigen::Index>(r)) = gen.identity_embed(gen.render(x, 0.0)).transpose();
        after.row(static_cast<Eigen::Index>(r)) = gen.identity_embed(gen.render(res.edited_latent, 0.0)).transpose();
      }
      rate[t] = evalsuite::identity_preservation(before, after, 0.8);
    }
    ok += rate[0] > rate[1];
    c.detail << " seed" << seed << " " << rate[0] << ">" << rate[1];
  }
  c.require(ok == 5, "5/5 seeds");
}

void inversion_checks(Check& c) {
  const auto& gen = toy();
  inversion::InversionConfig cfg;
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Vector truth = gen.sample_latents(1, 1000 + seed).s.row(0).transpose();
    const double cam = -0.3 + 0.06 * static_cast<double>(seed);
    cfg.seed = seed;
    const auto res = inversion::invert(gen, gen.render(truth, cam), cfg);
    good += res.final_loss < 1e-3 && std::abs(res.camera_hat - cam) < 0.02;
  }
  c.detail << " recovered " << good << "/10";
  c.require(good >= 8, ">= 8/10");

  // Gradient check against a fourth-order central difference of the loss.
  double worst = 0.0;
  const auto smp = gen.sample_latents(10, 77);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Vector s = smp.s.row(i).transpose();
    const Vector target = gen.render(smp.s.row(i + 5).transpose(), 0.1).pixels;
    const inversion::InversionObjective obj(inversion::wrap(gen), target, cfg);
    const Vector g = obj.latent_gradient(s, 0.0, cfg.fd_epsilon);
    Vector ref(s.size());
    const double h = 1e-3;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      auto at = [&](double off) {
        Vector p = s;
        p(k) += off;
        return obj(p, 0.0);
      };
      ref(k) = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
    }
    worst = std::max(worst, (g - ref).norm() / ref.norm());
    const double gc = obj.camera_gradient(s, 0.0, cfg.fd_epsilon);
    auto cam_at = [&](double c0) { return obj(s, c0); };
    const double rc = (cam_at(-2 * h) - 8 * cam_at(-h) + 8 * cam_at(h) - cam_at(2 * h)) / (12 * h);
    worst = std::max(worst, std::abs(gc - rc) / std::abs(rc));
  }
  c.detail << "; gradient max relative error " << worst;
  c.require(worst < 1e-3, "gradient rel err < 1e-3");
}

Matrix offset(Matrix m, double v) {
  m.array() += v;
  return m;
}

void metric_sanity(Check& c) {
  const Matrix a = testing::gaussian(5000, 16, 1);
  const double self = evalsuite::frechet_distance(a, a).distance;
  const Matrix b = testing::gaussian(10000, 16, 2), b2 = testing::gaussian(10000, 16, 3);
  Vector v = Vector::LinSpaced(16, -1.0, 1.0);
  Matrix shifted = b2;
  shifted.rowwise() += v.transpose();
  const double fd = evalsuite::frechet_distance(b, shifted).distance;
  const double rel = std::abs(fd - v.squaredNorm()) / v.squaredNorm();
  const double kid = evalsuite::kernel_distance(b, b2, 1000, 50, 0);
  c.detail << " FD(a,a)=" << self << " offset FD rel err " << rel << " KID null " << kid;
  c.require(self < 1e-6, "FD(a,a) < 1e-6");
  c.require(rel < 0.05, "offset within 5%");
  c.require(std::abs(kid) <= 0.01, "KID null within 0.01");
}

std::string read_replacing(const fs::path& p, const std::string& from, const std::string& to) {
  auto s = testing::read_bytes(p);
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

void cli_determinism(Check& c) {
  auto pipeline = [](const fs::path& root) {
    const auto p = [&root](const char* rel) { return (root / rel).string(); };
    const std::vector<std::vector<std::string>> steps{
        {"synth", "--n", "2000", "--seed", "5", "--out", p("data")},
        {"rank", "--data", p("data/s"), "--attr", "attr1", "--out", p("rank_forest.json")},
        {"rank", "--data", p("data/s"), "--attr", "attr1", "--ranker", "score_topk", "--out", p("rank_score.json")},
        {"rank", "--data", p("data/s"), "--attr", "attr1", "--ranker", "linear_coef", "--out", p("rank_lin.json")},
        {"edit", "--data", p("data/s"), "--ranking", p("rank_forest.json"), "--attr", "attr1", "--limit", "100",
         "--out", p("edit")},
        {"edit", "--data", p("data/z"), "--ranking", p("rank_forest.json"), "--attr", "attr1", "--limit", "20",
         "--dir", "remove", "--out", p("edit_z")},
        {"eval", "--before", p("edit/before"), "--after", p("edit/after"), "--kid-subset-size", "50", "--out",
         p("eval.json")},
        {"dci", "--data-z", p("data/z"), "--data-s", p("data/s"), "--n-trees", "20", "--out", p("dci.json")},
        {"render", "--spec", p("data/spec.json"), "--data", p("data/s"), "--index", "4", "--camera", "0.2", "--out",
         p("target.f32")},
        {"invert", "--spec", p("data/spec.json"), "--target", p("target.f32"), "--alternations", "5", "--final-steps",
         "20", "--out", p("inv.json")},
    };
    std::ostringstream out, err;
    for (const auto& args : steps)
      if (cli::run(args, out, err) != 0) throw std::runtime_error("lsw " + args[0] + " failed: " + err.str());
  };
  const auto a = testing::scratch_dir("accept_cli_a"), b = testing::scratch_dir("accept_cli_b");
  pipeline(a);
  pipeline(b);
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), a);
    same += fs::exists(b / rel) && testing::read_bytes(a / rel) == read_replacing(b / rel, b.string(), a.string());
  }
  c.detail << " " << same << "/" << files << " output files byte-identical across reruns";
  c.require(files > 0 && same == files, "all files identical");
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // namespace

int main() {
  criterion("swap algebra (1000 cases, D <= 256)", 5.0, swap_algebra);
  criterion("planted-dimension recovery (20 seeds, n=10000)", 120.0, planted_recovery);
  criterion("periodicity invariance", 0.0, periodicity);
  criterion("DCI extremes and S-vs-Z trend", 0.0, dci_checks);
  criterion("edit effectiveness (2000 samples, tau=0.25, support 32)", 300.0, edit_effectiveness);
  criterion("identity trend (tau 0.15 vs 0.45, 5 seeds)", 0.0, identity_trend);
  criterion("inversion self-consistency and gradient check", 0.0, inversion_checks);
  criterion("metric sanity", 0.0, metric_sanity);
  criterion("CLI determinism", 0.0, cli_determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
