#include <doctest.h>

#include <numeric>

#include "lsw/dci.hpp"
#include "lsw/toygen.hpp"
#include "support.hpp"

using namespace lsw;
using namespace lsw::dci;

namespace {

// Independent evaluation of the entropy formulas with base-2 logs.
DciScores oracle(const Matrix& r) {
  const auto d = r.rows(), a = r.cols();
  DciScores s;
  const double total = r.sum();
  for (Eigen::Index i = 0; i < d; ++i) {
    double row = 0.0, h = 0.0;
    for (Eigen::Index j = 0; j < a; ++j) row += r(i, j);
    if (row == 0.0) continue;
    for (Eigen::Index j = 0; j < a; ++j)
      if (r(i, j) > 0.0) h -= (r(i, j) / row) * std::log2(r(i, j) / row);
    s.disentanglement += (row / total) * (1.0 - h / std::log2(static_cast<double>(a)));
  }
  for (Eigen::Index j = 0; j < a; ++j) {
    double col = 0.0, h = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) col += r(i, j);
    if (col == 0.0) continue;
    for (Eigen::Index i = 0; i < d; ++i)
      if (r(i, j) > 0.0) h -= (r(i, j) / col) * std::log2(r(i, j) / col);
    s.completeness += (1.0 - h / std::log2(static_cast<double>(d))) / static_cast<double>(a);
  }
  return s;
}

// Latents where attribute j is a threshold of dim j plus noise dims.
LatentDataset factor_dataset(std::size_t n, std::uint64_t seed) {
  Matrix x = testing::gaussian(n, 6, seed);
  Matrix y(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < 3; ++j) y(i, j) = testing::logistic(4.0 * x(i, j) + 0.5 * x(i, (j + 1) % 3));
  auto ds = testing::make_dataset(std::move(x), std::move(y));
  return ds;
}

forest::ForestConfig exact_forest() {
  forest::ForestConfig cfg;
  cfg.n_trees = 5;
  cfg.bootstrap = false;
  cfg.max_features = forest::FeatureFraction::All;
  cfg.min_samples_leaf = 1;
  return cfg;
}

}  // namespace

TEST_CASE("diagonal importance is perfectly disentangled and complete") {
  Matrix r = Matrix::Zero(4, 4);
  r.diagonal() << 0.3, 0.2, 0.4, 0.1;
  const auto s = scores_from_importance(r);
  CHECK(std::abs(s.disentanglement - 1.0) < 1e-9);
  CHECK(std::abs(s.completeness - 1.0) < 1e-9);

  Matrix tall = Matrix::Zero(6, 3);
  tall(1, 0) = tall(3, 1) = tall(5, 2) = 1.0;
  const auto t = scores_from_importance(tall);
  CHECK(std::abs(t.disentanglement - 1.0) < 1e-9);
  CHECK(std::abs(t.completeness - 1.0) < 1e-9);
}

TEST_CASE("uniform importance scores near zero") {
  const auto s = scores_from_importance(Matrix::Ones(8, 4));
  CHECK(s.disentanglement < 0.05);
  CHECK(s.completeness < 0.05);
  CHECK(s.disentanglement == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scores agree with the base-2 oracle") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Matrix r = testing::uniform(2 + seed % 9, 2 + seed % 5, seed);
    if (seed % 3 == 0) r.row(0).setZero();
    const auto s = scores_from_importance(r);
    const auto o = oracle(r);
    CHECK(s.disentanglement == doctest::Approx(o.disentanglement).epsilon(1e-12));
    CHECK(s.completeness == doctest::Approx(o.completeness).epsilon(1e-12));
  }
}

TEST_CASE("importance-level permutation invariance") {
  const Matrix r = testing::uniform(7, 3, 9);
  std::vector<Eigen::Index> perm{4, 0, 6, 2, 1, 5, 3};
  Matrix p(7, 3);
  for (Eigen::Index i = 0; i < 7; ++i) p.row(i) = r.row(perm[static_cast<std::size_t>(i)]);
  const auto a = scores_from_importance(r), b = scores_from_importance(p);
  CHECK(std::abs(a.disentanglement - b.disentanglement) < 1e-12);
  CHECK(std::abs(a.completeness - b.completeness) < 1e-12);
}

TEST_CASE("invalid importance matrices") {
  CHECK_THROWS_AS(scores_from_importance(Matrix::Ones(1, 3)), ValidationError);
  CHECK_THROWS_AS(scores_from_importance(Matrix::Ones(3, 1)), ValidationError);
  Matrix neg = Matrix::Ones(3, 3);
  neg(1, 1) = -1.0;
  CHECK_THROWS_AS(scores_from_importance(neg), ValidationError);
  const auto z = scores_from_importance(Matrix::Zero(3, 3));
  CHECK(z.disentanglement == 0.0);
}

TEST_CASE("compute_dci on a factorized dataset") {
  const auto ds = factor_dataset(1500, 3);
  auto [train, test] = split_train_test(ds);
  forest::ForestConfig cfg;
  cfg.n_trees = 20;
  const auto rep = compute_dci(train, test, cfg);
  CHECK(rep.importance_matrix.rows() == 6);
  CHECK(rep.importance_matrix.cols() == 3);
  CHECK(rep.disentanglement > 0.6);
  CHECK(rep.informativeness > 0.85);
  CHECK(rep.per_attribute_accuracy.size() == 3);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(rep.importance_matrix.col(j).sum() == doctest::Approx(1.0));

  const auto json = to_json(rep);
  CHECK(json.find("\"disentanglement\"") != std::string::npos);
  const auto table = format_table({rep});
  CHECK(table.rfind("Space  Disent.  Compl.  Inform.\n", 0) == 0);
  CHECK(table.find("S ") != std::string::npos);
}

TEST_CASE("latent permutation permutes importance rows only") {
  const auto ds = factor_dataset(600, 5);
  const std::vector<std::size_t> perm{3, 5, 0, 4, 1, 2};
  auto permuted = ds;
  for (std::size_t k = 0; k < 6; ++k)
    permuted.latents.col(static_cast<Eigen::Index>(k)) = ds.latents.col(static_cast<Eigen::Index>(perm[k]));
  auto [tr, te] = split_train_test(ds);
  auto [ptr, pte] = split_train_test(permuted);
  const auto a = compute_dci(tr, te, exact_forest());
  const auto b = compute_dci(ptr, pte, exact_forest());
  for (std::size_t k = 0; k < 6; ++k)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(std::abs(b.importance_matrix(static_cast<Eigen::Index>(k), j) -
                     a.importance_matrix(static_cast<Eigen::Index>(perm[k]), j)) < 1e-9);
  CHECK(std::abs(a.disentanglement - b.disentanglement) < 1e-9);
  CHECK(std::abs(a.completeness - b.completeness) < 1e-9);
  CHECK(std::abs(a.informativeness - b.informativeness) < 1e-9);
}

TEST_CASE("attribute permutation leaves the scores unchanged") {
  const auto ds = factor_dataset(600, 6);
  auto permuted = ds;
  permuted.scores.col(0) = ds.scores.col(2);
  permuted.scores.col(2) = ds.scores.col(0);
  std::swap(permuted.attribute_names[0], permuted.attribute_names[2]);
  auto [tr, te] = split_train_test(ds);
  auto [ptr, pte] = split_train_test(permuted);
  const auto a = compute_dci(tr, te, exact_forest());
  const auto b = compute_dci(ptr, pte, exact_forest());
  CHECK(std::abs(a.disentanglement - b.disentanglement) < 1e-9);
  CHECK(std::abs(a.informativeness - b.informativeness) < 1e-9);
  CHECK(std::abs(a.completeness - b.completeness) < 1e-9);
}

TEST_CASE("duplicating every training sample leaves the scores unchanged") {
  const auto ds = factor_dataset(500, 7);
  auto [tr, te] = split_train_test(ds);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < tr.n_samples(); ++i) rows.insert(rows.end(), {i, i});
  const auto doubled = tr.select(rows);
  const auto a = compute_dci(tr, te, exact_forest());
  const auto b = compute_dci(doubled, te, exact_forest());
  CHECK(std::abs(a.disentanglement - b.disentanglement) < 1e-9);
  CHECK(std::abs(a.completeness - b.completeness) < 1e-9);
  CHECK(std::abs(a.informativeness - b.informativeness) < 1e-9);
}

TEST_CASE("toy S space beats Z space") {
  const toygen::ToyGenerator gen(toygen::ToyGeneratorSpec::make_default(7));
  const auto [z, s] = gen.sample_dataset(2000, 4);
  forest::ForestConfig cfg;
  cfg.n_trees = 20;
  auto [zt, ze] = split_train_test(z);
  auto [st, se] = split_train_test(s);
  const auto rz = compute_dci(zt, ze, cfg);
  const auto rs = compute_dci(st, se, cfg);
  CHECK(rz.space == LatentSpace::Z);
  CHECK(rs.disentanglement > rz.disentanglement + 0.2);
  CHECK(rs.completeness > rz.completeness);
  CHECK(rs.informativeness > rz.informativeness);
}

TEST_CASE("single-class attributes are rejected") {
  auto ds = factor_dataset(100, 1);
  ds.scores.col(1).setConstant(0.9);
  auto [tr, te] = split_train_test(ds);
  CHECK_THROWS_AS(compute_dci(tr, te, exact_forest()), ValidationError);
}
