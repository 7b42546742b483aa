#include <doctest.h>

#include <numeric>

#include "lsw/ranking.hpp"
#include "support.hpp"

using namespace lsw;
using namespace lsw::ranking;

namespace {

forest::ForestConfig forest_cfg(std::uint64_t seed = 0, std::size_t trees = 30) {
  forest::ForestConfig cfg;
  cfg.n_trees = trees;
  cfg.seed = seed;
  return cfg;
}

std::size_t position(const FeatureRanking& r, std::size_t dim) {
  return static_cast<std::size_t>(std::find(r.order.begin(), r.order.end(), dim) - r.order.begin());
}

// Absolute Pearson correlation of every column with y, computed directly.
std::vector<double> abs_correlations(const Matrix& x, const Matrix& y) {
  std::vector<double> out;
  const double ym = y.col(0).mean();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double xm = x.col(j).mean();
    double sxy = 0, sxx = 0, syy = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      sxy += (x(i, j) - xm) * (y(i, 0) - ym);
      sxx += (x(i, j) - xm) * (x(i, j) - xm);
      syy += (y(i, 0) - ym) * (y(i, 0) - ym);
    }
    out.push_back(std::abs(sxy) / std::sqrt(sxx * syy));
  }
  return out;
}

// Target periodic in `dim` (even, so uncorrelated with it) plus weak linear
// cues on `cues` other dimensions.
LatentDataset periodic_dataset(std::size_t dim, std::size_t cues, std::uint64_t seed) {
  const std::size_t n = 1500, d = 64;
  Matrix x = testing::gaussian(n, d, seed);
  Matrix y(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    double v = 4.0 * std::cos(2.5 * x(r, static_cast<Eigen::Index>(dim)));
    for (std::size_t c = 0; c < cues; ++c) v += 0.4 * x(r, static_cast<Eigen::Index>((dim + 1 + c) % d));
    y(r, 0) = testing::logistic(v);
  }
  return testing::make_dataset(std::move(x), std::move(y));
}

}  // namespace

TEST_CASE("forest ranking finds a logistic single-dimension attribute") {
  const auto ds = testing::single_dim_dataset(1000, 16, 7, 3.0, 4);
  const auto corr = abs_correlations(ds.latents, ds.scores);
  REQUIRE(std::max_element(corr.begin(), corr.end()) - corr.begin() == 7);
  const auto r = rank_forest(ds, "attr0", forest_cfg());
  CHECK(r.order[0] == 7);
  CHECK(r.ranker == RankerId::ForestMdi);
  CHECK_NOTHROW(r.validate());
  const auto again = rank_forest(ds, "attr0", forest_cfg());
  CHECK(again.order == r.order);
  CHECK(again.importances == r.importances);
}

TEST_CASE("constant scores give the identity order") {
  auto ds = testing::make_dataset(testing::gaussian(200, 6, 1), Matrix::Constant(200, 1, 0.3));
  std::vector<std::size_t> identity(6);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  CHECK(rank_forest(ds, "attr0", forest_cfg()).order == identity);
  CHECK(rank_score_topk(ds, "attr0").order == identity);
  CHECK_THROWS_AS(rank_linear_coef(ds, "attr0", {}), ValidationError);  // single class
  CHECK_THROWS_AS(rank_forest(ds, "missing", forest_cfg()), ValidationError);
}

TEST_CASE("score ranker on an exact copy of a dimension") {
  Matrix x = testing::uniform(2000, 8, 3);
  Matrix y = x.col(2);
  const auto r = rank_score_topk(testing::make_dataset(x, y), "attr0");
  CHECK(r.order[0] == 2);
  CHECK(r.importances[2] == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("score ranker on pure noise is close to uniform") {
  const std::size_t d = 10;
  std::vector<double> mean(d, 0.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = rank_score_topk(
        testing::make_dataset(testing::gaussian(1000, d, seed), testing::uniform(1000, 1, 1000 + seed)), "attr0");
    for (std::size_t j = 0; j < d; ++j) mean[j] += r.importances[j] / 50.0;
  }
  for (double m : mean) CHECK(m <= 3.0 / static_cast<double>(d));
}

TEST_CASE("constant dimension scores zero") {
  auto ds = testing::single_dim_dataset(500, 5, 1, 2.0, 7);
  ds.latents.col(3).setConstant(1.25);
  CHECK(rank_score_topk(ds, "attr0").importances[3] == 0.0);
  CHECK(rank_linear_coef(ds, "attr0", {}).importances[3] == 0.0);
}

TEST_CASE("linear ranker on a separable dimension") {
  Matrix x = testing::gaussian(600, 8, 12);
  Matrix y(600, 1);
  for (Eigen::Index i = 0; i < 600; ++i) {
    x(i, 4) += x(i, 4) > 0 ? 0.5 : -0.5;  // margin of 1 around zero
    y(i, 0) = x(i, 4) > 0 ? 0.9 : 0.1;
  }
  // Oracle: dim 4 is the only column whose best stump separates the labels.
  for (Eigen::Index d = 0; d < 8; ++d) {
    double lo_pos = 1e9, hi_neg = -1e9;
    for (Eigen::Index i = 0; i < 600; ++i) {
      if (y(i, 0) > 0.5) lo_pos = std::min(lo_pos, x(i, d));
      else hi_neg = std::max(hi_neg, x(i, d));
    }
    const bool separates = lo_pos > hi_neg;
    CHECK(separates == (d == 4));
  }
  const auto r = rank_linear_coef(testing::make_dataset(x, y), "attr0", {});
  CHECK(r.order[0] == 4);
  CHECK(r.ranker == RankerId::LinearCoef);
  CHECK_NOTHROW(r.validate());
}

TEST_CASE("huge l2 shrinks every coefficient to zero") {
  const auto ds = testing::single_dim_dataset(400, 6, 2, 3.0, 3);
  LinearConfig cfg;
  cfg.l2 = 1e12;
  const auto r = rank_linear_coef(ds, "attr0", cfg);
  CHECK(r.order == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  for (double v : r.importances) CHECK(v == 0.0);
  cfg.l2 = 0.0;
  CHECK_THROWS_AS(rank_linear_coef(ds, "attr0", cfg), ValidationError);
}

TEST_CASE("rankers agree on monotone attributes") {
  int agree = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const std::size_t dim = trial % 12;
    const auto ds = testing::single_dim_dataset(600, 12, dim, 2.0, 500 + trial);
    const auto a = rank_forest(ds, "attr0", forest_cfg(trial, 20));
    const auto b = rank_score_topk(ds, "attr0");
    const auto c = rank_linear_coef(ds, "attr0", {.l2 = 1e-2, .epochs = 20, .seed = trial});
    agree += a.order[0] == dim && b.order[0] == dim && c.order[0] == dim;
  }
  CHECK(agree >= 45);
}

TEST_CASE("periodic attribute defeats the linear ranker") {
  int wins = 0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const std::size_t dim = (trial * 7) % 64;
    const auto ds = periodic_dataset(dim, 30, 900 + trial);
    const auto forest_rank = rank_forest(ds, "attr0", forest_cfg(trial, 40));
    const auto linear_rank = rank_linear_coef(ds, "attr0", {.l2 = 1e-2, .epochs = 20, .seed = trial});
    wins += position(forest_rank, dim) < 5 && position(linear_rank, dim) >= 25;
  }
  CHECK(wins >= 8);
}
