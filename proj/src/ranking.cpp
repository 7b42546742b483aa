#include "lsw/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lsw::ranking {

namespace {

// Coefficients smaller than this are numerically indistinguishable from zero
// after Pegasos shrinkage and are reported as such.
constexpr double kZeroCoefficient = 1e-9;

std::vector<double> column(const Matrix& m, std::size_t j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, static_cast<Eigen::Index>(j));
  return out;
}

}  // namespace

FeatureRanking rank_forest(const LatentDataset& ds, std::string_view attribute, const forest::ForestConfig& cfg) {
  const auto a = ds.attribute_index(attribute);
  const auto targets = column(ds.scores, a);
  const auto model = forest::fit(ds.latents, targets, cfg);
  return FeatureRanking::from_scores(std::string(attribute), model.importances, RankerId::ForestMdi);
}

FeatureRanking rank_score_topk(const LatentDataset& ds, std::string_view attribute) {
  const auto a = static_cast<Eigen::Index>(ds.attribute_index(attribute));
  const auto n = ds.latents.rows();
  if (n < 2) throw ValidationError("score ranking needs at least two samples");
  const Vector y = ds.scores.col(a);
  const Vector yc = y.array() - y.mean();
  const double syy = yc.squaredNorm();
  std::vector<double> raw(ds.n_dims(), 0.0);
  // Constant columns are detected exactly; centering leaves rounding residue.
  if (y.minCoeff() < y.maxCoeff()) {
    for (Eigen::Index j = 0; j < ds.latents.cols(); ++j) {
      const Vector x = ds.latents.col(j);
      const Vector xc = x.array() - x.mean();
      if (!(x.minCoeff() < x.maxCoeff())) continue;
      const double sxx = xc.squaredNorm();
      const double sxy = xc.dot(yc);
      raw[static_cast<std::size_t>(j)] = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    }
  }
  return FeatureRanking::from_scores(std::string(attribute), std::move(raw), RankerId::ScoreTopk);
}

LinearModel train_linear_svm(const Matrix& x, const std::vector<int>& labels, const LinearConfig& cfg) {
  if (!(cfg.l2 > 0.0)) throw ValidationError("linear ranker: l2 must be positive");
  if (cfg.epochs < 1) throw ValidationError("linear ranker: epochs must be at least 1");
  const auto n = static_cast<std::size_t>(x.rows());
  Vector w = Vector::Zero(x.cols());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(mix_seed(cfg.seed));
  const double radius = 1.0 / std::sqrt(cfg.l2);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      ++t;
      const double eta = 1.0 / (cfg.l2 * static_cast<double>(t));
      const auto row = x.row(static_cast<Eigen::Index>(i));
      const double y = labels[i];
      const double margin = y * row.dot(w);
      w *= (1.0 - eta * cfg.l2);
      if (margin < 1.0) w += (eta * y) * row.transpose();
      const double norm = w.norm();
      if (norm > radius) w *= radius / norm;
    }
  }
  return LinearModel{std::move(w), 0.0};
}

FeatureRanking rank_linear_coef(const LatentDataset& ds, std::string_view attribute, const LinearConfig& cfg) {
  const auto a = static_cast<Eigen::Index>(ds.attribute_index(attribute));
  const auto n = ds.latents.rows();
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(i)] = ds.scores(i, a) >= 0.5 ? 1 : -1;
    pos += ds.scores(i, a) >= 0.5;
  }
  if (pos == 0 || pos == static_cast<std::size_t>(n))
    throw ValidationError("linear ranker: attribute '" + std::string(attribute) + "' has a single class");

  // Standardize; constant columns stay zero.
  Matrix x = ds.latents;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    x.col(j).array() -= mean;
    const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n));
    if (sd > 0.0) x.col(j) /= sd;
  }
  const auto model = train_linear_svm(x, labels, cfg);
  std::vector<double> raw(ds.n_dims());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double c = std::abs(model.weights(static_cast<Eigen::Index>(j)));
    raw[j] = c < kZeroCoefficient ? 0.0 : c;
  }
  return FeatureRanking::from_scores(std::string(attribute), std::move(raw), RankerId::LinearCoef);
}

}  // namespace lsw::ranking
