#pragma once

#include <cstdint>
#include <string_view>

#include "lsw/dataio.hpp"
#include "lsw/forest.hpp"

namespace lsw::ranking {

// Forest MDI importances of every latent dimension for one attribute score.
FeatureRanking rank_forest(const LatentDataset& ds, std::string_view attribute, const forest::ForestConfig& cfg);

// Univariate score: squared Pearson correlation of each dimension with the
// attribute score. Constant dimensions score 0.
FeatureRanking rank_score_topk(const LatentDataset& ds, std::string_view attribute);

struct LinearConfig {
  double l2 = 1e-2;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

// |coefficients| of a hinge-loss linear classifier trained by Pegasos-style
// SGD on standardized latents against scores binarized at 0.5.
FeatureRanking rank_linear_coef(const LatentDataset& ds, std::string_view attribute, const LinearConfig& cfg);

struct LinearModel {
  Vector weights;  // in standardized units
  double bias = 0.0;
};
LinearModel train_linear_svm(const Matrix& x_std, const std::vector<int>& labels, const LinearConfig& cfg);

}  // namespace lsw::ranking
