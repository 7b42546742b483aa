#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "lsw/common.hpp"

namespace lsw::evalsuite {

struct CorrectnessRates {
  double before = 0.0;
  double after = 0.0;
};

// Fraction of scores >= threshold before and after editing.
CorrectnessRates semantic_correctness(std::span<const double> before, std::span<const double> after,
                                      double threshold = 0.5);

// Fraction of matched rows whose cosine similarity is >= sim_threshold.
double identity_preservation(const Matrix& before, const Matrix& after, double sim_threshold = 0.5);

struct FrechetResult {
  double distance = 0.0;
  bool regularized = false;  // 1e-6 was added to both covariance diagonals
};

// ||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa^{1/2} Sb Sa^{1/2})^{1/2}).
FrechetResult frechet_distance(const Matrix& a, const Matrix& b);

// Unbiased MMD^2 with kernel (x.y / E + 1)^3, averaged over n_subsets random
// subsets of subset_size rows drawn without replacement from each side.
double kernel_distance(const Matrix& a, const Matrix& b, std::size_t subset_size, std::size_t n_subsets,
                       std::uint64_t seed);

}  // namespace lsw::evalsuite
