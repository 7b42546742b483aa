#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "lsw/dataio.hpp"

namespace lsw::testing {

namespace fs = std::filesystem;

// Fresh, empty scratch directory unique to this process.
inline fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lsw_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline Matrix uniform(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Dataset with Gaussian latents and caller-provided scores.
inline LatentDataset make_dataset(Matrix latents, Matrix scores, std::vector<std::string> names = {}) {
  LatentDataset ds;
  ds.latents = std::move(latents);
  ds.scores = std::move(scores);
  if (names.empty())
    for (Eigen::Index j = 0; j < ds.scores.cols(); ++j) names.push_back("attr" + std::to_string(j));
  ds.attribute_names = std::move(names);
  ds.domain = "test";
  return ds;
}

// Single-attribute dataset whose score is logistic(gain * latents[:, dim]).
inline LatentDataset single_dim_dataset(std::size_t n, std::size_t d, std::size_t dim, double gain,
                                        std::uint64_t seed) {
  Matrix x = gaussian(n, d, seed);
  Matrix y(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i)
    y(static_cast<Eigen::Index>(i), 0) = logistic(gain * x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dim)));
  return make_dataset(std::move(x), std::move(y));
}

}  // namespace lsw::testing
