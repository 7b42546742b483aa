#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lsw/common.hpp"

namespace lsw::forest {

enum class FeatureFraction { Sqrt, Third, All };

struct ForestConfig {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_leaf = 5;
  std::variant<FeatureFraction, std::size_t> max_features = FeatureFraction::Sqrt;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate(std::size_t n_dims) const;
  // Features examined per node for a D-dimensional input.
  std::size_t features_per_node(std::size_t n_dims) const;
};

struct Node {
  std::int32_t split_dim = -1;  // -1 marks a leaf
  double threshold = 0.0;       // x[split_dim] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;           // mean target of the node's samples
  double impurity_decrease = 0.0;
  std::size_t n_samples = 0;

  bool is_leaf() const { return split_dim < 0; }
};

struct Tree {
  std::vector<Node> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct ForestModel {
  std::size_t n_features = 0;
  std::vector<Tree> trees;
  std::vector<double> importances;
  std::optional<double> oob_error;  // out-of-bag MSE when bootstrap was on

  double predict(std::span<const double> x) const;
  Vector predict(const Matrix& x) const;
};

// CART regression forest on continuous targets. Splits minimize the summed
// squared error of the children; thresholds sit at midpoints between
// consecutive distinct values. Splits whose error is equal up to rounding are
// tied; ties prefer the dimension whose sorted distinct training values come
// first lexicographically (identical columns: the lower index), then the lower
// threshold. Splits therefore follow column content, not column position.
// Trees draw from independent seed-derived RNG streams, so the
// result does not depend on the worker count.
ForestModel fit(const Matrix& x, std::span<const double> targets, const ForestConfig& cfg);

inline double predict(const ForestModel& model, std::span<const double> x) { return model.predict(x); }

// Impurity-weighted importance: per tree, each split credits its dimension
// with the decrease in summed squared error; trees are normalized, averaged,
// then renormalized. All zeros when no tree has a split.
std::vector<double> mdi_importance(const ForestModel& model);

std::string to_json(const ForestModel& model);
ForestModel from_json(const std::string& text);

}  // namespace lsw::forest
