#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lsw/dataio.hpp"

namespace lsw::editor {

enum class Direction { Add, Remove };

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

struct EditConfig {
  std::string attribute;
  Direction direction = Direction::Add;
  double tau = 0.25;
  std::size_t support_n = 32;
  std::vector<std::size_t> k_grid;  // strictly ascending
  FeatureRanking ranking;

  void validate(std::size_t n_dims) const;
};

struct EditResult {
  Vector edited_latent;
  std::size_t reference_index = 0;
  std::size_t chosen_k = 0;
  double identity_loss = 0.0;
  bool satisfied = false;
  std::vector<double> grid_losses;  // identity loss at every k_grid entry
};

// Identity loss between the unedited and edited latent codes.
using IdentityLoss = std::function<double(const Vector& original, const Vector& edited)>;

// Powers of two up to min(D, 4096), closed with min(D, 4096) itself.
std::vector<std::size_t> default_k_grid(std::size_t n_dims);

// 0.25 for face datasets, 0.1 for every other domain.
double default_tau(std::string_view domain);

// Among the support_n most extreme samples for the attribute (highest scores
// for Add, lowest for Remove; ties by index), the one whose latent has the
// largest cosine similarity with `target`. Ties go to the lower index.
std::size_t select_reference(const LatentDataset& ds, const EditConfig& cfg, const Vector& target);

// Copies reference values into target on the first k dimensions of ranking.order.
Vector swap_top_k(const Vector& target, const Vector& reference, const FeatureRanking& ranking, std::size_t k);

// Largest grid K whose edit keeps id_loss strictly below tau. When no K
// qualifies, the smallest grid K is returned with satisfied = false.
EditResult choose_k(const Vector& target, const LatentDataset& ds, const EditConfig& cfg, const IdentityLoss& id_loss);

// Baseline: moves each of the top-k dimensions by step in the direction of
// sign(reference - target).
Vector linear_edit_baseline(const Vector& target, const Vector& reference, const FeatureRanking& ranking,
                            std::size_t k, double step);

}  // namespace lsw::editor
