#include "lsw/editor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lsw::editor {

std::string_view to_string(Direction d) { return d == Direction::Add ? "add" : "remove"; }

Direction direction_from_string(std::string_view s) {
  if (s == "add" || s == "+") return Direction::Add;
  if (s == "remove" || s == "-") return Direction::Remove;
  throw ValidationError("direction must be 'add' or 'remove', got '" + std::string(s) + "'");
}

void EditConfig::validate(std::size_t n_dims) const {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in (0, 1], got " + std::to_string(tau));
  if (support_n < 1) throw ValidationError("support_n must be at least 1");
  if (k_grid.empty()) throw ValidationError("k_grid must not be empty");
  for (std::size_t i = 1; i < k_grid.size(); ++i)
    if (k_grid[i] <= k_grid[i - 1]) throw ValidationError("k_grid must be strictly ascending");
  if (k_grid.back() > n_dims) throw ValidationError("k_grid entries must not exceed D");
  if (ranking.n_dims() != n_dims) throw ValidationError("ranking dimension differs from latent dimension");
}

std::vector<std::size_t> default_k_grid(std::size_t n_dims) {
  const std::size_t cap = std::min<std::size_t>(n_dims, 4096);
  std::vector<std::size_t> grid;
  for (std::size_t k = 1; k <= cap; k *= 2) grid.push_back(k);
  if (cap > 0 && grid.back() != cap) grid.push_back(cap);
  return grid;
}

double default_tau(std::string_view domain) { return domain == "face" ? 0.25 : 0.1; }

namespace {

double cosine(const Vector& a, const Vector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace

std::size_t select_reference(const LatentDataset& ds, const EditConfig& cfg, const Vector& target) {
  const auto n = ds.n_samples();
  if (n == 0) throw ValidationError("select_reference: empty dataset");
  if (cfg.support_n < 1) throw ValidationError("support_n must be at least 1");
  if (static_cast<std::size_t>(target.size()) != ds.n_dims())
    throw ValidationError("select_reference: target dimension differs from dataset");
  const auto a = static_cast<Eigen::Index>(ds.attribute_index(cfg.attribute));

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const bool add = cfg.direction == Direction::Add;
  const std::size_t m = std::min(cfg.support_n, n);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                    [&](std::size_t i, std::size_t j) {
                      const double si = ds.scores(static_cast<Eigen::Index>(i), a);
                      const double sj = ds.scores(static_cast<Eigen::Index>(j), a);
                      if (si != sj) return add ? si > sj : si < sj;
                      return i < j;
                    });

  std::size_t best = idx[0];
  double best_cos = -2.0;
  std::vector<std::size_t> support(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(support.begin(), support.end());
  for (auto i : support) {
    const double c = cosine(ds.latents.row(static_cast<Eigen::Index>(i)).transpose(), target);
    if (c > best_cos) {
      best_cos = c;
      best = i;
    }
  }
  return best;
}

Vector swap_top_k(const Vector& target, const Vector& reference, const FeatureRanking& ranking, std::size_t k) {
  const auto d = static_cast<std::size_t>(target.size());
  if (static_cast<std::size_t>(reference.size()) != d || ranking.order.size() != d)
    throw ValidationError("swap_top_k: dimension mismatch");
  if (k > d) throw ValidationError("swap_top_k: k=" + std::to_string(k) + " exceeds D=" + std::to_string(d));
  Vector out = target;
  for (std::size_t i = 0; i < k; ++i) {
    const auto dim = static_cast<Eigen::Index>(ranking.order[i]);
    out(dim) = reference(dim);
  }
  return out;
}

EditResult choose_k(const Vector& target, const LatentDataset& ds, const EditConfig& cfg, const IdentityLoss& id_loss) {
  cfg.validate(ds.n_dims());
  EditResult res;
  res.reference_index = select_reference(ds, cfg, target);
  const Vector reference = ds.latents.row(static_cast<Eigen::Index>(res.reference_index)).transpose();

  std::vector<Vector> edits;
  edits.reserve(cfg.k_grid.size());
  std::ptrdiff_t chosen = -1;
  for (std::size_t g = 0; g < cfg.k_grid.size(); ++g) {
    edits.push_back(swap_top_k(target, reference, cfg.ranking, cfg.k_grid[g]));
    const double loss = id_loss(target, edits.back());
    if (!(loss >= 0.0) || !std::isfinite(loss))
      throw ValidationError("identity loss must be finite and non-negative, got " + std::to_string(loss));
    res.grid_losses.push_back(loss);
    if (loss < cfg.tau) chosen = static_cast<std::ptrdiff_t>(g);
  }
  res.satisfied = chosen >= 0;
  const auto g = static_cast<std::size_t>(res.satisfied ? chosen : 0);
  res.chosen_k = cfg.k_grid[g];
  res.identity_loss = res.grid_losses[g];
  res.edited_latent = std::move(edits[g]);
  return res;
}

Vector linear_edit_baseline(const Vector& target, const Vector& reference, const FeatureRanking& ranking,
                            std::size_t k, double step) {
  const auto d = static_cast<std::size_t>(target.size());
  if (static_cast<std::size_t>(reference.size()) != d || ranking.order.size() != d)
    throw ValidationError("linear_edit_baseline: dimension mismatch");
  if (k > d) throw ValidationError("linear_edit_baseline: k exceeds D");
  Vector out = target;
  for (std::size_t i = 0; i < k; ++i) {
    const auto dim = static_cast<Eigen::Index>(ranking.order[i]);
    const double diff = reference(dim) - target(dim);
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    out(dim) = target(dim) + step * sign;
  }
  return out;
}

}  // namespace lsw::editor
