#include "lsw/forest.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

namespace lsw::forest {

namespace {

constexpr double kMinDecrease = 1e-12;
constexpr double kTieTolerance = 1e-12;

// Per-feature sort of the training rows, shared by all trees of one fit.
// Ties are ordered by row index, so ranks are unique.
struct SortedColumns {
  std::size_t n_rows = 0;
  std::size_t n_dims = 0;
  std::vector<std::vector<std::uint32_t>> order;  // order[f][k] = row with rank k
  std::vector<std::vector<double>> values;        // values[f][k] = x[order[f][k], f]
  std::vector<std::uint32_t> rank;                // rank[r * n_dims + f]

  explicit SortedColumns(const Eigen::MatrixXd& cols)
      : n_rows(static_cast<std::size_t>(cols.rows())), n_dims(static_cast<std::size_t>(cols.cols())) {
    order.resize(n_dims);
    values.resize(n_dims);
    rank.resize(n_rows * n_dims);
    for (std::size_t f = 0; f < n_dims; ++f) {
      auto& o = order[f];
      o.resize(n_rows);
      std::iota(o.begin(), o.end(), std::uint32_t{0});
      const double* c = cols.col(static_cast<Eigen::Index>(f)).data();
      std::stable_sort(o.begin(), o.end(), [c](std::uint32_t a, std::uint32_t b) { return c[a] < c[b]; });
      values[f].resize(n_rows);
      for (std::size_t k = 0; k < n_rows; ++k) {
        values[f][k] = c[o[k]];
        rank[o[k] * n_dims + f] = static_cast<std::uint32_t>(k);
      }
    }
    // Content key for tied splits: lexicographic order of each column's
    // sorted distinct values, then dimension index.
    std::vector<std::uint32_t> dims(n_dims);
    std::iota(dims.begin(), dims.end(), std::uint32_t{0});
    std::stable_sort(dims.begin(), dims.end(), [this](std::uint32_t a, std::uint32_t b) { return distinct_less(a, b); });
    key.resize(n_dims);
    for (std::size_t i = 0; i < n_dims; ++i) key[dims[i]] = static_cast<std::uint32_t>(i);
  }

  std::vector<std::uint32_t> key;  // key[f] = position of f in content order

 private:
  bool distinct_less(std::uint32_t a, std::uint32_t b) const {
    const auto& va = values[a];
    const auto& vb = values[b];
    std::size_t i = 0, j = 0;
    while (i < n_rows && j < n_rows) {
      if (va[i] != vb[j]) return va[i] < vb[j];
      const double v = va[i];
      while (i < n_rows && va[i] == v) ++i;
      while (j < n_rows && vb[j] == v) ++j;
    }
    return i == n_rows && j < n_rows;
  }
};

struct Candidate {
  double sse;
  double threshold;
  std::uint32_t dim;
};

// Grows one tree. A node owns rows_[begin, end). To scan a feature in sorted
// order the node marks its rows' ranks in a bitset and walks the set bits.
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& cols, const SortedColumns& sorted, std::span<const double> y,
              const ForestConfig& cfg, std::uint64_t stream)
      : cols_(cols), sorted_(sorted), y_(y), cfg_(cfg), rng_(mix_seed(stream)) {
    n_dims_ = static_cast<std::size_t>(cols.cols());
    mtry_ = cfg.features_per_node(n_dims_);
    features_.resize(n_dims_);
  }

  // weight[r] is the multiplicity of row r in this tree's sample (0 = unused).
  Tree build(std::vector<double> weight) {
    w_ = std::move(weight);
    rows_.clear();
    for (std::size_t r = 0; r < sorted_.n_rows; ++r)
      if (w_[r] > 0.0) rows_.push_back(static_cast<std::uint32_t>(r));
    bits_.assign((sorted_.n_rows + 63) / 64, 0);
    tmp_.resize(rows_.size());
    tree_.nodes.clear();
    if (!rows_.empty()) grow(0, rows_.size(), 0);
    return std::move(tree_);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t n = end - begin;
    const auto& rows = rows_;

    double sum = 0.0, weight = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      sum += w_[rows[i]] * y_[rows[i]];
      weight += w_[rows[i]];
    }
    const double mean = sum / weight;
    double sse = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = y_[rows[i]] - mean;
      sse += w_[rows[i]] * d * d;
    }
    {
      Node& node = tree_.nodes[static_cast<std::size_t>(id)];
      node.value = mean;
      node.n_samples = static_cast<std::size_t>(weight);
    }

    const auto leaf = static_cast<double>(cfg_.min_samples_leaf);
    const bool depth_ok = !cfg_.max_depth || depth < *cfg_.max_depth;
    if (!depth_ok || weight < 2.0 * leaf || n < 2 || sse <= kMinDecrease) return id;

    // Per-node feature subsample, visited in ascending dimension order.
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_dims_ - 1);
      std::swap(features_[i], features_[pick(rng_)]);
    }
    std::sort(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(mtry_));

    double total = 0.0, total2 = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = rows[i];
      total += w_[r] * y_[r];
      total2 += w_[r] * y_[r] * y_[r];
    }

    // Candidates within tol of the best are ties; summation order would
    // otherwise decide them.
    const double tol = kTieTolerance * total2;
    double best_sse = sse - kMinDecrease;
    cands_.clear();
    std::uint64_t* bits = bits_.data();
    for (std::size_t fi = 0; fi < mtry_; ++fi) {
      const std::size_t f = features_[fi];
      const std::uint32_t* order = sorted_.order[f].data();
      const double* xs = sorted_.values[f].data();
      std::uint32_t kmin = std::numeric_limits<std::uint32_t>::max(), kmax = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const std::uint32_t k = sorted_.rank[rows[i] * n_dims_ + f];
        bits[k >> 6] |= std::uint64_t{1} << (k & 63);
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
      }
      const std::size_t wlo = kmin >> 6, whi = kmax >> 6;
      if (xs[kmin] == xs[kmax]) {
        std::fill(bits + wlo, bits + whi + 1, 0);
        continue;
      }
      double ls = 0.0, ls2 = 0.0, nld = 0.0, x_prev = 0.0;
      bool stop = false;
      for (std::size_t wi = wlo; wi <= whi; ++wi) {
        std::uint64_t word = bits[wi];
        bits[wi] = 0;
        while (word && !stop) {
          const std::size_t k = (wi << 6) + static_cast<std::size_t>(std::countr_zero(word));
          word &= word - 1;
          const auto r = order[k];
          const double x = xs[k];
          if (nld > 0.0) {
            const double nrd = weight - nld;
            if (nrd < leaf) {
              stop = true;
              break;
            }
            if (nld >= leaf && x_prev != x) {
              const double rs = total - ls, rs2 = total2 - ls2;
              const double split_sse = (ls2 - ls * ls / nld) + (rs2 - rs * rs / nrd);
              if (split_sse <= best_sse + tol) {
                const double mid = 0.5 * (x_prev + x);
                cands_.push_back({split_sse, (mid < x) ? mid : x_prev, static_cast<std::uint32_t>(f)});
                best_sse = std::min(best_sse, split_sse);
              }
            }
          }
          const double wy = w_[r] * y_[r];
          ls += wy;
          ls2 += wy * y_[r];
          nld += w_[r];
          x_prev = x;
        }
      }
    }
    const Candidate* pick = nullptr;
    for (const auto& c : cands_) {
      if (c.sse > best_sse + tol || c.sse >= sse - kMinDecrease) continue;
      if (!pick || sorted_.key[c.dim] < sorted_.key[pick->dim] ||
          (c.dim == pick->dim && c.threshold < pick->threshold))
        pick = &c;
    }
    if (!pick) return id;
    const auto best_dim = static_cast<std::int32_t>(pick->dim);
    const double best_thr = pick->threshold;

    const double* col = cols_.col(best_dim).data();
    std::size_t li = begin, ri = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = rows_[i];
      const std::size_t g = col[r] <= best_thr;
      rows_[li] = r;
      tmp_[ri] = r;
      li += g;
      ri += 1 - g;
    }
    std::copy(tmp_.begin(), tmp_.begin() + static_cast<std::ptrdiff_t>(ri),
              rows_.begin() + static_cast<std::ptrdiff_t>(li));
    const std::size_t split = li;

    auto left = grow(begin, split, depth + 1);
    auto right = grow(split, end, depth + 1);

    // Children are summed exactly so the credited decrease never goes negative.
    const double lv = tree_.nodes[static_cast<std::size_t>(left)].value;
    const double rv = tree_.nodes[static_cast<std::size_t>(right)].value;
    double child_sse = 0.0;
    for (std::size_t i = begin; i < split; ++i) child_sse += w_[rows[i]] * std::pow(y_[rows[i]] - lv, 2);
    for (std::size_t i = split; i < end; ++i) child_sse += w_[rows[i]] * std::pow(y_[rows[i]] - rv, 2);

    Node& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.split_dim = best_dim;
    node.threshold = best_thr;
    node.left = left;
    node.right = right;
    node.impurity_decrease = std::max(0.0, sse - child_sse);
    return id;
  }

  const Eigen::MatrixXd& cols_;
  const SortedColumns& sorted_;
  std::span<const double> y_;
  const ForestConfig& cfg_;
  std::mt19937_64 rng_;
  std::size_t n_dims_ = 0;
  std::size_t mtry_ = 0;
  std::vector<Candidate> cands_;
  std::vector<std::size_t> features_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint32_t> tmp_;
  std::vector<double> w_;
  Tree tree_;
};

std::vector<double> tree_importance(const Tree& tree, std::size_t n_features) {
  std::vector<double> imp(n_features, 0.0);
  for (const auto& node : tree.nodes)
    if (!node.is_leaf()) imp[static_cast<std::size_t>(node.split_dim)] += node.impurity_decrease;
  return imp;
}

}  // namespace

void ForestConfig::validate(std::size_t n_dims) const {
  if (n_trees < 1) throw ValidationError("n_trees must be at least 1");
  if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be at least 1");
  if (n_dims < 1) throw ValidationError("forest needs at least one feature");
  if (auto* k = std::get_if<std::size_t>(&max_features); k && (*k < 1 || *k > n_dims))
    throw ValidationError("max_features must lie in [1, D]");
}

std::size_t ForestConfig::features_per_node(std::size_t n_dims) const {
  if (auto* k = std::get_if<std::size_t>(&max_features)) return std::min(*k, n_dims);
  const auto d = static_cast<double>(n_dims);
  std::size_t m = n_dims;
  switch (std::get<FeatureFraction>(max_features)) {
    case FeatureFraction::Sqrt: m = static_cast<std::size_t>(std::floor(std::sqrt(d))); break;
    case FeatureFraction::Third: m = static_cast<std::size_t>(std::floor(d / 3.0)); break;
    case FeatureFraction::All: m = n_dims; break;
  }
  return std::clamp<std::size_t>(m, 1, n_dims);
}

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const Node& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.split_dim)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double ForestModel::predict(std::span<const double> x) const {
  if (x.size() != n_features)
    throw ValidationError("predict: expected " + std::to_string(n_features) + " features, got " +
                          std::to_string(x.size()));
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

Vector ForestModel::predict(const Matrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out(i) = predict(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
  return out;
}

ForestModel fit(const Matrix& x, std::span<const double> targets, const ForestConfig& cfg) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  cfg.validate(d);
  if (targets.size() != n) throw ValidationError("fit: target count differs from sample count");
  if (n < 2 * cfg.min_samples_leaf)
    throw ValidationError("fit: need at least " + std::to_string(2 * cfg.min_samples_leaf) + " samples, got " +
                          std::to_string(n));
  if (!x.allFinite()) throw ValidationError("fit: non-finite latent value");
  for (double t : targets)
    if (!std::isfinite(t)) throw ValidationError("fit: non-finite target");

  if (n > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("fit: too many samples");
  const Eigen::MatrixXd cols = x;  // column-major copy for per-feature scans
  const SortedColumns sorted(cols);
  ForestModel model;
  model.n_features = d;
  model.trees.resize(cfg.n_trees);
  std::vector<std::vector<std::uint8_t>> in_bag(cfg.bootstrap ? cfg.n_trees : 0);

  auto train_one = [&](std::size_t t) {
    TreeBuilder builder(cols, sorted, targets, cfg, cfg.seed ^ (0x632be59bd9b4e019ULL * (t + 1)));
    std::vector<double> weight(n, 1.0);
    if (cfg.bootstrap) {
      std::fill(weight.begin(), weight.end(), 0.0);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) weight[pick(builder.rng())] += 1.0;
      in_bag[t].assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) in_bag[t][i] = weight[i] > 0.0;
    }
    model.trees[t] = builder.build(std::move(weight));
  };

  const std::size_t workers = std::min(worker_count(), cfg.n_trees);
  if (workers <= 1) {
    for (std::size_t t = 0; t < cfg.n_trees; ++t) train_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < cfg.n_trees; t = next++) train_one(t);
      });
  }

  model.importances = mdi_importance(model);

  if (cfg.bootstrap) {
    std::vector<double> sum(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t t = 0; t < cfg.n_trees; ++t)
      for (std::size_t i = 0; i < n; ++i)
        if (!in_bag[t][i]) {
          sum[i] += model.trees[t].predict(std::span<const double>(x.row(static_cast<Eigen::Index>(i)).data(), d));
          ++count[i];
        }
    double err = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (count[i]) {
        err += std::pow(sum[i] / static_cast<double>(count[i]) - targets[i], 2);
        ++used;
      }
    if (used) model.oob_error = err / static_cast<double>(used);
  }
  return model;
}

std::vector<double> mdi_importance(const ForestModel& model) {
  std::vector<double> total(model.n_features, 0.0);
  for (const auto& tree : model.trees) {
    auto imp = tree_importance(tree, model.n_features);
    double s = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (s <= 0.0) continue;
    for (std::size_t j = 0; j < imp.size(); ++j) total[j] += imp[j] / s;
  }
  double s = std::accumulate(total.begin(), total.end(), 0.0);
  if (s > 0.0)
    for (double& v : total) v /= s;
  return total;
}

std::string to_json(const ForestModel& model) {
  using nlohmann::json;
  json trees = json::array();
  for (const auto& t : model.trees) {
    json jt = {{"split_dim", json::array()}, {"threshold", json::array()}, {"left", json::array()},
               {"right", json::array()},     {"value", json::array()},     {"impurity_decrease", json::array()},
               {"n_samples", json::array()}};
    for (const auto& nd : t.nodes) {
      jt["split_dim"].push_back(nd.split_dim);
      jt["threshold"].push_back(nd.threshold);
      jt["left"].push_back(nd.left);
      jt["right"].push_back(nd.right);
      jt["value"].push_back(nd.value);
      jt["impurity_decrease"].push_back(nd.impurity_decrease);
      jt["n_samples"].push_back(nd.n_samples);
    }
    trees.push_back(std::move(jt));
  }
  json j = {{"n_features", model.n_features},
            {"importances", model.importances},
            {"oob_error", model.oob_error ? json(*model.oob_error) : json(nullptr)},
            {"trees", std::move(trees)}};
  return j.dump();
}

ForestModel from_json(const std::string& text) {
  using nlohmann::json;
  ForestModel model;
  try {
    auto j = json::parse(text);
    model.n_features = j.at("n_features").get<std::size_t>();
    model.importances = j.at("importances").get<std::vector<double>>();
    if (!j.at("oob_error").is_null()) model.oob_error = j["oob_error"].get<double>();
    for (const auto& jt : j.at("trees")) {
      Tree t;
      const auto m = jt.at("split_dim").size();
      t.nodes.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        Node& nd = t.nodes[i];
        nd.split_dim = jt["split_dim"][i].get<std::int32_t>();
        nd.threshold = jt["threshold"][i].get<double>();
        nd.left = jt["left"][i].get<std::int32_t>();
        nd.right = jt["right"][i].get<std::int32_t>();
        nd.value = jt["value"][i].get<double>();
        nd.impurity_decrease = jt["impurity_decrease"][i].get<double>();
        nd.n_samples = jt["n_samples"][i].get<std::size_t>();
        if (!nd.is_leaf()) {
          if (static_cast<std::size_t>(nd.split_dim) >= model.n_features)
            throw ValidationError("forest json: split_dim out of range");
          if (nd.left <= static_cast<std::int32_t>(i) || nd.right <= static_cast<std::int32_t>(i) ||
              static_cast<std::size_t>(nd.left) >= m || static_cast<std::size_t>(nd.right) >= m)
            throw ValidationError("forest json: child index out of range");
        }
      }
      model.trees.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("forest json: ") + e.what());
  }
  if (model.trees.empty()) throw ValidationError("forest json: no trees");
  return model;
}

}  // namespace lsw::forest
