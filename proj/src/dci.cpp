#include "lsw/dci.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace lsw::dci {

namespace {

// Entropy of a probability vector in the given log base.
double entropy(const Eigen::Ref<const Vector>& p, double base) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  return h / std::log(base);
}

}  // namespace

DciScores scores_from_importance(const Matrix& r) {
  const auto d = r.rows(), a = r.cols();
  if (d < 2 || a < 2) throw ValidationError("DCI needs at least two dimensions and two attributes");
  if ((r.array() < 0.0).any() || !r.allFinite()) throw ValidationError("importance matrix must be non-negative");

  DciScores out;
  const double total = r.sum();
  if (total <= 0.0) return out;

  for (Eigen::Index i = 0; i < d; ++i) {
    const double row = r.row(i).sum();
    if (row <= 0.0) continue;
    const Vector p = r.row(i).transpose() / row;
    const double rho = row / total;
    out.disentanglement += rho * (1.0 - entropy(p, static_cast<double>(a)));
  }
  for (Eigen::Index j = 0; j < a; ++j) {
    const double col = r.col(j).sum();
    if (col <= 0.0) continue;
    const Vector p = r.col(j) / col;
    out.completeness += 1.0 - entropy(p, static_cast<double>(d));
  }
  out.completeness /= static_cast<double>(a);
  out.disentanglement = std::clamp(out.disentanglement, 0.0, 1.0);
  out.completeness = std::clamp(out.completeness, 0.0, 1.0);
  return out;
}

DciReport compute_dci(const LatentDataset& train, const LatentDataset& test, const forest::ForestConfig& cfg) {
  if (train.n_dims() != test.n_dims()) throw ValidationError("DCI: train and test latent dimensions differ");
  if (train.attribute_names != test.attribute_names) throw ValidationError("DCI: train and test attributes differ");
  const auto d = train.n_dims();
  const auto a = train.n_attributes();
  if (d < 2 || a < 2) throw ValidationError("DCI needs at least two dimensions and two attributes");
  if (test.n_samples() == 0) throw ValidationError("DCI: empty test set");

  DciReport rep;
  rep.space = train.space;
  rep.attribute_names = train.attribute_names;
  rep.importance_matrix = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(a));
  for (std::size_t j = 0; j < a; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    std::vector<double> y(train.n_samples());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = train.scores(static_cast<Eigen::Index>(i), col);
      positives += y[i] >= 0.5;
    }
    if (positives == 0 || positives == y.size())
      throw ValidationError("DCI: attribute '" + train.attribute_names[j] + "' has a single class in train");

    const auto model = forest::fit(train.latents, y, cfg);
    for (std::size_t k = 0; k < d; ++k) rep.importance_matrix(static_cast<Eigen::Index>(k), col) = model.importances[k];

    const Vector pred = model.predict(test.latents);
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) correct += (pred(i) >= 0.5) == (test.scores(i, col) >= 0.5);
    rep.per_attribute_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(pred.size()));
  }
  const auto s = scores_from_importance(rep.importance_matrix);
  rep.disentanglement = s.disentanglement;
  rep.completeness = s.completeness;
  double acc = 0.0;
  for (double v : rep.per_attribute_accuracy) acc += v;
  rep.informativeness = acc / static_cast<double>(a);
  return rep;
}

std::string to_json(const DciReport& r) {
  nlohmann::json imp = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.importance_matrix.rows(); ++i) {
    std::vector<double> row(r.importance_matrix.row(i).begin(), r.importance_matrix.row(i).end());
    imp.push_back(row);
  }
  nlohmann::json j = {{"space_tag", std::string(to_string(r.space))},
                      {"disentanglement", r.disentanglement},
                      {"completeness", r.completeness},
                      {"informativeness", r.informativeness},
                      {"attribute_names", r.attribute_names},
                      {"per_attribute_accuracy", r.per_attribute_accuracy},
                      {"importance_matrix", imp}};
  return j.dump(2);
}

std::string format_table(const std::vector<DciReport>& reports) {
  std::string out = "Space  Disent.  Compl.  Inform.\n";
  for (const auto& r : reports) {
    char line[96];
    std::snprintf(line, sizeof line, "%-5s  %7.2f  %6.2f  %7.2f\n", std::string(to_string(r.space)).c_str(),
                  r.disentanglement, r.completeness, r.informativeness);
    out += line;
  }
  return out;
}

}  // namespace lsw::dci
