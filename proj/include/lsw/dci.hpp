#pragma once

#include <string>
#include <vector>

#include "lsw/dataio.hpp"
#include "lsw/forest.hpp"

namespace lsw::dci {

struct DciScores {
  double disentanglement = 0.0;
  double completeness = 0.0;
};

struct DciReport {
  LatentSpace space = LatentSpace::S;
  double disentanglement = 0.0;
  double completeness = 0.0;
  double informativeness = 0.0;
  Matrix importance_matrix;  // D x A
  std::vector<double> per_attribute_accuracy;
  std::vector<std::string> attribute_names;
};

// Entropy-based disentanglement and completeness of a D x A importance
// matrix. Requires D >= 2 and A >= 2.
DciScores scores_from_importance(const Matrix& importance);

// One forest per attribute on `train`; informativeness is the mean test
// accuracy of predict >= 0.5 against score >= 0.5.
DciReport compute_dci(const LatentDataset& train, const LatentDataset& test, const forest::ForestConfig& cfg);

std::string to_json(const DciReport& report);
// Fixed-width table with one row per report.
std::string format_table(const std::vector<DciReport>& reports);

}  // namespace lsw::dci
