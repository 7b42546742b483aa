#include "lsw/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lsw::evalsuite {

CorrectnessRates semantic_correctness(std::span<const double> before, std::span<const double> after,
                                      double threshold) {
  if (before.empty() || after.empty()) throw ValidationError("semantic_correctness: empty input");
  if (before.size() != after.size()) throw ValidationError("semantic_correctness: length mismatch");
  auto rate = [threshold](std::span<const double> v) {
    const auto hits = std::count_if(v.begin(), v.end(), [threshold](double x) { return x >= threshold; });
    return static_cast<double>(hits) / static_cast<double>(v.size());
  };
  return {rate(before), rate(after)};
}

double identity_preservation(const Matrix& before, const Matrix& after, double sim_threshold) {
  if (before.rows() != after.rows() || before.cols() != after.cols())
    throw ValidationError("identity_preservation: shape mismatch");
  if (before.rows() == 0) throw ValidationError("identity_preservation: empty input");
  std::size_t kept = 0;
  for (Eigen::Index i = 0; i < before.rows(); ++i) {
    const double na = before.row(i).norm(), nb = after.row(i).norm();
    if (na == 0.0 || nb == 0.0)
      throw ValidationError("identity_preservation: zero-norm embedding at row " + std::to_string(i));
    kept += before.row(i).dot(after.row(i)) / (na * nb) >= sim_threshold;
  }
  return static_cast<double>(kept) / static_cast<double>(before.rows());
}

namespace {

Eigen::MatrixXd covariance(const Matrix& x, const Eigen::RowVectorXd& mean) {
  const Eigen::MatrixXd c = x.rowwise() - mean;
  return (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

bool rank_deficient(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return es.eigenvalues().minCoeff() <= std::max(1e-12, 1e-10 * top);
}

}  // namespace

FrechetResult frechet_distance(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ValidationError("frechet_distance: embedding widths differ");
  const auto e = a.cols();
  if (a.rows() < e + 1 || b.rows() < e + 1)
    throw ValidationError("frechet_distance: need at least E+1 rows on each side");
  const Eigen::RowVectorXd mu_a = a.colwise().mean(), mu_b = b.colwise().mean();
  Eigen::MatrixXd ca = covariance(a, mu_a), cb = covariance(b, mu_b);
  FrechetResult res;
  if (rank_deficient(ca) || rank_deficient(cb)) {
    ca.diagonal().array() += 1e-6;
    cb.diagonal().array() += 1e-6;
    res.regularized = true;
  }
  const Eigen::MatrixXd sa = psd_sqrt(ca);
  const Eigen::MatrixXd cross = psd_sqrt(sa * cb * sa);
  const double d = (mu_a - mu_b).squaredNorm() + ca.trace() + cb.trace() - 2.0 * cross.trace();
  res.distance = std::max(0.0, d);
  return res;
}

double kernel_distance(const Matrix& a, const Matrix& b, std::size_t subset_size, std::size_t n_subsets,
                       std::uint64_t seed) {
  if (subset_size < 2) throw ValidationError("kernel_distance: subset_size must be at least 2");
  if (n_subsets < 1) throw ValidationError("kernel_distance: n_subsets must be at least 1");
  if (a.cols() != b.cols()) throw ValidationError("kernel_distance: embedding widths differ");
  if (static_cast<std::size_t>(a.rows()) < subset_size || static_cast<std::size_t>(b.rows()) < subset_size)
    throw ValidationError("kernel_distance: fewer rows than subset_size");
  const double inv_e = 1.0 / static_cast<double>(a.cols());
  const auto m = static_cast<double>(subset_size);
  std::mt19937_64 rng(mix_seed(seed));

  auto draw = [&](const Matrix& x) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < subset_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(subset_size), x.cols());
    for (std::size_t i = 0; i < subset_size; ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    return out;
  };
  auto kernel = [inv_e](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    Eigen::MatrixXd k = (x * y.transpose()) * inv_e;
    return Eigen::MatrixXd((k.array() + 1.0).cube());
  };

  double total = 0.0;
  for (std::size_t s = 0; s < n_subsets; ++s) {
    const auto x = draw(a);
    const auto y = draw(b);
    const auto kxx = kernel(x, x), kyy = kernel(y, y), kxy = kernel(x, y);
    const double sxx = kxx.sum() - kxx.trace();
    const double syy = kyy.sum() - kyy.trace();
    total += (sxx + syy) / (m * (m - 1.0)) - 2.0 * kxy.sum() / (m * m);
  }
  return total / static_cast<double>(n_subsets);
}

}  // namespace lsw::evalsuite
