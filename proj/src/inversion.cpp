#include "lsw/inversion.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

namespace lsw::inversion {

void InversionConfig::validate() const {
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0)) throw ValidationError("inversion: lambdas must be >= 0");
  if (steps_per_phase < 1) throw ValidationError("inversion: steps_per_phase must be at least 1");
  if (!(fd_epsilon > 0.0)) throw ValidationError("inversion: fd_epsilon must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("inversion: learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("inversion: momentum must lie in [0, 1)");
  if (projection_dim < 1) throw ValidationError("inversion: projection_dim must be positive");
  if (mean_draws < 1) throw ValidationError("inversion: mean_draws must be positive");
}

std::string InversionResult::to_json() const {
  std::vector<double> s(s_hat.begin(), s_hat.end());
  nlohmann::json j = {{"s_hat", s}, {"camera_hat", camera_hat}, {"final_loss", final_loss}, {"loss_trace", loss_trace}};
  return j.dump(2);
}

Generator wrap(const toygen::ToyGenerator& gen) {
  return Generator{
      [&gen](const Vector& s, double camera) { return gen.render(s, camera).pixels; },
      [&gen](const Vector& out) { return gen.identity_embed(toygen::RenderedOutput{out}); },
  };
}

InversionObjective::InversionObjective(Generator gen, Vector target, const InversionConfig& cfg)
    : gen_(std::move(gen)), target_(std::move(target)), cfg_(cfg) {
  if (!target_.allFinite()) throw ValidationError("inversion: target must be finite");
  const auto k = static_cast<Eigen::Index>(cfg.projection_dim);
  projection_.resize(k, target_.size());
  std::mt19937_64 rng(mix_seed(cfg.seed ^ 0x9e0ec7));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < target_.size(); ++j)
      projection_(i, j) = gauss(rng) / std::sqrt(static_cast<double>(target_.size()));
  target_projected_ = projection_ * target_;
  if (cfg_.lambda3 > 0.0) target_embedding_ = gen_.embed(target_);
}

double InversionObjective::loss_for_output(const Vector& out) const {
  if (out.size() != target_.size()) throw ValidationError("inversion: output length differs from target");
  double loss = cfg_.lambda1 * (out - target_).squaredNorm() / static_cast<double>(out.size());
  if (cfg_.lambda2 > 0.0)
    loss += cfg_.lambda2 * (projection_ * out - target_projected_).squaredNorm() /
            static_cast<double>(projection_.rows());
  if (cfg_.lambda3 > 0.0) loss += cfg_.lambda3 * (1.0 - gen_.embed(out).dot(target_embedding_));
  return loss;
}

double InversionObjective::operator()(const Vector& s, double camera) const {
  return loss_for_output(gen_.render(s, camera));
}

Vector InversionObjective::latent_gradient(const Vector& s, double camera, double h) const {
  Vector g(s.size());
  Vector probe = s;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    probe(i) = s(i) + h;
    const double up = (*this)(probe, camera);
    probe(i) = s(i) - h;
    const double down = (*this)(probe, camera);
    probe(i) = s(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

double InversionObjective::camera_gradient(const Vector& s, double camera, double h) const {
  return ((*this)(s, camera + h) - (*this)(s, camera - h)) / (2.0 * h);
}

double inversion_loss(const toygen::ToyGenerator& gen, const Vector& s, double camera,
                      const toygen::RenderedOutput& target, const InversionConfig& cfg) {
  return InversionObjective(wrap(gen), target.pixels, cfg)(s, camera);
}

namespace {

// A rejected step resets the momentum and retries the plain gradient step,
// halving it until the loss does not increase.
constexpr int kMaxHalvings = 30;

class Descent {
 public:
  Descent(const InversionObjective& obj, const InversionConfig& cfg, InversionResult& res)
      : obj_(obj), cfg_(cfg), res_(res) {}

  void camera_phase(std::size_t steps) {
    double velocity = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      const double g = obj_.camera_gradient(res_.s_hat, res_.camera_hat, cfg_.fd_epsilon);
      velocity = cfg_.momentum * velocity - cfg_.learning_rate * g;
      if (accept(obj_(res_.s_hat, res_.camera_hat + velocity))) {
        res_.camera_hat += velocity;
        continue;
      }
      velocity = 0.0;
      double step = -cfg_.learning_rate * g;
      for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5)
        if (accept(obj_(res_.s_hat, res_.camera_hat + step))) {
          res_.camera_hat += step;
          break;
        }
    }
  }

  void latent_phase(std::size_t steps) {
    Vector velocity = Vector::Zero(res_.s_hat.size());
    for (std::size_t i = 0; i < steps; ++i) {
      const Vector g = obj_.latent_gradient(res_.s_hat, res_.camera_hat, cfg_.fd_epsilon);
      velocity = cfg_.momentum * velocity - cfg_.learning_rate * g;
      if (accept(obj_(res_.s_hat + velocity, res_.camera_hat))) {
        res_.s_hat += velocity;
        continue;
      }
      velocity.setZero();
      Vector step = -cfg_.learning_rate * g;
      for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5)
        if (accept(obj_(res_.s_hat + step, res_.camera_hat))) {
          res_.s_hat += step;
          break;
        }
    }
  }

 private:
  bool accept(double loss) {
    if (!std::isfinite(loss)) {
      throw ValidationError("inversion: non-finite loss after " + std::to_string(res_.loss_trace.size()) +
                            " accepted steps (last loss " + std::to_string(res_.loss_trace.back()) + ")");
    }
    if (loss > res_.loss_trace.back()) return false;
    res_.loss_trace.push_back(loss);
    return true;
  }

  const InversionObjective& obj_;
  const InversionConfig& cfg_;
  InversionResult& res_;
};

}  // namespace

InversionResult invert(const Generator& gen, const Vector& target, const Vector& init_latent,
                       const InversionConfig& cfg) {
  cfg.validate();
  const InversionObjective objective(gen, target, cfg);
  InversionResult res;
  res.s_hat = init_latent;
  res.camera_hat = 0.0;
  const double initial = objective(res.s_hat, res.camera_hat);
  if (!std::isfinite(initial)) throw ValidationError("inversion: non-finite loss at initialization");
  res.loss_trace.push_back(initial);

  Descent descent(objective, cfg, res);
  for (std::size_t round = 0; round < cfg.n_alternations; ++round) {
    descent.camera_phase(cfg.steps_per_phase);
    descent.latent_phase(cfg.steps_per_phase);
  }
  descent.latent_phase(cfg.final_latent_steps);
  res.final_loss = res.loss_trace.back();
  return res;
}

InversionResult invert(const toygen::ToyGenerator& gen, const toygen::RenderedOutput& target,
                       const InversionConfig& cfg) {
  cfg.validate();
  const Vector init = gen.latent_mean(cfg.mean_draws, cfg.seed);
  return invert(wrap(gen), target.pixels, init, cfg);
}

}  // namespace lsw::inversion
