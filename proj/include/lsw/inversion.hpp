#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lsw/toygen.hpp"

namespace lsw::inversion {

struct InversionConfig {
  double lambda1 = 1.0;  // pixel MSE
  double lambda2 = 0.6;  // MSE after a fixed random projection (perceptual surrogate)
  double lambda3 = 0.3;  // 1 - cosine of identity embeddings
  std::size_t n_alternations = 30;
  std::size_t steps_per_phase = 20;
  std::size_t final_latent_steps = 200;
  double learning_rate = 1.0;
  double momentum = 0.9;
  double fd_epsilon = 1e-4;
  std::size_t projection_dim = 32;
  std::size_t mean_draws = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct InversionResult {
  Vector s_hat;
  double camera_hat = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_trace;

  std::string to_json() const;
};

// Black-box generator interface: latent + camera -> output vector, and
// output -> identity embedding.
struct Generator {
  std::function<Vector(const Vector& s, double camera)> render;
  std::function<Vector(const Vector& output)> embed;
};

Generator wrap(const toygen::ToyGenerator& gen);

// Weighted sum of the three reconstruction terms against a fixed target.
class InversionObjective {
 public:
  InversionObjective(Generator gen, Vector target, const InversionConfig& cfg);

  double operator()(const Vector& s, double camera) const;
  double loss_for_output(const Vector& output) const;

  // Central finite differences with step h.
  Vector latent_gradient(const Vector& s, double camera, double h) const;
  double camera_gradient(const Vector& s, double camera, double h) const;

 private:
  Generator gen_;
  Vector target_;
  Vector target_projected_;
  Vector target_embedding_;
  Matrix projection_;
  InversionConfig cfg_;
};

double inversion_loss(const toygen::ToyGenerator& gen, const Vector& s, double camera,
                      const toygen::RenderedOutput& target, const InversionConfig& cfg);

// Alternating optimization: camera-only then latent-only phases for
// n_alternations rounds, followed by final_latent_steps latent-only steps.
// Starts from `init_latent` and camera 0. Momentum descent on central
// finite-difference gradients. A step that raises the loss resets the
// momentum; the plain gradient step is then retried with halving.
InversionResult invert(const Generator& gen, const Vector& target, const Vector& init_latent,
                       const InversionConfig& cfg);

// Toy generator entry point; initializes from the mean of cfg.mean_draws prior samples.
InversionResult invert(const toygen::ToyGenerator& gen, const toygen::RenderedOutput& target,
                       const InversionConfig& cfg);

}  // namespace lsw::inversion
