#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lsw/dataio.hpp"

namespace lsw::toygen {

// Feature-wise affine modulation gamma * F + beta.
constexpr double film(double feature, double gamma, double beta) { return gamma * feature + beta; }

// sin(film(F | gamma, beta)); periodic in beta with period 2*pi.
double sine_film(double feature, double gamma, double beta);

// Parameters of the synthetic sine-FiLM generator. Everything the generator
// needs beyond these fields (channel wiring, camera bases, oracle and
// embedding weights, the z<->s mixing) is derived from mixing_seed.
//
// Latent roles in s:
//   planted_dims[j]   phase (beta) inputs of attribute channel j, summed
//   beta_nuisance     phase inputs of nuisance channels
//   gamma_nuisance    frequency inputs of nuisance channels
struct ToyGeneratorSpec {
  std::size_t d_s = 64;
  std::size_t n_attributes = 4;
  std::size_t out_dim = 96;
  std::size_t embed_dim = 16;
  std::vector<std::string> attribute_names;
  std::vector<std::vector<std::size_t>> planted_dims;
  std::vector<std::size_t> beta_nuisance;
  std::vector<std::size_t> gamma_nuisance;
  double planted_amplitude = 0.39269908169872414;  // pi/8: four dims sum to +-pi/2
  double planted_noise = 0.25;
  double oracle_gain = 4.0;
  double gamma_scale = 0.3;
  std::uint64_t mixing_seed = 7;
  std::string domain = "toy";

  std::size_t d_z() const { return d_s; }
  std::vector<std::size_t> nuisance_dims() const;  // beta_nuisance and gamma_nuisance, ascending
  std::vector<std::size_t> beta_role_dims() const;  // planted and beta_nuisance, ascending

  void validate() const;

  // A = 4 attributes, 4 planted dims each, scattered over d_s = 64 by a
  // seeded permutation; 16 beta and 32 gamma nuisance dims.
  static ToyGeneratorSpec make_default(std::uint64_t seed = 7);
  static ToyGeneratorSpec make(std::size_t d_s, std::size_t n_attributes, std::size_t planted_per_attribute,
                               std::size_t n_beta_nuisance, std::size_t out_dim, std::size_t embed_dim,
                               std::uint64_t seed);

  std::string to_json() const;
  static ToyGeneratorSpec from_json(const std::string& text);
};

struct RenderedOutput {
  Vector pixels;  // out_dim values in [-1, 1]
};

struct LatentSample {
  Matrix s;        // n x d_s
  Matrix factors;  // n x A, planted attribute factors in {0, 1}
};

class ToyGenerator {
 public:
  explicit ToyGenerator(ToyGeneratorSpec spec);

  const ToyGeneratorSpec& spec() const { return spec_; }
  std::size_t n_nuisance_channels() const { return spec_.out_dim - spec_.n_attributes; }

  // Channel j < A: sin(sum of planted dims of j), independent of the camera.
  // Channel c >= A: sine_film(cos(omega_c * camera + phi_c), gamma_c(s), beta_c(s)).
  RenderedOutput render(const Vector& s, double camera) const;

  // logistic(gain * pixel_j) per attribute.
  Vector oracle_classify(const RenderedOutput& out) const;

  // Fixed projection of the centered nuisance channels, L2-normalized.
  Vector identity_embed(const RenderedOutput& out) const;
  double identity_loss(const RenderedOutput& a, const RenderedOutput& b) const;

  // z -> s: seeded rotation followed by the elementwise map u + tanh(u)/2.
  Vector mix(const Vector& z) const;
  Vector unmix(const Vector& s) const;

  // Codes from the generator prior: planted dims +-amplitude by a fair-coin
  // factor plus Gaussian noise, nuisance dims standard normal.
  LatentSample sample_latents(std::size_t n, std::uint64_t seed) const;

  // Paired Z- and S-space datasets sharing sample order, oracle scores at
  // camera 0 and identity embeddings.
  std::pair<LatentDataset, LatentDataset> sample_dataset(std::size_t n, std::uint64_t seed) const;
  LatentDataset make_dataset(const Matrix& s, LatentSpace space) const;

  // Mean of `draws` prior samples.
  Vector latent_mean(std::size_t draws, std::uint64_t seed) const;

 private:
  ToyGeneratorSpec spec_;
  std::vector<std::size_t> beta_src_;                     // per nuisance channel
  std::vector<std::pair<std::size_t, std::size_t>> gamma_src_;
  std::vector<double> gamma0_, beta0_, omega_, phi_;
  Matrix embed_proj_;  // E x (out_dim - A)
  Vector embed_center_;
  Matrix rotation_;    // d_s x d_s orthogonal
};

// Free-function forms of the generator operations.
inline RenderedOutput render(const ToyGenerator& g, const Vector& s, double camera) { return g.render(s, camera); }
inline Vector oracle_classify(const ToyGenerator& g, const RenderedOutput& o) { return g.oracle_classify(o); }
inline Vector identity_embed(const ToyGenerator& g, const RenderedOutput& o) { return g.identity_embed(o); }

}  // namespace lsw::toygen
