#include "lsw/toygen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace lsw::toygen {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kCenterDraws = 4096;

double warp(double u) { return u + 0.5 * std::tanh(u); }

double unwarp(double v) {
  double u = v;
  for (int it = 0; it < 50; ++it) {
    const double t = std::tanh(u);
    const double step = (u + 0.5 * t - v) / (1.0 + 0.5 * (1.0 - t * t));
    u -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(u))) break;
  }
  return u;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double sine_film(double feature, double gamma, double beta) { return std::sin(film(feature, gamma, beta)); }

std::vector<std::size_t> ToyGeneratorSpec::nuisance_dims() const {
  std::vector<std::size_t> out(beta_nuisance);
  out.insert(out.end(), gamma_nuisance.begin(), gamma_nuisance.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> ToyGeneratorSpec::beta_role_dims() const {
  std::vector<std::size_t> out(beta_nuisance);
  for (const auto& g : planted_dims) out.insert(out.end(), g.begin(), g.end());
  std::sort(out.begin(), out.end());
  return out;
}

void ToyGeneratorSpec::validate() const {
  if (n_attributes < 1) throw ValidationError("toy spec: need at least one attribute");
  if (attribute_names.size() != n_attributes) throw ValidationError("toy spec: attribute_names size != n_attributes");
  if (planted_dims.size() != n_attributes) throw ValidationError("toy spec: planted_dims size != n_attributes");
  if (out_dim < n_attributes + 4) throw ValidationError("toy spec: out_dim must be at least A + 4");
  if (embed_dim < 1) throw ValidationError("toy spec: embed_dim must be positive");
  if (beta_nuisance.empty() || gamma_nuisance.empty())
    throw ValidationError("toy spec: need at least one beta and one gamma nuisance dim");
  std::set<std::size_t> seen;
  auto claim = [&](std::size_t d) {
    if (d >= d_s) throw ValidationError("toy spec: latent index " + std::to_string(d) + " out of range");
    if (!seen.insert(d).second) throw ValidationError("toy spec: latent index " + std::to_string(d) + " used twice");
  };
  for (const auto& g : planted_dims) {
    if (g.empty()) throw ValidationError("toy spec: every attribute needs a planted dim");
    for (auto d : g) claim(d);
  }
  for (auto d : beta_nuisance) claim(d);
  for (auto d : gamma_nuisance) claim(d);
  if (seen.size() != d_s) throw ValidationError("toy spec: latent roles must cover every dimension");
  if (!(planted_amplitude > 0.0) || !(planted_noise >= 0.0) || !(oracle_gain > 0.0))
    throw ValidationError("toy spec: amplitude, noise and gain must be positive");
}

ToyGeneratorSpec ToyGeneratorSpec::make(std::size_t d_s, std::size_t n_attributes, std::size_t planted_per_attribute,
                                        std::size_t n_beta_nuisance, std::size_t out_dim, std::size_t embed_dim,
                                        std::uint64_t seed) {
  if (n_attributes * planted_per_attribute + n_beta_nuisance >= d_s)
    throw ValidationError("toy spec: not enough latent dims for the requested roles");
  ToyGeneratorSpec spec;
  spec.d_s = d_s;
  spec.n_attributes = n_attributes;
  spec.out_dim = out_dim;
  spec.embed_dim = embed_dim;
  spec.mixing_seed = seed;
  spec.planted_amplitude = (std::numbers::pi / 2.0) / static_cast<double>(planted_per_attribute);
  std::vector<std::size_t> perm(d_s);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(mix_seed(seed ^ 0x5a17ed));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::size_t at = 0;
  for (std::size_t j = 0; j < n_attributes; ++j) {
    spec.attribute_names.push_back("attr" + std::to_string(j));
    std::vector<std::size_t> g(perm.begin() + static_cast<std::ptrdiff_t>(at),
                               perm.begin() + static_cast<std::ptrdiff_t>(at + planted_per_attribute));
    std::sort(g.begin(), g.end());
    spec.planted_dims.push_back(std::move(g));
    at += planted_per_attribute;
  }
  spec.beta_nuisance.assign(perm.begin() + static_cast<std::ptrdiff_t>(at),
                            perm.begin() + static_cast<std::ptrdiff_t>(at + n_beta_nuisance));
  spec.gamma_nuisance.assign(perm.begin() + static_cast<std::ptrdiff_t>(at + n_beta_nuisance), perm.end());
  std::sort(spec.beta_nuisance.begin(), spec.beta_nuisance.end());
  std::sort(spec.gamma_nuisance.begin(), spec.gamma_nuisance.end());
  spec.validate();
  return spec;
}

ToyGeneratorSpec ToyGeneratorSpec::make_default(std::uint64_t seed) { return make(64, 4, 4, 16, 96, 16, seed); }

std::string ToyGeneratorSpec::to_json() const {
  nlohmann::json j = {{"d_s", d_s},
                      {"d_z", d_z()},
                      {"n_attributes", n_attributes},
                      {"out_dim", out_dim},
                      {"embed_dim", embed_dim},
                      {"attribute_names", attribute_names},
                      {"planted_dims", planted_dims},
                      {"beta_nuisance", beta_nuisance},
                      {"gamma_nuisance", gamma_nuisance},
                      {"planted_amplitude", planted_amplitude},
                      {"planted_noise", planted_noise},
                      {"oracle_gain", oracle_gain},
                      {"gamma_scale", gamma_scale},
                      {"mixing_seed", mixing_seed},
                      {"camera_dim", 1},
                      {"domain", domain}};
  return j.dump(2);
}

ToyGeneratorSpec ToyGeneratorSpec::from_json(const std::string& text) {
  ToyGeneratorSpec s;
  try {
    auto j = nlohmann::json::parse(text);
    s.d_s = j.at("d_s").get<std::size_t>();
    s.n_attributes = j.at("n_attributes").get<std::size_t>();
    s.out_dim = j.at("out_dim").get<std::size_t>();
    s.embed_dim = j.at("embed_dim").get<std::size_t>();
    s.attribute_names = j.at("attribute_names").get<std::vector<std::string>>();
    s.planted_dims = j.at("planted_dims").get<std::vector<std::vector<std::size_t>>>();
    s.beta_nuisance = j.at("beta_nuisance").get<std::vector<std::size_t>>();
    s.gamma_nuisance = j.at("gamma_nuisance").get<std::vector<std::size_t>>();
    s.planted_amplitude = j.value("planted_amplitude", s.planted_amplitude);
    s.planted_noise = j.value("planted_noise", s.planted_noise);
    s.oracle_gain = j.value("oracle_gain", s.oracle_gain);
    s.gamma_scale = j.value("gamma_scale", s.gamma_scale);
    s.mixing_seed = j.at("mixing_seed").get<std::uint64_t>();
    s.domain = j.value("domain", s.domain);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("toy spec json: ") + e.what());
  }
  s.validate();
  return s;
}

ToyGenerator::ToyGenerator(ToyGeneratorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const std::size_t channels = n_nuisance_channels();
  std::mt19937_64 rng(mix_seed(spec_.mixing_seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::size_t> betas = spec_.beta_nuisance;
  std::shuffle(betas.begin(), betas.end(), rng);
  const auto& gammas = spec_.gamma_nuisance;
  std::uniform_int_distribution<std::size_t> pick_gamma(0, gammas.size() - 1);
  for (std::size_t c = 0; c < channels; ++c) {
    beta_src_.push_back(betas[c % betas.size()]);
    const std::size_t a = pick_gamma(rng);
    std::size_t b = pick_gamma(rng);
    if (gammas.size() > 1)
      while (b == a) b = pick_gamma(rng);
    gamma_src_.emplace_back(gammas[a], gammas[b]);
    gamma0_.push_back(1.0 + unit(rng));
    beta0_.push_back(kTwoPi * unit(rng));
    omega_.push_back(0.5 + 1.5 * unit(rng));
    phi_.push_back(kTwoPi * unit(rng));
  }

  embed_proj_.resize(static_cast<Eigen::Index>(spec_.embed_dim), static_cast<Eigen::Index>(channels));
  for (Eigen::Index i = 0; i < embed_proj_.rows(); ++i)
    for (Eigen::Index j = 0; j < embed_proj_.cols(); ++j)
      embed_proj_(i, j) = gauss(rng) / std::sqrt(static_cast<double>(channels));

  const auto d = static_cast<Eigen::Index>(spec_.d_s);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (rr(j, j) < 0.0) q.col(j) = -q.col(j);
  rotation_ = q;

  embed_center_ = Vector::Zero(static_cast<Eigen::Index>(channels));
  const auto sample = sample_latents(kCenterDraws, spec_.mixing_seed ^ 0xce17e5);
  for (Eigen::Index i = 0; i < sample.s.rows(); ++i) {
    const auto out = render(sample.s.row(i).transpose(), 0.0);
    embed_center_ += out.pixels.tail(static_cast<Eigen::Index>(channels));
  }
  embed_center_ /= static_cast<double>(kCenterDraws);
}

RenderedOutput ToyGenerator::render(const Vector& s, double camera) const {
  if (static_cast<std::size_t>(s.size()) != spec_.d_s)
    throw ValidationError("render: expected " + std::to_string(spec_.d_s) + " latent dims");
  RenderedOutput out;
  out.pixels.resize(static_cast<Eigen::Index>(spec_.out_dim));
  for (std::size_t j = 0; j < spec_.n_attributes; ++j) {
    double beta = 0.0;
    for (auto d : spec_.planted_dims[j]) beta += s(static_cast<Eigen::Index>(d));
    out.pixels(static_cast<Eigen::Index>(j)) = sine_film(0.0, 1.0, beta);
  }
  for (std::size_t c = 0; c < n_nuisance_channels(); ++c) {
    const auto [ga, gb] = gamma_src_[c];
    const double gamma = gamma0_[c] + spec_.gamma_scale * (s(static_cast<Eigen::Index>(ga)) +
                                                           s(static_cast<Eigen::Index>(gb)));
    const double beta = beta0_[c] + s(static_cast<Eigen::Index>(beta_src_[c]));
    const double base = std::cos(omega_[c] * camera + phi_[c]);
    out.pixels(static_cast<Eigen::Index>(spec_.n_attributes + c)) = sine_film(base, gamma, beta);
  }
  return out;
}

Vector ToyGenerator::oracle_classify(const RenderedOutput& out) const {
  Vector scores(static_cast<Eigen::Index>(spec_.n_attributes));
  for (Eigen::Index j = 0; j < scores.size(); ++j) scores(j) = logistic(spec_.oracle_gain * out.pixels(j));
  return scores;
}

Vector ToyGenerator::identity_embed(const RenderedOutput& out) const {
  const auto channels = static_cast<Eigen::Index>(n_nuisance_channels());
  if (out.pixels.size() != static_cast<Eigen::Index>(spec_.out_dim))
    throw ValidationError("identity_embed: output has wrong length");
  Vector e = embed_proj_ * (out.pixels.tail(channels) - embed_center_);
  const double norm = e.norm();
  if (!(norm > 1e-300)) throw ValidationError("identity_embed: degenerate zero embedding");
  return e / norm;
}

double ToyGenerator::identity_loss(const RenderedOutput& a, const RenderedOutput& b) const {
  return std::max(0.0, 1.0 - identity_embed(a).dot(identity_embed(b)));
}

Vector ToyGenerator::mix(const Vector& z) const {
  Vector u = rotation_ * z;
  return u.unaryExpr(&warp);
}

Vector ToyGenerator::unmix(const Vector& s) const {
  Vector u = s.unaryExpr(&unwarp);
  return rotation_.transpose() * u;
}

LatentSample ToyGenerator::sample_latents(std::size_t n, std::uint64_t seed) const {
  const auto a = static_cast<Eigen::Index>(spec_.n_attributes);
  LatentSample out;
  out.s.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec_.d_s));
  out.factors.resize(static_cast<Eigen::Index>(n), a);
  std::mt19937_64 rng(mix_seed(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const auto nuisance = spec_.nuisance_dims();
  for (Eigen::Index i = 0; i < out.s.rows(); ++i) {
    for (Eigen::Index j = 0; j < a; ++j) {
      const bool on = coin(rng);
      out.factors(i, j) = on ? 1.0 : 0.0;
      for (auto d : spec_.planted_dims[static_cast<std::size_t>(j)])
        out.s(i, static_cast<Eigen::Index>(d)) =
            (on ? spec_.planted_amplitude : -spec_.planted_amplitude) + spec_.planted_noise * gauss(rng);
    }
    for (auto d : nuisance) out.s(i, static_cast<Eigen::Index>(d)) = gauss(rng);
  }
  return out;
}

LatentDataset ToyGenerator::make_dataset(const Matrix& s, LatentSpace space) const {
  const auto n = s.rows();
  LatentDataset ds;
  ds.space = space;
  ds.domain = spec_.domain;
  ds.attribute_names = spec_.attribute_names;
  ds.latents.resize(n, static_cast<Eigen::Index>(spec_.d_s));
  ds.scores.resize(n, static_cast<Eigen::Index>(spec_.n_attributes));
  Matrix emb(n, static_cast<Eigen::Index>(spec_.embed_dim));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector si = s.row(i).transpose();
    const auto out = render(si, 0.0);
    ds.scores.row(i) = oracle_classify(out).transpose();
    emb.row(i) = identity_embed(out).transpose();
    ds.latents.row(i) = (space == LatentSpace::S ? si : unmix(si)).transpose();
  }
  ds.embeddings = std::move(emb);
  return ds;
}

std::pair<LatentDataset, LatentDataset> ToyGenerator::sample_dataset(std::size_t n, std::uint64_t seed) const {
  if (n < 1) throw ValidationError("sample_dataset: n must be at least 1");
  const auto sample = sample_latents(n, seed);
  auto s_ds = make_dataset(sample.s, LatentSpace::S);
  LatentDataset z_ds = s_ds;
  z_ds.space = LatentSpace::Z;
  for (Eigen::Index i = 0; i < z_ds.latents.rows(); ++i)
    z_ds.latents.row(i) = unmix(sample.s.row(i).transpose()).transpose();
  return {std::move(z_ds), std::move(s_ds)};
}

Vector ToyGenerator::latent_mean(std::size_t draws, std::uint64_t seed) const {
  const auto sample = sample_latents(draws, seed);
  return sample.s.colwise().mean().transpose();
}

}  // namespace lsw::toygen
