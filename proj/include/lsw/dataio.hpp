#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsw/common.hpp"

namespace lsw {

enum class LatentSpace { Z, S };

std::string_view to_string(LatentSpace space);
LatentSpace latent_space_from_string(std::string_view tag);

// Latent codes for one space plus per-sample attribute scores and optional
// identity embeddings. Row i of every matrix refers to the same sample.
struct LatentDataset {
  LatentSpace space = LatentSpace::S;
  Matrix latents;                        // N x D
  std::vector<std::string> attribute_names;
  Matrix scores;                         // N x A, entries in [0,1]
  std::optional<Matrix> embeddings;      // N x E
  std::string domain;                    // free-form tag, e.g. "face"; selects the default tau

  std::size_t n_samples() const { return static_cast<std::size_t>(latents.rows()); }
  std::size_t n_dims() const { return static_cast<std::size_t>(latents.cols()); }
  std::size_t n_attributes() const { return attribute_names.size(); }

  // Column index of a named attribute; ValidationError when absent.
  std::size_t attribute_index(std::string_view name) const;

  // Throws ValidationError naming the first offending location.
  void validate() const;

  // Rows [begin, end) as a new dataset.
  LatentDataset slice(std::size_t begin, std::size_t end) const;
  LatentDataset select(const std::vector<std::size_t>& rows) const;
};

// Deterministic 80/20 split by sample index.
std::pair<LatentDataset, LatentDataset> split_train_test(const LatentDataset& ds, double train_fraction = 0.8);

enum class RankerId { ForestMdi, ScoreTopk, LinearCoef };

std::string_view to_string(RankerId id);
RankerId ranker_from_string(std::string_view name);

struct FeatureRanking {
  std::string attribute;
  std::vector<std::size_t> order;  // dimensions by descending importance
  std::vector<double> importances;
  RankerId ranker = RankerId::ForestMdi;

  std::size_t n_dims() const { return importances.size(); }
  void validate() const;

  // Normalizes raw non-negative scores and sorts them descending, ties by
  // ascending dimension index. An all-zero vector yields the identity order.
  static FeatureRanking from_scores(std::string attribute, std::vector<double> raw, RankerId ranker);
};

// Binary matrix file: "LSW3", u32 version=1, u64 rows, u64 cols, then
// rows*cols little-endian float32 in row-major order.
inline constexpr char kMagic[4] = {'L', 'S', 'W', '3'};
inline constexpr std::uint32_t kFormatVersion = 1;

void write_matrix_f32(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_f32(const std::filesystem::path& path);

// Writes the latents file at `path` and the siblings scores.csv,
// embeddings.f32 (when present) and meta.json in the same directory.
void write_latents(const std::filesystem::path& path, const LatentDataset& ds);
LatentDataset read_latents(const std::filesystem::path& path);

// Directory convenience wrappers: <dir>/latents.f32.
inline constexpr const char* kLatentsFile = "latents.f32";
void write_dataset_dir(const std::filesystem::path& dir, const LatentDataset& ds);
LatentDataset read_dataset_dir(const std::filesystem::path& dir);

void save_ranking(const std::filesystem::path& path, const FeatureRanking& ranking);
FeatureRanking load_ranking(const std::filesystem::path& path);

// Whole-file helpers shared by the CLI.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace lsw
