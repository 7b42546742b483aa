#include "lsw/dataio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace lsw {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(LatentSpace space) { return space == LatentSpace::Z ? "Z" : "S"; }

LatentSpace latent_space_from_string(std::string_view tag) {
  if (tag == "Z" || tag == "z") return LatentSpace::Z;
  if (tag == "S" || tag == "s" || tag == "W" || tag == "w") return LatentSpace::S;
  throw ValidationError("unknown latent space tag '" + std::string(tag) + "'");
}

std::string_view to_string(RankerId id) {
  switch (id) {
    case RankerId::ForestMdi: return "forest_mdi";
    case RankerId::ScoreTopk: return "score_topk";
    case RankerId::LinearCoef: return "linear_coef";
  }
  return "forest_mdi";
}

RankerId ranker_from_string(std::string_view name) {
  if (name == "forest_mdi") return RankerId::ForestMdi;
  if (name == "score_topk") return RankerId::ScoreTopk;
  if (name == "linear_coef") return RankerId::LinearCoef;
  throw ValidationError("unknown ranker '" + std::string(name) + "'");
}

std::size_t LatentDataset::attribute_index(std::string_view name) const {
  auto it = std::find(attribute_names.begin(), attribute_names.end(), name);
  if (it == attribute_names.end()) throw ValidationError("unknown attribute '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - attribute_names.begin());
}

void LatentDataset::validate() const {
  const auto n = latents.rows();
  if (scores.rows() != n)
    throw ValidationError("scores have " + std::to_string(scores.rows()) + " rows, latents have " + std::to_string(n));
  if (scores.cols() != static_cast<Eigen::Index>(attribute_names.size()))
    throw ValidationError("scores have " + std::to_string(scores.cols()) + " columns but " +
                          std::to_string(attribute_names.size()) + " attribute names");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < latents.cols(); ++j)
      if (!std::isfinite(latents(i, j)))
        throw ValidationError("non-finite latent at row " + std::to_string(i) + ", dim " + std::to_string(j));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      double v = scores(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("score out of [0,1] at row " + std::to_string(i) + ", column '" +
                              attribute_names[static_cast<std::size_t>(j)] + "'");
    }
  if (embeddings) {
    if (embeddings->rows() != n)
      throw ValidationError("embeddings have " + std::to_string(embeddings->rows()) + " rows, latents have " +
                            std::to_string(n));
    if (!embeddings->allFinite()) throw ValidationError("non-finite embedding value");
  }
}

LatentDataset LatentDataset::slice(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  return select(rows);
}

LatentDataset LatentDataset::select(const std::vector<std::size_t>& rows) const {
  LatentDataset out;
  out.space = space;
  out.attribute_names = attribute_names;
  out.domain = domain;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.latents.resize(m, latents.cols());
  out.scores.resize(m, scores.cols());
  if (embeddings) out.embeddings = Matrix(m, embeddings->cols());
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto src = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
    if (src >= latents.rows()) throw ValidationError("row index out of range");
    out.latents.row(r) = latents.row(src);
    out.scores.row(r) = scores.row(src);
    if (embeddings) out.embeddings->row(r) = embeddings->row(src);
  }
  return out;
}

std::pair<LatentDataset, LatentDataset> split_train_test(const LatentDataset& ds, double train_fraction) {
  const auto n = ds.n_samples();
  auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  if (cut == 0 || cut == n) throw ValidationError("dataset too small to split into train and test");
  return {ds.slice(0, cut), ds.slice(cut, n)};
}

void FeatureRanking::validate() const {
  const auto d = importances.size();
  if (order.size() != d) throw ValidationError("ranking order length differs from importance length");
  std::vector<bool> seen(d, false);
  for (auto idx : order) {
    if (idx >= d || seen[idx]) throw ValidationError("ranking order is not a permutation");
    seen[idx] = true;
  }
  double sum = 0.0;
  for (double v : importances) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("importances must be finite and non-negative");
    sum += v;
  }
  if (sum > 0.0 && std::abs(sum - 1.0) > 1e-6) throw ValidationError("importances must sum to 1");
  for (std::size_t i = 0; i + 1 < d; ++i) {
    double a = importances[order[i]], b = importances[order[i + 1]];
    if (a < b || (a == b && order[i] > order[i + 1]))
      throw ValidationError("ranking order is not sorted by importance with ascending-index ties");
  }
}

FeatureRanking FeatureRanking::from_scores(std::string attribute, std::vector<double> raw, RankerId ranker) {
  double sum = 0.0;
  for (double& v : raw) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("ranking scores must be finite and non-negative");
    sum += v;
  }
  if (sum > 0.0)
    for (double& v : raw) v /= sum;
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw[a] > raw[b]; });
  return FeatureRanking{std::move(attribute), std::move(order), std::move(raw), ranker};
}

// ---------------------------------------------------------------------------
// Binary matrices

namespace {

template <typename T>
void put_le(std::string& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8;

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return std::move(ss).str();
}

void write_bytes(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

void write_scores_csv(const fs::path& path, const LatentDataset& ds) {
  std::string out = "id";
  for (const auto& name : ds.attribute_names) {
    if (name.find_first_of(",\n\r") != std::string::npos)
      throw ValidationError("attribute name '" + name + "' contains a CSV delimiter");
    out += ',';
    out += name;
  }
  out += '\n';
  for (Eigen::Index i = 0; i < ds.scores.rows(); ++i) {
    out += std::to_string(i);
    for (Eigen::Index j = 0; j < ds.scores.cols(); ++j) {
      out += ',';
      out += format_double(ds.scores(i, j));
    }
    out += '\n';
  }
  write_bytes(path, out);
}

std::pair<std::vector<std::string>, Matrix> read_scores_csv(const fs::path& path) {
  const std::string text = read_bytes(path);
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      auto pos = rest.find('\n');
      auto line = trim(rest.substr(0, pos));
      if (!line.empty()) lines.push_back(line);
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
  }
  if (lines.empty()) throw ValidationError(path.string() + ": missing header");
  auto header = split_csv_line(lines[0]);
  if (trim(header[0]) != "id") throw ValidationError(path.string() + ": header must start with 'id'");
  std::vector<std::string> names;
  for (std::size_t j = 1; j < header.size(); ++j) names.emplace_back(trim(header[j]));

  Matrix scores(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto row = r - 1;
    auto fields = split_csv_line(lines[r]);
    if (fields.size() != header.size())
      throw ValidationError(path.string() + " row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    auto id_field = trim(fields[0]);
    std::size_t id = 0;
    auto [idp, idec] = std::from_chars(id_field.data(), id_field.data() + id_field.size(), id);
    if (idec != std::errc{} || idp != id_field.data() + id_field.size() || id != row)
      throw ValidationError(path.string() + " row " + std::to_string(row) + ": id must equal the row index");
    for (std::size_t j = 0; j < names.size(); ++j) {
      auto f = trim(fields[j + 1]);
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size())
        throw ValidationError(path.string() + " row " + std::to_string(row) + ", column '" + names[j] +
                              "': not a number");
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError(path.string() + " row " + std::to_string(row) + ", column '" + names[j] +
                              "': score " + std::string(f) + " outside [0,1]");
      scores(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return {std::move(names), std::move(scores)};
}

}  // namespace

void write_matrix_f32(const fs::path& path, const Matrix& m) {
  const auto rows = static_cast<std::uint64_t>(m.rows());
  const auto cols = static_cast<std::uint64_t>(m.cols());
  if (cols != 0 && rows > (std::numeric_limits<std::uint64_t>::max() - kHeaderBytes) / 4 / cols)
    throw ValidationError("matrix dimensions overflow the file format");
  std::string buf;
  buf.reserve(kHeaderBytes + rows * cols * 4);
  buf.append(kMagic, 4);
  put_le<std::uint32_t>(buf, kFormatVersion);
  put_le<std::uint64_t>(buf, rows);
  put_le<std::uint64_t>(buf, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_le<float>(buf, static_cast<float>(m(i, j)));
  write_bytes(path, buf);
}

Matrix read_matrix_f32(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  if (bytes.size() < kHeaderBytes) throw ValidationError(path.string() + ": truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ValidationError(path.string() + ": bad magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto version = get_le<std::uint32_t>(p + 4);
  if (version != kFormatVersion)
    throw ValidationError(path.string() + ": unsupported version " + std::to_string(version));
  const auto rows = get_le<std::uint64_t>(p + 8);
  const auto cols = get_le<std::uint64_t>(p + 16);
  if (cols != 0 && rows > (std::numeric_limits<std::uint64_t>::max() - kHeaderBytes) / 4 / cols)
    throw ValidationError(path.string() + ": dimensions overflow");
  if (bytes.size() != kHeaderBytes + rows * cols * 4)
    throw ValidationError(path.string() + ": payload size does not match header " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const unsigned char* payload = p + kHeaderBytes;
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = get_le<float>(payload + 4 * (i * cols + j));
  return m;
}

void write_latents(const fs::path& path, const LatentDataset& ds) {
  ds.validate();
  const fs::path dir = path.parent_path();
  write_matrix_f32(path, ds.latents);
  write_scores_csv(dir / "scores.csv", ds);
  std::error_code ec;
  if (ds.embeddings) {
    write_matrix_f32(dir / "embeddings.f32", *ds.embeddings);
  } else {
    fs::remove(dir / "embeddings.f32", ec);
  }
  json meta = {
      {"space_tag", std::string(to_string(ds.space))},
      {"attribute_names", ds.attribute_names},
      {"domain", ds.domain},
      {"n_samples", ds.n_samples()},
      {"n_dims", ds.n_dims()},
      {"embedding_dims", ds.embeddings ? json(ds.embeddings->cols()) : json(nullptr)},
  };
  write_bytes(dir / "meta.json", meta.dump(2) + "\n");
}

LatentDataset read_latents(const fs::path& path) {
  const fs::path dir = path.parent_path();
  LatentDataset ds;
  ds.latents = read_matrix_f32(path);

  json meta;
  try {
    meta = json::parse(read_bytes(dir / "meta.json"));
  } catch (const json::exception& e) {
    throw ValidationError((dir / "meta.json").string() + ": " + e.what());
  }
  try {
    ds.space = latent_space_from_string(meta.at("space_tag").get<std::string>());
    ds.domain = meta.value("domain", std::string{});
    if (meta.contains("n_samples") && meta["n_samples"].get<std::uint64_t>() != ds.n_samples())
      throw ValidationError("meta.json n_samples disagrees with " + path.filename().string());
    if (meta.contains("n_dims") && meta["n_dims"].get<std::uint64_t>() != ds.n_dims())
      throw ValidationError("meta.json n_dims disagrees with " + path.filename().string());
  } catch (const json::exception& e) {
    throw ValidationError((dir / "meta.json").string() + ": " + e.what());
  }

  auto [names, scores] = read_scores_csv(dir / "scores.csv");
  if (meta.contains("attribute_names") && meta["attribute_names"].get<std::vector<std::string>>() != names)
    throw ValidationError("meta.json attribute_names disagree with scores.csv header");
  ds.attribute_names = std::move(names);
  ds.scores = std::move(scores);
  if (static_cast<std::size_t>(ds.scores.rows()) != ds.n_samples())
    throw ValidationError("scores.csv has " + std::to_string(ds.scores.rows()) + " rows but latents have " +
                          std::to_string(ds.n_samples()));

  if (fs::exists(dir / "embeddings.f32")) {
    ds.embeddings = read_matrix_f32(dir / "embeddings.f32");
    if (static_cast<std::size_t>(ds.embeddings->rows()) != ds.n_samples())
      throw ValidationError("embeddings.f32 has " + std::to_string(ds.embeddings->rows()) +
                            " rows but latents have " + std::to_string(ds.n_samples()));
    const auto& e = meta.contains("embedding_dims") ? meta["embedding_dims"] : json(nullptr);
    if (!e.is_number_unsigned() || e.get<std::uint64_t>() != static_cast<std::uint64_t>(ds.embeddings->cols()))
      throw ValidationError("meta.json embedding_dims disagrees with embeddings.f32");
  } else if (meta.contains("embedding_dims") && !meta["embedding_dims"].is_null()) {
    throw ValidationError("meta.json declares embeddings but embeddings.f32 is missing");
  }
  ds.validate();
  return ds;
}

void write_dataset_dir(const fs::path& dir, const LatentDataset& ds) { write_latents(dir / kLatentsFile, ds); }
LatentDataset read_dataset_dir(const fs::path& dir) { return read_latents(dir / kLatentsFile); }

void save_ranking(const fs::path& path, const FeatureRanking& ranking) {
  ranking.validate();
  json j = {
      {"attribute", ranking.attribute},
      {"ranker_id", std::string(to_string(ranking.ranker))},
      {"order", ranking.order},
      {"importances", ranking.importances},
  };
  write_bytes(path, j.dump(2) + "\n");
}

FeatureRanking load_ranking(const fs::path& path) {
  FeatureRanking r;
  try {
    auto j = json::parse(read_bytes(path));
    r.attribute = j.at("attribute").get<std::string>();
    r.ranker = ranker_from_string(j.at("ranker_id").get<std::string>());
    r.order = j.at("order").get<std::vector<std::size_t>>();
    r.importances = j.at("importances").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  r.validate();
  return r;
}

void write_text_file(const fs::path& path, std::string_view text) { write_bytes(path, text); }
std::string read_text_file(const fs::path& path) { return read_bytes(path); }

}  // namespace lsw
