#include <fstream>
#include <limits>

#include "affectfuse/featurize.hpp"
#include "binary_io.hpp"

namespace affectfuse::features {
namespace {

constexpr std::string_view kEmbMagic = "EMB1";
constexpr std::string_view kMatMagic = "FMAT1";

std::uint32_t checked_u32(std::size_t n, std::string_view what) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(std::string(what) + " does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(n);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

void save_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out.write(kEmbMagic.data(), static_cast<std::streamsize>(kEmbMagic.size()));
  detail::put_uint(out, checked_u32(table.size(), "record count"));
  detail::put_uint(out, checked_u32(table.dim(), "dimension"));
  for (const auto& id : table.ids()) {
    detail::put_short_string(out, id);
    for (float v : table.vector(id)) detail::put_f32(out, v);
  }
  if (!out) throw FormatError("failed to write EMB1 stream");
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  auto out = open_output(path);
  save_embeddings(out, table);
}

EmbeddingTable load_embeddings(std::istream& in) {
  detail::expect_magic(in, kEmbMagic);
  const auto count = detail::get_uint<std::uint32_t>(in, "record count");
  const auto dim = detail::get_uint<std::uint32_t>(in, "dimension");
  EmbeddingTable table(dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    std::string id = detail::get_short_string(in, "record id");
    std::vector<float> v(dim);
    for (auto& x : v) x = detail::get_f32(in, "vector values");
    table.add(std::move(id), std::move(v));
  }
  detail::expect_eof(in);
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_embeddings(in);
}

void save_matrix(std::ostream& out, const FeatureMatrix& matrix) {
  out.write(kMatMagic.data(), static_cast<std::streamsize>(kMatMagic.size()));
  detail::put_uint(out, checked_u32(matrix.rows(), "row count"));
  detail::put_uint(out, checked_u32(matrix.cols(), "column count"));
  for (const auto& id : matrix.ids()) detail::put_short_string(out, id);
  for (double v : matrix.data()) detail::put_f64(out, v);
  if (!out) throw FormatError("failed to write FMAT1 stream");
}

void save_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix) {
  auto out = open_output(path);
  save_matrix(out, matrix);
}

FeatureMatrix load_matrix(std::istream& in) {
  detail::expect_magic(in, kMatMagic);
  const auto rows = detail::get_uint<std::uint32_t>(in, "row count");
  const auto cols = detail::get_uint<std::uint32_t>(in, "column count");
  std::vector<std::string> ids;
  ids.reserve(rows);
  for (std::uint32_t r = 0; r < rows; ++r) ids.push_back(detail::get_short_string(in, "row id"));
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (auto& v : data) v = detail::get_f64(in, "matrix values");
  detail::expect_eof(in);
  return FeatureMatrix(std::move(ids), cols, std::move(data));
}

FeatureMatrix load_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_matrix(in);
}

}  // namespace affectfuse::features
