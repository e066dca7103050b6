#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace affectfuse {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Derives a 64-bit seed from a master seed and a path of labels, e.g.
/// `derive_seed(master, {"tune", "text+emb", "E"})`. The labels are
/// length-prefixed before hashing so distinct paths never alias.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> labels);

/// Number of Unicode code points in a UTF-8 string (continuation bytes are
/// not counted; invalid sequences count one per lead byte).
std::size_t utf8_length(std::string_view text);

/// Seeded 64-bit generator with platform-independent derived draws.
///
/// The mt19937_64 output sequence is fixed by the standard but
/// `std::uniform_*_distribution` is not, so derived draws are computed here
/// from the raw stream to stay bit-reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer on [0, bound), unbiased. `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Read-only row-major view over a dense matrix.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t r) const { return data.subspan(r * cols, cols); }
};

}  // namespace affectfuse
