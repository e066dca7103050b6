#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "affectfuse/common.hpp"

namespace affectfuse::features {

/// Dense row-major matrix with one example id per row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Throws DimMismatch if `data.size() != ids.size() * n_cols`, FormatError on non-finite values.
  FeatureMatrix(std::vector<std::string> ids, std::size_t n_cols, std::vector<double> data);

  std::size_t rows() const { return ids_.size(); }
  std::size_t cols() const { return n_cols_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& data() const { return data_; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * n_cols_, n_cols_);
  }
  double at(std::size_t r, std::size_t c) const { return data_[r * n_cols_ + c]; }
  MatrixView view() const { return MatrixView{data_, rows(), n_cols_}; }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<std::string> ids_;
  std::size_t n_cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Bag of words

/// Lowercases (Unicode simple case folding) and splits on runs of
/// non-alphanumeric code points.
std::vector<std::string> tokenize(std::string_view text);

/// All n-grams of `tokens` for one n, joined by single spaces.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t n);

class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> terms, std::set<std::size_t> n_range, std::size_t size_cap);

  const std::vector<std::string>& terms() const { return terms_; }
  const std::set<std::size_t>& n_range() const { return n_range_; }
  std::size_t size_cap() const { return size_cap_; }
  std::size_t size() const { return terms_.size(); }
  /// Column of `term`, or npos.
  std::size_t index_of(std::string_view term) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::string> terms_;
  std::set<std::size_t> n_range_;
  std::size_t size_cap_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The most frequent n-grams of the training texts by total occurrence
/// count, ties broken lexicographically, truncated to `size_cap`.
/// Throws EmptyCorpus when the texts contain no n-gram at all.
Vocab build_vocab(const std::vector<std::string>& train_texts, const std::set<std::size_t>& n_range,
                  std::size_t size_cap);

/// Per-term document frequencies over the training split.
struct DocumentFrequencies {
  std::size_t n_documents = 0;
  std::vector<std::size_t> counts;  // aligned with Vocab::terms()
};

DocumentFrequencies fit_document_frequencies(const std::vector<std::string>& train_texts,
                                             const Vocab& vocab);

/// idf(t) = ln((1 + D) / (1 + df(t))) + 1.
std::vector<double> idf_weights(const DocumentFrequencies& df);

/// cell(d, t) = count of t in d times idf(t); out-of-vocabulary n-grams are ignored.
FeatureMatrix tfidf(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                    const Vocab& vocab, const DocumentFrequencies& df);

/// Vocabulary and document frequencies fitted together on one training split.
struct TfidfModel {
  Vocab vocab;
  DocumentFrequencies df;

  static TfidfModel fit(const std::vector<std::string>& train_texts,
                        const std::set<std::size_t>& n_range, std::size_t size_cap);
  FeatureMatrix transform(const std::vector<std::string>& ids,
                          const std::vector<std::string>& texts) const {
    return tfidf(ids, texts, vocab, df);
  }
};

struct BowOptions {
  std::set<std::size_t> n_range;
  std::size_t size_cap = 0;
};

/// Original texts: unigrams, 10,000 terms.
BowOptions text_bow_defaults();
/// LLM responses: 1- to 3-grams, 2,000 terms.
BowOptions response_bow_defaults();

// ---------------------------------------------------------------------------
// Scaling

class MaxAbsScaler {
 public:
  MaxAbsScaler() = default;
  explicit MaxAbsScaler(std::vector<double> max_abs) : max_abs_(std::move(max_abs)) {}

  const std::vector<double>& max_abs() const { return max_abs_; }

 private:
  std::vector<double> max_abs_;
};

MaxAbsScaler fit_scaler(const FeatureMatrix& train);
/// Divides each column by its training max-abs; zero columns pass through.
/// Throws DimMismatch on a column-count mismatch.
FeatureMatrix scale(const FeatureMatrix& features, const MaxAbsScaler& scaler);

// ---------------------------------------------------------------------------
// Precomputed embeddings (EMB1)

class EmbeddingTable {
 public:
  /// Throws DimZero when dim is 0.
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  /// Throws DimMismatch on a wrong length, FormatError on non-finite values
  /// or a duplicate id.
  void add(std::string id, std::vector<float> vector);
  bool contains(std::string_view id) const;
  /// Throws MissingId.
  std::span<const float> vector(std::string_view id) const;

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// EMB1: "EMB1", u32 count, u32 dim, then per record u16 id length, id
/// bytes, dim little-endian f32. Readers reject truncation and trailing bytes.
void save_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

/// Rows in the requested order; throws MissingId for an unknown id.
FeatureMatrix lookup(const EmbeddingTable& table, const std::vector<std::string>& ids);

/// Deterministic stand-in for a transformer embedder: each text seeds its
/// own generator from (seed, text) and emits `dim` values uniform on [-1, 1].
FeatureMatrix mock_embed(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                         std::size_t dim, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Dense feature cache (FMAT1)

/// FMAT1: "FMAT1", u32 rows, u32 cols, per row u16 id length and id bytes,
/// then rows * cols little-endian f64.
void save_matrix(std::ostream& out, const FeatureMatrix& matrix);
void save_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix load_matrix(std::istream& in);
FeatureMatrix load_matrix(const std::filesystem::path& path);

}  // namespace affectfuse::features
