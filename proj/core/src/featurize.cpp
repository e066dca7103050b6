#include "affectfuse/featurize.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "affectfuse/error.hpp"

namespace affectfuse::features {

FeatureMatrix::FeatureMatrix(std::vector<std::string> ids, std::size_t n_cols, std::vector<double> data)
    : ids_(std::move(ids)), n_cols_(n_cols), data_(std::move(data)) {
  if (data_.size() != ids_.size() * n_cols_) {
    throw DimMismatch("feature matrix has " + std::to_string(data_.size()) + " values for " +
                      std::to_string(ids_.size()) + " rows x " + std::to_string(n_cols_) + " cols");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw FormatError("feature matrix contains a non-finite value");
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c >= 0 && u_isalnum(c)) {
      const UChar32 lower = u_tolower(c);
      char buf[U8_MAX_LENGTH];
      std::int32_t n = 0;
      U8_APPEND_UNSAFE(reinterpret_cast<std::uint8_t*>(buf), n, lower);
      current.append(buf, static_cast<std::size_t>(n));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  std::vector<std::string> out;
  if (n == 0 || tokens.size() < n) return out;
  out.reserve(tokens.size() - n + 1);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      gram.push_back(' ');
      gram += tokens[i + k];
    }
    out.push_back(std::move(gram));
  }
  return out;
}

Vocab::Vocab(std::vector<std::string> terms, std::set<std::size_t> n_range, std::size_t size_cap)
    : terms_(std::move(terms)), n_range_(std::move(n_range)), size_cap_(size_cap) {
  if (terms_.size() > size_cap_) throw SizeError("vocabulary larger than its size cap");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second) throw FormatError("duplicate vocabulary term '" + terms_[i] + "'");
  }
}

std::size_t Vocab::index_of(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  return it == index_.end() ? npos : it->second;
}

namespace {

// Visits every n-gram of `text` for the requested n values.
template <typename Visit>
void for_each_ngram(std::string_view text, const std::set<std::size_t>& n_range, Visit&& visit) {
  const auto tokens = tokenize(text);
  for (std::size_t n : n_range) {
    for (auto& gram : ngrams(tokens, n)) visit(gram);
  }
}

}  // namespace

Vocab build_vocab(const std::vector<std::string>& train_texts, const std::set<std::size_t>& n_range,
                  std::size_t size_cap) {
  if (n_range.empty() || *n_range.begin() == 0) throw SizeError("n_range must hold positive n values");
  if (size_cap == 0) throw SizeError("vocabulary size cap must be at least 1");

  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& text : train_texts) {
    for_each_ngram(text, n_range, [&](std::string& gram) { ++counts[std::move(gram)]; });
  }
  if (counts.empty()) throw EmptyCorpus("training texts contain no n-grams");

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  const auto keep = std::min(size_cap, ranked.size());
  auto by_frequency = [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    by_frequency);

  std::vector<std::string> terms;
  terms.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) terms.push_back(std::move(ranked[i].first));
  return Vocab(std::move(terms), n_range, size_cap);
}

DocumentFrequencies fit_document_frequencies(const std::vector<std::string>& train_texts,
                                             const Vocab& vocab) {
  DocumentFrequencies df;
  df.n_documents = train_texts.size();
  df.counts.assign(vocab.size(), 0);
  std::unordered_set<std::size_t> present;
  for (const auto& text : train_texts) {
    present.clear();
    for_each_ngram(text, vocab.n_range(), [&](const std::string& gram) {
      if (const auto col = vocab.index_of(gram); col != Vocab::npos) present.insert(col);
    });
    for (auto col : present) ++df.counts[col];
  }
  return df;
}

std::vector<double> idf_weights(const DocumentFrequencies& df) {
  std::vector<double> idf(df.counts.size());
  const double docs = static_cast<double>(df.n_documents);
  for (std::size_t t = 0; t < idf.size(); ++t) {
    idf[t] = std::log((1.0 + docs) / (1.0 + static_cast<double>(df.counts[t]))) + 1.0;
  }
  return idf;
}

FeatureMatrix tfidf(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                    const Vocab& vocab, const DocumentFrequencies& df) {
  if (ids.size() != texts.size()) throw LengthMismatch("ids and texts differ in length");
  if (df.counts.size() != vocab.size()) throw DimMismatch("document frequencies do not match vocabulary");
  const auto idf = idf_weights(df);
  const std::size_t cols = vocab.size();
  std::vector<double> data(texts.size() * cols, 0.0);
  for (std::size_t d = 0; d < texts.size(); ++d) {
    double* row = data.data() + d * cols;
    for_each_ngram(texts[d], vocab.n_range(), [&](const std::string& gram) {
      if (const auto col = vocab.index_of(gram); col != Vocab::npos) row[col] += 1.0;
    });
    for (std::size_t c = 0; c < cols; ++c) row[c] *= idf[c];
  }
  return FeatureMatrix(ids, cols, std::move(data));
}

TfidfModel TfidfModel::fit(const std::vector<std::string>& train_texts,
                           const std::set<std::size_t>& n_range, std::size_t size_cap) {
  TfidfModel model;
  model.vocab = build_vocab(train_texts, n_range, size_cap);
  model.df = fit_document_frequencies(train_texts, model.vocab);
  return model;
}

BowOptions text_bow_defaults() { return BowOptions{{1}, 10000}; }
BowOptions response_bow_defaults() { return BowOptions{{1, 2, 3}, 2000}; }

MaxAbsScaler fit_scaler(const FeatureMatrix& train) {
  std::vector<double> max_abs(train.cols(), 0.0);
  for (std::size_t r = 0; r < train.rows(); ++r) {
    const auto row = train.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) max_abs[c] = std::max(max_abs[c], std::abs(row[c]));
  }
  return MaxAbsScaler(std::move(max_abs));
}

FeatureMatrix scale(const FeatureMatrix& features, const MaxAbsScaler& scaler) {
  const auto& max_abs = scaler.max_abs();
  if (max_abs.size() != features.cols()) {
    throw DimMismatch("scaler fitted on " + std::to_string(max_abs.size()) + " columns, got " +
                      std::to_string(features.cols()));
  }
  std::vector<double> data = features.data();
  const std::size_t cols = features.cols();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double m = max_abs[i % cols];
    if (m != 0.0) data[i] /= m;
  }
  return FeatureMatrix(features.ids(), cols, std::move(data));
}

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw DimZero("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string id, std::vector<float> vector) {
  if (vector.size() != dim_) {
    throw DimMismatch("embedding for '" + id + "' has length " + std::to_string(vector.size()) +
                      ", table dim is " + std::to_string(dim_));
  }
  for (float v : vector) {
    if (!std::isfinite(v)) throw FormatError("embedding for '" + id + "' has a non-finite value");
  }
  if (!index_.emplace(id, ids_.size()).second) throw FormatError("duplicate embedding id '" + id + "'");
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), vector.begin(), vector.end());
}

bool EmbeddingTable::contains(std::string_view id) const { return index_.contains(std::string(id)); }

std::span<const float> EmbeddingTable::vector(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) throw MissingId(std::string(id));
  return std::span<const float>(values_).subspan(it->second * dim_, dim_);
}

FeatureMatrix lookup(const EmbeddingTable& table, const std::vector<std::string>& ids) {
  std::vector<double> data;
  data.reserve(ids.size() * table.dim());
  for (const auto& id : ids) {
    const auto v = table.vector(id);
    data.insert(data.end(), v.begin(), v.end());
  }
  return FeatureMatrix(ids, table.dim(), std::move(data));
}

FeatureMatrix mock_embed(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                         std::size_t dim, std::uint64_t seed) {
  if (ids.size() != texts.size()) throw LengthMismatch("ids and texts differ in length");
  if (dim == 0) throw DimZero("embedding dimension must be positive");
  std::vector<double> data;
  data.reserve(texts.size() * dim);
  for (const auto& text : texts) {
    Rng rng(derive_seed(seed, {"mock-embed", text}));
    for (std::size_t k = 0; k < dim; ++k) data.push_back(rng.uniform(-1.0, 1.0));
  }
  return FeatureMatrix(ids, dim, std::move(data));
}

}  // namespace affectfuse::features
