#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "justitia/predictor.hpp"

namespace justitia {

std::vector<std::string> TfidfVectorizer::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c == '_') {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::map<std::string, double> TfidfVectorizer::term_frequencies(std::string_view doc) {
  const auto tokens = tokenize(doc);
  std::map<std::string, double> tf;
  for (const auto& t : tokens) tf[t] += 1.0;
  if (!tokens.empty()) {
    for (auto& [term, count] : tf) count /= static_cast<double>(tokens.size());
  }
  return tf;
}

TfidfVectorizer TfidfVectorizer::fit(std::span<const std::string> corpus, std::size_t max_terms) {
  if (corpus.empty()) throw std::invalid_argument("cannot fit TF-IDF on an empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    auto tokens = tokenize(doc);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[t];
  }
  std::vector<std::pair<std::string, std::size_t>> terms(df.begin(), df.end());
  if (terms.size() > max_terms) {
    std::stable_sort(terms.begin(), terms.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    terms.resize(max_terms);
    std::sort(terms.begin(), terms.end());
  }
  const auto n = static_cast<double>(corpus.size());
  std::vector<std::string> vocab;
  std::vector<double> idf;
  for (auto& [term, count] : terms) {
    vocab.push_back(term);
    idf.push_back(std::log(n / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return from_parts(std::move(vocab), std::move(idf), corpus.size());
}

TfidfVectorizer TfidfVectorizer::from_parts(std::vector<std::string> vocabulary,
                                            std::vector<double> idf, std::size_t corpus_size) {
  if (vocabulary.size() != idf.size()) {
    throw std::invalid_argument("vocabulary and idf sizes differ");
  }
  TfidfVectorizer v;
  v.vocabulary_ = std::move(vocabulary);
  v.idf_ = std::move(idf);
  v.corpus_size_ = corpus_size;
  for (std::size_t i = 0; i < v.vocabulary_.size(); ++i) {
    if (!std::isfinite(v.idf_[i]) || v.idf_[i] < 0.0) {
      throw std::invalid_argument("idf weights must be finite and non-negative");
    }
    v.index_.emplace(v.vocabulary_[i], i);
  }
  return v;
}

std::vector<double> TfidfVectorizer::transform(std::string_view doc) const {
  std::vector<double> out(vocabulary_.size(), 0.0);
  for (const auto& [term, tf] : term_frequencies(doc)) {
    auto it = index_.find(term);
    if (it != index_.end()) out[it->second] = tf * idf_[it->second];
  }
  double norm = 0.0;
  for (double v : out) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& v : out) v /= norm;
  }
  return out;
}

std::optional<double> TfidfVectorizer::idf_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return idf_[it->second];
}

}  // namespace justitia
