#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace summscore {

// Surface tokenization for the lexical metrics: lowercase, punctuation split
// into standalone tokens, whitespace-separated. Empty text yields an empty
// list (never an error).
std::vector<std::string> metric_tokenize(std::string_view text);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// N-gram overlap with clipped counts:
//   recall    = clipped matches / reference n-gram count
//   precision = clipped matches / candidate n-gram count
// and f1 their harmonic mean; any zero denominator yields 0.
PRF rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference, int n);
PRF rouge_n(std::string_view candidate, std::string_view reference, int n);

// Longest-common-subsequence variant: with LCS length l,
// precision = l/|candidate|, recall = l/|reference|.
PRF rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);
PRF rouge_l(std::string_view candidate, std::string_view reference);

// Sentence-level BLEU: geometric mean of clipped n-gram precisions for
// n = 1..max_n times the brevity penalty exp(1 - |ref|/|cand|) applied only
// when the candidate is shorter than the reference. Without smoothing any
// zero precision zeroes the score; with smoothing, orders above 1 use
// add-one smoothed precisions.
double bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
            int max_n, bool smooth = false);
double bleu(std::string_view candidate, std::string_view reference, int max_n,
            bool smooth = false);

// Document-frequency table over a declared corpus;
// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
class TfIdfStats {
 public:
  void add_document(std::string_view text);
  void add_document(std::span<const std::string> tokens);

  int document_count() const { return document_count_; }
  int document_frequency(const std::string& token) const;
  double idf(const std::string& token) const;

 private:
  std::unordered_map<std::string, int> df_;
  int document_count_ = 0;
};

TfIdfStats build_tfidf_stats(std::span<const std::string> documents);

// Cosine similarity of raw-count tf-idf vectors; 0 when either vector is
// zero. Symmetric in its two texts.
double tfidf_cosine(std::string_view a, std::string_view b, const TfIdfStats& stats);

}  // namespace summscore
