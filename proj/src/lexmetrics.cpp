#include "summscore/lexmetrics.hpp"

#include <algorithm>
#include <cmath>

#include "summscore/tokenizer.hpp"

namespace summscore {

namespace {

// N-grams keyed by their tokens joined with an unlikely separator byte.
std::unordered_map<std::string, int> ngram_counts(std::span<const std::string> tokens, int n) {
  std::unordered_map<std::string, int> counts;
  if (n < 1 || tokens.size() < static_cast<std::size_t>(n)) return counts;
  counts.reserve(tokens.size());
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key.append(tokens[i + k]);
    }
    ++counts[key];
  }
  return counts;
}

long long clipped_matches(const std::unordered_map<std::string, int>& cand,
                          const std::unordered_map<std::string, int>& ref) {
  long long matches = 0;
  for (const auto& [gram, count] : cand) {
    const auto it = ref.find(gram);
    if (it != ref.end()) {
      matches += std::min(count, it->second);
    }
  }
  return matches;
}

PRF make_prf(long long matches, long long cand_total, long long ref_total) {
  PRF out;
  out.precision = cand_total > 0 ? static_cast<double>(matches) / static_cast<double>(cand_total) : 0.0;
  out.recall = ref_total > 0 ? static_cast<double>(matches) / static_cast<double>(ref_total) : 0.0;
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

}  // namespace

std::vector<std::string> metric_tokenize(std::string_view text) {
  return split_tokens(text);
}

PRF rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
            int n) {
  if (n < 1) {
    throw std::invalid_argument("rouge_n needs n >= 1");
  }
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  long long cand_total = 0, ref_total = 0;
  for (const auto& [g, c] : cand) cand_total += c;
  for (const auto& [g, c] : ref) ref_total += c;
  return make_prf(clipped_matches(cand, ref), cand_total, ref_total);
}

PRF rouge_n(std::string_view candidate, std::string_view reference, int n) {
  const auto c = metric_tokenize(candidate);
  const auto r = metric_tokenize(reference);
  return rouge_n(c, r, n);
}

PRF rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  const std::size_t n = candidate.size();
  const std::size_t m = reference.size();
  long long lcs = 0;
  if (n > 0 && m > 0) {
    // Single-row LCS dynamic program.
    std::vector<long long> prev(m + 1, 0), curr(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= m; ++j) {
        if (candidate[i - 1] == reference[j - 1]) {
          curr[j] = prev[j - 1] + 1;
        } else {
          curr[j] = std::max(prev[j], curr[j - 1]);
        }
      }
      std::swap(prev, curr);
    }
    lcs = prev[m];
  }
  return make_prf(lcs, static_cast<long long>(n), static_cast<long long>(m));
}

PRF rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = metric_tokenize(candidate);
  const auto r = metric_tokenize(reference);
  return rouge_l(c, r);
}

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
            int max_n, bool smooth) {
  if (max_n < 1 || max_n > 4) {
    throw std::invalid_argument("bleu supports max_n in [1, 4]");
  }
  const auto cand_len = static_cast<long long>(candidate.size());
  const auto ref_len = static_cast<long long>(reference.size());
  if (cand_len == 0) return 0.0;

  double log_precision_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    long long total = std::max<long long>(0, cand_len - n + 1);
    long long correct = clipped_matches(cand, ref);
    if (smooth && n > 1) {
      correct += 1;
      total += 1;
    }
    if (correct == 0 || total == 0) return 0.0;
    log_precision_sum += std::log(static_cast<double>(correct) / static_cast<double>(total));
  }

  double brevity_penalty = 1.0;
  if (cand_len < ref_len) {
    brevity_penalty = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  }
  return brevity_penalty * std::exp(log_precision_sum / max_n);
}

double bleu(std::string_view candidate, std::string_view reference, int max_n, bool smooth) {
  const auto c = metric_tokenize(candidate);
  const auto r = metric_tokenize(reference);
  return bleu(c, r, max_n, smooth);
}

void TfIdfStats::add_document(std::string_view text) {
  const auto tokens = metric_tokenize(text);
  add_document(tokens);
}

void TfIdfStats::add_document(std::span<const std::string> tokens) {
  ++document_count_;
  std::unordered_map<std::string, bool> seen;
  seen.reserve(tokens.size());
  for (const std::string& token : tokens) {
    if (!seen.emplace(token, true).second) continue;
    ++df_[token];
  }
}

int TfIdfStats::document_frequency(const std::string& token) const {
  const auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double TfIdfStats::idf(const std::string& token) const {
  return std::log((1.0 + document_count_) / (1.0 + document_frequency(token))) + 1.0;
}

TfIdfStats build_tfidf_stats(std::span<const std::string> documents) {
  TfIdfStats stats;
  for (const std::string& doc : documents) {
    stats.add_document(doc);
  }
  return stats;
}

double tfidf_cosine(std::string_view a, std::string_view b, const TfIdfStats& stats) {
  const auto ta = metric_tokenize(a);
  const auto tb = metric_tokenize(b);
  std::unordered_map<std::string, int> ca, cb;
  for (const auto& t : ta) ++ca[t];
  for (const auto& t : tb) ++cb[t];

  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (const auto& [token, tf] : ca) {
    const double w = tf * stats.idf(token);
    norm_a += w * w;
    const auto it = cb.find(token);
    if (it != cb.end()) {
      dot += w * (it->second * stats.idf(token));
    }
  }
  for (const auto& [token, tf] : cb) {
    const double w = tf * stats.idf(token);
    norm_b += w * w;
  }
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

}  // namespace summscore
