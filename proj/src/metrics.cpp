#include "courtqg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "courtqg/common.hpp"
#include "json.hpp"

namespace courtqg {

namespace {

// Joined-token n-gram keys; '\x1f' cannot appear inside a token.
std::map<std::string, size_t> ngram_counts(const TokenSeq& tokens, size_t n) {
  std::map<std::string, size_t> counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (size_t j = 0; j < n; ++j) {
      if (j) key.push_back('\x1f');
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

double f1(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double rouge_n(const TokenSeq& candidate, const TokenSeq& reference, size_t n) {
  if (n < 1) throw DomainError("rouge_n: n must be >= 1");
  auto cand = ngram_counts(candidate, n);
  auto ref = ngram_counts(reference, n);
  size_t cand_total = 0, ref_total = 0, overlap = 0;
  for (const auto& [k, c] : cand) cand_total += c;
  for (const auto& [k, c] : ref) ref_total += c;
  if (cand_total == 0 || ref_total == 0) return 0.0;
  for (const auto& [k, c] : cand) {
    auto it = ref.find(k);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  const double p = static_cast<double>(overlap) / cand_total;
  const double r = static_cast<double>(overlap) / ref_total;
  return f1(p, r);
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const size_t m = candidate.size(), n = reference.size();
  std::vector<size_t> prev(n + 1, 0), cur(n + 1, 0);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      if (candidate[i - 1] == reference[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[n]);
  return f1(lcs / m, lcs / n);
}

BleuBreakdown bleu4_breakdown(const std::vector<TokenSeq>& candidates,
                              const std::vector<TokenSeq>& references) {
  if (candidates.size() != references.size())
    throw DimensionError("bleu4: " + std::to_string(candidates.size()) + " candidates vs " +
                         std::to_string(references.size()) + " references");
  if (candidates.empty()) throw DimensionError("bleu4: empty corpus");

  BleuBreakdown out;
  std::array<size_t, 4> matched{}, total{};
  for (size_t i = 0; i < candidates.size(); ++i) {
    out.candidate_len += candidates[i].size();
    out.reference_len += references[i].size();
    for (size_t n = 1; n <= 4; ++n) {
      auto cand = ngram_counts(candidates[i], n);
      auto ref = ngram_counts(references[i], n);
      for (const auto& [k, c] : cand) {
        total[n - 1] += c;
        auto it = ref.find(k);
        if (it != ref.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }

  for (size_t n = 0; n < 4; ++n)
    out.precisions[n] =
        total[n] == 0 ? 0.0 : static_cast<double>(matched[n]) / static_cast<double>(total[n]);

  if (out.candidate_len == 0) {
    out.brevity_penalty = 0.0;
    out.score = 0.0;
    return out;
  }
  out.brevity_penalty =
      out.candidate_len <= out.reference_len
          ? std::exp(1.0 - static_cast<double>(out.reference_len) / out.candidate_len)
          : 1.0;

  double log_sum = 0.0;
  for (double p : out.precisions) {
    if (p == 0.0) {
      out.score = 0.0;
      return out;
    }
    log_sum += std::log(p);
  }
  out.score = out.brevity_penalty * std::exp(log_sum / 4.0);
  return out;
}

double bleu4(const std::vector<TokenSeq>& candidates,
             const std::vector<TokenSeq>& references) {
  return bleu4_breakdown(candidates, references).score;
}

double sentence_bleu4(const TokenSeq& candidate, const TokenSeq& reference) {
  return bleu4_breakdown({candidate}, {reference}).score;
}

double paired_significance(const std::vector<double>& scores_a,
                           const std::vector<double>& scores_b, size_t n_resamples,
                           uint64_t seed) {
  if (scores_a.size() != scores_b.size())
    throw DimensionError("paired_significance: " + std::to_string(scores_a.size()) + " vs " +
                         std::to_string(scores_b.size()) + " scores");
  if (scores_a.empty()) throw DomainError("paired_significance: empty score lists");
  if (n_resamples < 1000) throw DomainError("paired_significance: need >= 1000 resamples");

  const size_t n = scores_a.size();
  std::vector<double> diff(n);
  for (size_t i = 0; i < n; ++i) diff[i] = scores_a[i] - scores_b[i];

  Rng rng(seed);
  size_t not_better = 0;
  for (size_t r = 0; r < n_resamples; ++r) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += diff[rng.below(n)];
    if (mean <= 0.0) ++not_better;
  }
  return static_cast<double>(not_better + 1) / static_cast<double>(n_resamples + 1);
}

std::string MetricReport::to_json() const {
  auto scaled = [](double x) { return std::round(x * 10000.0) / 100.0; };
  nlohmann::ordered_json j;
  j["rouge1"] = scaled(rouge1);
  j["rouge2"] = scaled(rouge2);
  j["rouge3"] = scaled(rouge3);
  j["rougeL"] = scaled(rougeL);
  j["bleu4"] = scaled(bleu4);
  j["n"] = n;
  return j.dump();
}

MetricReport evaluate_all(const std::vector<TokenSeq>& candidates,
                          const std::vector<TokenSeq>& references) {
  if (candidates.size() != references.size())
    throw DimensionError("evaluate_all: candidate/reference count mismatch");
  MetricReport report;
  report.n = candidates.size();
  for (size_t i = 0; i < candidates.size(); ++i) {
    report.per_rouge1.push_back(rouge_n(candidates[i], references[i], 1));
    report.per_rouge2.push_back(rouge_n(candidates[i], references[i], 2));
    report.per_rouge3.push_back(rouge_n(candidates[i], references[i], 3));
    report.per_rougeL.push_back(rouge_l(candidates[i], references[i]));
    report.per_bleu4.push_back(sentence_bleu4(candidates[i], references[i]));
  }
  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  report.rouge1 = mean(report.per_rouge1);
  report.rouge2 = mean(report.per_rouge2);
  report.rouge3 = mean(report.per_rouge3);
  report.rougeL = mean(report.per_rougeL);
  report.bleu4 = candidates.empty() ? 0.0 : bleu4(candidates, references);
  return report;
}

}  // namespace courtqg
