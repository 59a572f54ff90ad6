#ifndef COURTQG_METRICS_HPP
#define COURTQG_METRICS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace courtqg {

using TokenSeq = std::vector<std::string>;

// Clipped n-gram overlap F1. Precision over candidate n-grams, recall over
// reference n-grams; either side empty scores 0.
double rouge_n(const TokenSeq& candidate, const TokenSeq& reference, size_t n);

// Longest-common-subsequence F1.
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

struct BleuBreakdown {
  std::array<double, 4> precisions{};  // pooled clipped modified precisions
  double brevity_penalty = 1.0;
  size_t candidate_len = 0;
  size_t reference_len = 0;
  double score = 0.0;
};

// Corpus BLEU-4: clipped 1..4-gram precisions pooled over all pairs,
// geometric mean with uniform weights, brevity penalty exp(1 - r/c) when
// c <= r. No smoothing: any pooled precision of zero makes the score zero.
BleuBreakdown bleu4_breakdown(const std::vector<TokenSeq>& candidates,
                              const std::vector<TokenSeq>& references);
double bleu4(const std::vector<TokenSeq>& candidates,
             const std::vector<TokenSeq>& references);

// Single-pair BLEU-4 (the corpus formula on one pair); used for per-example
// score lists only.
double sentence_bleu4(const TokenSeq& candidate, const TokenSeq& reference);

// One-sided paired bootstrap on the mean difference a - b. Returns
// (#resamples with mean(a*) - mean(b*) <= 0 + 1) / (n_resamples + 1);
// small values mean a reliably outscores b. Deterministic given the seed.
double paired_significance(const std::vector<double>& scores_a,
                           const std::vector<double>& scores_b, size_t n_resamples,
                           uint64_t seed);

struct MetricReport {
  double rouge1 = 0.0, rouge2 = 0.0, rouge3 = 0.0, rougeL = 0.0, bleu4 = 0.0;  // in [0,1]
  size_t n = 0;
  // Per-example scores, retained for significance testing.
  std::vector<double> per_rouge1, per_rouge2, per_rouge3, per_rougeL, per_bleu4;

  // {"rouge1": .., "rouge2": .., "rouge3": .., "rougeL": .., "bleu4": .., "n": ..}
  // with scores scaled by 100 and rounded to 2 decimals.
  std::string to_json() const;
};

// ROUGE scores are averaged per example; BLEU-4 is corpus-pooled.
MetricReport evaluate_all(const std::vector<TokenSeq>& candidates,
                          const std::vector<TokenSeq>& references);

}  // namespace courtqg

#endif  // COURTQG_METRICS_HPP
