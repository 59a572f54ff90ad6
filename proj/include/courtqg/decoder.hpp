#ifndef COURTQG_DECODER_HPP
#define COURTQG_DECODER_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "courtqg/data.hpp"
#include "courtqg/tensor.hpp"

namespace courtqg {

// Per-fragment augmentation of the base vocabulary: context tokens that are
// out of vocabulary receive temporary ids |V|, |V|+1, ... in order of first
// appearance, so the copy distribution can address them.
struct ExtendedVocabMap {
  size_t base = 0;  // |V|
  std::vector<std::string> oov_tokens;
  std::unordered_map<std::string, int> oov_ids;

  static ExtendedVocabMap build(const Vocab& vocab,
                                const std::vector<std::string>& context_tokens);

  size_t extended_size() const { return base + oov_tokens.size(); }

  // Vocab id, temporary id, or kUnk when the token appears nowhere.
  int id_of(const std::string& token, const Vocab& vocab) const;

  // Surface form for any extended id.
  const std::string& token_for(int ext_id, const Vocab& vocab) const;
};

struct DecoderParams {
  NodePtr init_proj;            // d_h x 8*d_h, maps mean fused state to h0
  NodePtr lstm_w, lstm_b;       // decoder LSTM, input = previous-token embedding
  NodePtr att_memory;           // d_att x d_mem
  NodePtr att_state;            // d_att x d_h
  NodePtr att_bias;             // d_att
  NodePtr att_score;            // d_att
  NodePtr out_w, out_b;         // |V| x (d_h + d_mem), |V|
  NodePtr gate_w, gate_b;       // 1 x (d_mem + d_h + d_word), 1

  static DecoderParams create(ParamSet& params, size_t vocab_size, size_t d_word, size_t d_h,
                              size_t d_att, Rng& rng);
};

// Attention memory over word positions. Entry (i,t) is the word state of
// token t in utterance i concatenated with that utterance's fused state, laid
// out flat in (i,t) order.
struct DecoderMemory {
  Tensor entries;             // T x d_mem
  Tensor entries_t;           // d_mem x T
  Tensor att_premul;          // T x d_att, entries · att_memoryᵀ (computed once)
  std::vector<int> ext_ids;   // per position: extended id of its token
  size_t length() const { return ext_ids.size(); }
};

DecoderMemory build_memory(Tape& tape, const DecoderParams& params,
                           const std::vector<std::vector<Tensor>>& word_states,
                           const std::vector<Tensor>& fused_states,
                           const std::vector<int>& position_ext_ids);

struct DecoderState {
  Tensor hidden;
  Tensor cell;
  int prev_token = Vocab::kBos;  // extended id of the previously emitted token
  size_t step = 0;
};

struct StepDistribution {
  Tensor final;      // probabilities over the extended vocabulary, sums to 1
  Tensor attention;  // probabilities over memory positions, sums to 1
  double p_gen = 1.0;
};

// hidden = tanh(init_proj · mean(fused)); cell = 0; previous token = BOS.
DecoderState init_decoder(Tape& tape, const DecoderParams& params,
                          const std::vector<Tensor>& fused_states);

// One decoder step: previous-token embedding -> LSTM -> additive attention ->
// vocabulary softmax mixed with the copy distribution through the p_gen gate.
// With disable_copy the gate is pinned to 1 and the copy path is skipped.
std::pair<StepDistribution, DecoderState> decode_step(
    Tape& tape, const DecoderParams& params, const NodePtr& word_embedding,
    const DecoderMemory& memory, const DecoderState& state, size_t n_oov, bool disable_copy);

// ---- search ----------------------------------------------------------------

// What a search step hands back: the final distribution (plain values), the
// successor state, and the attention-argmax position (used to realize UNK).
template <typename State>
struct SearchStep {
  std::vector<double> probs;
  State state;
  size_t best_copy_pos = 0;
};

struct SearchResult {
  std::vector<int> tokens;             // extended ids, EOS stripped
  std::vector<size_t> copy_positions;  // per emitted token
  double log_prob = 0.0;               // total, before length normalization
  double normalized = 0.0;             // log_prob / length (EOS counted)
};

// Length-normalized beam search over an arbitrary step function. Greedy
// decoding is exactly beam_size == 1: candidates are ordered by score with
// ties broken toward the lowest token id, and PAD/BOS are never emitted.
template <typename State, typename StepFn>
SearchResult beam_search(const State& init_state, StepFn&& step_fn, size_t beam_size,
                         size_t max_len) {
  if (beam_size < 1) throw DomainError("beam_search: beam size must be >= 1");
  if (max_len < 1) throw DomainError("beam_search: max_len must be >= 1");

  struct Hyp {
    State state;
    std::vector<int> tokens;  // includes EOS when finished
    std::vector<size_t> copy_positions;
    double log_prob = 0.0;
  };

  auto normalized = [](const Hyp& h) {
    return h.log_prob / static_cast<double>(h.tokens.size());
  };
  // Deterministic ordering for finished hypotheses: higher normalized score
  // first, then lexicographically smaller token sequence.
  auto better = [&](const Hyp& a, const Hyp& b) {
    const double na = normalized(a), nb = normalized(b);
    if (na != nb) return na > nb;
    return a.tokens < b.tokens;
  };

  std::vector<Hyp> live(1);
  live[0] = Hyp{init_state, {}, {}, 0.0};
  std::vector<Hyp> finished;

  for (size_t step = 0; step < max_len && !live.empty(); ++step) {
    struct Cand {
      size_t hyp;
      int token;
      double log_prob;
      size_t copy_pos;
    };
    std::vector<Cand> cands;
    std::vector<State> next_states;
    next_states.reserve(live.size());

    for (size_t hi = 0; hi < live.size(); ++hi) {
      int prev = live[hi].tokens.empty() ? Vocab::kBos : live[hi].tokens.back();
      SearchStep<State> out = step_fn(live[hi].state, prev);
      next_states.push_back(std::move(out.state));
      for (int tok = 0; tok < static_cast<int>(out.probs.size()); ++tok) {
        if (tok == Vocab::kPad || tok == Vocab::kBos) continue;
        cands.push_back(
            {hi, tok, live[hi].log_prob + std::log(out.probs[tok]), out.best_copy_pos});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      if (a.token != b.token) return a.token < b.token;
      return a.hyp < b.hyp;
    });

    // Top beam_size extensions in total; finished ones shrink the live beam,
    // which makes beam_size == 1 coincide with greedy decoding exactly.
    std::vector<Hyp> next_live;
    size_t selected = 0;
    for (const Cand& c : cands) {
      if (selected >= beam_size) break;
      ++selected;
      Hyp h = live[c.hyp];
      h.state = next_states[c.hyp];
      h.tokens.push_back(c.token);
      h.copy_positions.push_back(c.copy_pos);
      h.log_prob = c.log_prob;
      if (c.token == Vocab::kEos) {
        finished.push_back(std::move(h));
      } else {
        next_live.push_back(std::move(h));
      }
    }
    live = std::move(next_live);
  }
  for (Hyp& h : live) finished.push_back(std::move(h));
  if (finished.empty()) return {};

  const Hyp* best = &finished[0];
  for (const Hyp& h : finished)
    if (better(h, *best)) best = &h;

  SearchResult result;
  result.log_prob = best->log_prob;
  result.normalized = normalized(*best);
  result.tokens = best->tokens;
  result.copy_positions = best->copy_positions;
  if (!result.tokens.empty() && result.tokens.back() == Vocab::kEos) {
    result.tokens.pop_back();
    result.copy_positions.pop_back();
  }
  return result;
}

}  // namespace courtqg

#endif  // COURTQG_DECODER_HPP
