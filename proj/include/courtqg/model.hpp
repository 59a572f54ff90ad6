#ifndef COURTQG_MODEL_HPP
#define COURTQG_MODEL_HPP

#include <string>
#include <vector>

#include "courtqg/decoder.hpp"
#include "courtqg/encoder.hpp"
#include "courtqg/intent.hpp"

namespace courtqg {

// Degenerate configurations that emulate baseline systems: without intent
// navigation the model is attentional seq2seq with copy; additionally without
// copy it is plain attentional seq2seq.
struct AblationFlags {
  bool disable_intent_nav = false;
  bool disable_role = false;
  bool disable_knowledge = false;
  bool disable_copy = false;

  std::string to_string() const;                     // comma-joined flag names
  static AblationFlags parse(const std::string& s);  // throws ConfigError on unknown flags
  bool operator==(const AblationFlags&) const = default;
};

struct ModelConfig {
  EncoderConfig encoder;
  IntentConfig intent;
  size_t d_att = 32;  // additive-attention size
  AblationFlags ablation;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& json_text);
  bool operator==(const ModelConfig&) const = default;
};

// A fragment converted to model inputs: vocabulary ids for the encoder, the
// per-fragment extended vocabulary, flattened memory positions, and the
// target as extended ids (UNK when a token appears nowhere).
struct PreparedFragment {
  std::string id;
  std::vector<std::vector<int>> context_token_ids;
  std::vector<Role> roles;
  std::vector<std::vector<int>> element_ids;
  ExtendedVocabMap ext;
  std::vector<int> memory_ext_ids;
  std::vector<std::string> memory_tokens;
  std::vector<int> target_ext_ids;
  std::vector<std::string> target_tokens;

  size_t n_oov() const { return ext.oov_tokens.size(); }
};

class Model {
 public:
  Model(ModelConfig cfg, Vocab vocab, KnowledgeVocab kvocab, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  const KnowledgeVocab& knowledge_vocab() const { return kvocab_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  NodePtr param(const std::string& name) const;  // throws ConfigError when missing

  PreparedFragment prepare(const DialogueFragment& fragment) const;

  // Everything the decoder needs about a context, on one tape.
  struct ContextGraph {
    EncodedDialogue encoded;
    std::vector<Tensor> fused;
    DecoderMemory memory;
    DecoderState init;
  };
  ContextGraph build_context(Tape& tape, const PreparedFragment& prep) const;

  // Teacher-forced negative log-likelihood of the target (EOS included),
  // scored on the extended vocabulary. Differentiable.
  Tensor sequence_nll(Tape& tape, const PreparedFragment& prep) const;

  // Scoring path: sum of per-step log probabilities of the gold tokens,
  // accumulated outside the graph. Equals -sequence_nll up to rounding.
  double teacher_forced_log_likelihood(const PreparedFragment& prep) const;

  SearchResult greedy_search(const PreparedFragment& prep, size_t max_len) const;
  SearchResult beam_search_decode(const PreparedFragment& prep, size_t beam_size,
                                  size_t max_len) const;

  // Surface realization: temporary ids keep their context surface form; UNK
  // is replaced by the context token with the highest attention at that step.
  std::vector<std::string> realize(const PreparedFragment& prep,
                                   const SearchResult& result) const;

  std::vector<std::string> greedy_decode(const DialogueFragment& fragment, size_t max_len) const;
  std::vector<std::string> beam_decode(const DialogueFragment& fragment, size_t beam_size,
                                       size_t max_len) const;

  const EncoderParams& encoder_params() const { return enc_; }
  const IntentParams& intent_params() const { return intent_; }
  const DecoderParams& decoder_params() const { return dec_; }

 private:
  // Target ids to score (EOS appended). Without the copy path, temporary ids
  // are unreachable and fall back to UNK.
  std::vector<int> gold_sequence(const PreparedFragment& prep) const;

  ModelConfig cfg_;
  Vocab vocab_;
  KnowledgeVocab kvocab_;
  ParamSet params_;
  EncoderParams enc_;
  IntentParams intent_;
  DecoderParams dec_;
};

}  // namespace courtqg

#endif  // COURTQG_MODEL_HPP
