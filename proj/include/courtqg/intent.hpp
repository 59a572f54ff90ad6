#ifndef COURTQG_INTENT_HPP
#define COURTQG_INTENT_HPP

#include <vector>

#include "courtqg/encoder.hpp"
#include "courtqg/tensor.hpp"

namespace courtqg {

struct IntentConfig {
  size_t d_intent = 16;     // intent-vector size
  size_t d_roletrans = 16;  // role-transfer vector size

  void validate() const {
    if (d_intent < 1 || d_roletrans < 1)
      throw ConfigError("intent dimensions must be >= 1");
  }
};

// The transfer matrices are stored as unconstrained raw parameters and pushed
// through the logistic at use time, which pins every materialized entry to
// (0,1) ⊂ [0,1] by construction.
struct IntentParams {
  NodePtr intent_transfer_raw;  // d_intent x d_h
  NodePtr role_transfer_raw;    // d_roletrans x d_role
  NodePtr summary_proj;         // 2*d_h x (d_intent + d_roletrans)

  static IntentParams create(ParamSet& params, const IntentConfig& cfg, size_t d_h,
                             size_t d_role, Rng& rng);
};

struct IntentContext {
  std::vector<Tensor> intents;         // per utterance, size d_intent, entries in (0,1)
  std::vector<Tensor> role_transfers;  // n+1 entries; the extra slot is the questioner
  std::vector<Tensor> paired;          // [intent_i ; role_transfer_{i+1}]
  Tensor attended;                     // intent-weighted sum of the paired sequence
  Tensor attention_weights;            // the weights over utterances (diagnostic)
  std::vector<Tensor> fused;           // per utterance, size 4*(2*d_h)
};

// Materialized transfer matrix with entries in (0,1).
Tensor materialize_transfer(Tape& tape, const NodePtr& raw);

// intent_i = logistic(K_intent · knowledge_state_i)
Tensor intent_transform(const Tensor& transfer, const Tensor& knowledge_state);

// role_transfer = logistic(K_role · role_embedding)
Tensor role_transform(const Tensor& transfer, const Tensor& role_embedding);

// paired_i = [intent_i ; role_transfer_{i+1}]; needs exactly n+1 transfers.
std::vector<Tensor> pair_sequence(const std::vector<Tensor>& intents,
                                  const std::vector<Tensor>& role_transfers);

// Softmax attention over utterances. Each utterance's score is the mean of
// its intent vector's coordinates; the result is the weighted sum of paired
// vectors. Returns {attended, weights}.
std::pair<Tensor, Tensor> intent_attention(const std::vector<Tensor>& intents,
                                           const std::vector<Tensor>& paired);

// fused_i = [x_i ; y ; x_i*y ; x_i-y] with y already projected to 2*d_h.
std::vector<Tensor> fuse(const std::vector<Tensor>& dialogue_states,
                         const Tensor& projected_summary);

// Full pipeline over encoder outputs. questioner_role_embedding fills the
// final role-transfer slot (the asker of the question being generated, i.e.
// the judge).
IntentContext intent_navigation(Tape& tape, const IntentParams& params,
                                const EncodedDialogue& encoded,
                                const Tensor& questioner_role_embedding);

// Ablation stand-in: fused_i = [x_i ; 0 ; 0 ; x_i], the attended summary
// forced to zero. Reduces the model to attentional seq2seq (plus copy).
std::vector<Tensor> fuse_without_intent(Tape& tape,
                                        const std::vector<Tensor>& dialogue_states);

}  // namespace courtqg

#endif  // COURTQG_INTENT_HPP
