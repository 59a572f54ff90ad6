#ifndef COURTQG_ENCODER_HPP
#define COURTQG_ENCODER_HPP

#include <vector>

#include "courtqg/data.hpp"
#include "courtqg/tensor.hpp"

namespace courtqg {

struct EncoderConfig {
  size_t d_word = 32;  // word-embedding size
  size_t d_role = 8;   // role-embedding size
  size_t d_elem = 16;  // knowledge-element embedding size
  size_t d_h = 32;     // hidden size shared by all three LSTMs

  void validate() const {
    if (d_word < 1 || d_role < 1 || d_elem < 1 || d_h < 1)
      throw ConfigError("encoder dimensions must all be >= 1");
  }
};

// Learnable pieces of the dialogue encoder. Registered against a ParamSet so
// the optimizer and checkpointing see them by name.
struct EncoderParams {
  NodePtr word_embedding;  // |V| x d_word
  NodePtr role_embedding;  // 4 x d_role
  NodePtr elem_embedding;  // |E| x d_elem
  NodePtr utt_fwd_w, utt_fwd_b;  // utterance-level Bi-LSTM
  NodePtr utt_bwd_w, utt_bwd_b;
  NodePtr dlg_fwd_w, dlg_fwd_b;  // dialogue-level Bi-LSTM
  NodePtr dlg_bwd_w, dlg_bwd_b;
  NodePtr know_w, know_b;        // unidirectional knowledge LSTM

  static EncoderParams create(ParamSet& params, const EncoderConfig& cfg, size_t vocab_size,
                              size_t elem_vocab_size, Rng& rng);
};

// Per-fragment encoder outputs, all living on the tape that produced them.
struct EncodedDialogue {
  // word_states[i][t]: size 2*d_h, utterance Bi-LSTM output for token t of
  // utterance i.
  std::vector<std::vector<Tensor>> word_states;
  // dialogue_states[i]: size 2*d_h, the dialogue-layer representation.
  std::vector<Tensor> dialogue_states;
  // knowledge_states[i]: size d_h, final hidden state of the knowledge LSTM.
  std::vector<Tensor> knowledge_states;
  // role_vectors[i]: size d_role, the speaker's role embedding.
  std::vector<Tensor> roles;

  size_t num_utterances() const { return dialogue_states.size(); }
};

// Row lookup into the 4 x d_role table.
Tensor embed_role(Tape& tape, const EncoderParams& params, Role role);

// Bi-LSTM over the utterance tokens. Returns per-token states
// [fwd_t ; bwd_t] and the summary [fwd_last ; bwd_first].
struct UtteranceEncoding {
  std::vector<Tensor> word_states;
  Tensor summary;
};
UtteranceEncoding encode_utterance(Tape& tape, const EncoderParams& params,
                                   const EncoderConfig& cfg, const std::vector<int>& token_ids);

// Dialogue-level Bi-LSTM. Step input i is [summary_i ; role_i].
std::vector<Tensor> encode_dialogue(Tape& tape, const EncoderParams& params,
                                    const EncoderConfig& cfg,
                                    const std::vector<Tensor>& utterance_summaries,
                                    const std::vector<Tensor>& role_embeddings);

// Knowledge LSTM over each utterance's element ids; empty lists are encoded
// as the reserved NONE element so h is always defined.
std::vector<Tensor> encode_knowledge(Tape& tape, const EncoderParams& params,
                                     const EncoderConfig& cfg,
                                     const std::vector<std::vector<int>>& element_ids);

// Full pass over a tokenized fragment context.
EncodedDialogue encode_fragment_context(Tape& tape, const EncoderParams& params,
                                        const EncoderConfig& cfg,
                                        const std::vector<std::vector<int>>& token_ids,
                                        const std::vector<Role>& speaker_roles,
                                        const std::vector<std::vector<int>>& element_ids,
                                        bool disable_role, bool disable_knowledge);

}  // namespace courtqg

#endif  // COURTQG_ENCODER_HPP
