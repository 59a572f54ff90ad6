#include "courtqg/encoder.hpp"

namespace courtqg {

EncoderParams EncoderParams::create(ParamSet& params, const EncoderConfig& cfg,
                                    size_t vocab_size, size_t elem_vocab_size, Rng& rng) {
  cfg.validate();
  EncoderParams p;
  p.word_embedding = params.add("embed.word", {vocab_size, cfg.d_word}, rng);
  p.role_embedding = params.add("embed.role", {static_cast<size_t>(kNumRoles), cfg.d_role}, rng);
  p.elem_embedding = params.add("embed.elem", {elem_vocab_size, cfg.d_elem}, rng);

  const size_t h4 = 4 * cfg.d_h;
  p.utt_fwd_w = params.add("enc.utt.fwd.w", {h4, cfg.d_word + cfg.d_h}, rng);
  p.utt_fwd_b = params.add("enc.utt.fwd.b", {h4}, rng);
  p.utt_bwd_w = params.add("enc.utt.bwd.w", {h4, cfg.d_word + cfg.d_h}, rng);
  p.utt_bwd_b = params.add("enc.utt.bwd.b", {h4}, rng);

  const size_t dlg_in = 2 * cfg.d_h + cfg.d_role;
  p.dlg_fwd_w = params.add("enc.dlg.fwd.w", {h4, dlg_in + cfg.d_h}, rng);
  p.dlg_fwd_b = params.add("enc.dlg.fwd.b", {h4}, rng);
  p.dlg_bwd_w = params.add("enc.dlg.bwd.w", {h4, dlg_in + cfg.d_h}, rng);
  p.dlg_bwd_b = params.add("enc.dlg.bwd.b", {h4}, rng);

  p.know_w = params.add("enc.know.w", {h4, cfg.d_elem + cfg.d_h}, rng);
  p.know_b = params.add("enc.know.b", {h4}, rng);
  return p;
}

Tensor embed_role(Tape& tape, const EncoderParams& params, Role role) {
  return gather_row(tape.use(params.role_embedding), static_cast<size_t>(role));
}

namespace {

// Runs an LSTM over the inputs; returns the hidden state at every step.
std::vector<Tensor> run_lstm(Tape& tape, const LstmWeights& w, size_t d_h,
                             const std::vector<Tensor>& inputs) {
  Tensor h = tape.zeros({d_h});
  Tensor c = tape.zeros({d_h});
  std::vector<Tensor> states;
  states.reserve(inputs.size());
  for (const Tensor& x : inputs) {
    auto [h2, c2] = lstm_cell(x, h, c, w);
    h = h2;
    c = c2;
    states.push_back(h);
  }
  return states;
}

}  // namespace

UtteranceEncoding encode_utterance(Tape& tape, const EncoderParams& params,
                                   const EncoderConfig& cfg, const std::vector<int>& token_ids) {
  if (token_ids.empty()) throw DomainError("encode_utterance: utterance has no tokens");
  Tensor table = tape.use(params.word_embedding);
  std::vector<Tensor> embedded;
  embedded.reserve(token_ids.size());
  for (int id : token_ids) embedded.push_back(gather_row(table, static_cast<size_t>(id)));

  LstmWeights fwd{tape.use(params.utt_fwd_w), tape.use(params.utt_fwd_b)};
  LstmWeights bwd{tape.use(params.utt_bwd_w), tape.use(params.utt_bwd_b)};

  std::vector<Tensor> fwd_states = run_lstm(tape, fwd, cfg.d_h, embedded);
  std::vector<Tensor> reversed(embedded.rbegin(), embedded.rend());
  std::vector<Tensor> bwd_rev = run_lstm(tape, bwd, cfg.d_h, reversed);

  UtteranceEncoding enc;
  const size_t n = token_ids.size();
  enc.word_states.reserve(n);
  for (size_t t = 0; t < n; ++t)
    enc.word_states.push_back(concat({fwd_states[t], bwd_rev[n - 1 - t]}));
  enc.summary = concat({fwd_states[n - 1], bwd_rev[n - 1]});  // [fwd_last ; bwd_first]
  return enc;
}

std::vector<Tensor> encode_dialogue(Tape& tape, const EncoderParams& params,
                                    const EncoderConfig& cfg,
                                    const std::vector<Tensor>& utterance_summaries,
                                    const std::vector<Tensor>& role_embeddings) {
  if (utterance_summaries.size() != role_embeddings.size())
    throw DimensionError("encode_dialogue: " + std::to_string(utterance_summaries.size()) +
                         " summaries vs " + std::to_string(role_embeddings.size()) + " roles");
  const size_t n = utterance_summaries.size();
  std::vector<Tensor> inputs;
  inputs.reserve(n);
  for (size_t i = 0; i < n; ++i)
    inputs.push_back(concat({utterance_summaries[i], role_embeddings[i]}));

  LstmWeights fwd{tape.use(params.dlg_fwd_w), tape.use(params.dlg_fwd_b)};
  LstmWeights bwd{tape.use(params.dlg_bwd_w), tape.use(params.dlg_bwd_b)};

  std::vector<Tensor> fwd_states = run_lstm(tape, fwd, cfg.d_h, inputs);
  std::vector<Tensor> reversed(inputs.rbegin(), inputs.rend());
  std::vector<Tensor> bwd_rev = run_lstm(tape, bwd, cfg.d_h, reversed);

  std::vector<Tensor> dialogue_states;
  dialogue_states.reserve(n);
  for (size_t i = 0; i < n; ++i)
    dialogue_states.push_back(concat({fwd_states[i], bwd_rev[n - 1 - i]}));
  return dialogue_states;
}

std::vector<Tensor> encode_knowledge(Tape& tape, const EncoderParams& params,
                                     const EncoderConfig& cfg,
                                     const std::vector<std::vector<int>>& element_ids) {
  Tensor table = tape.use(params.elem_embedding);
  LstmWeights w{tape.use(params.know_w), tape.use(params.know_b)};

  std::vector<Tensor> states;
  states.reserve(element_ids.size());
  for (const auto& ids : element_ids) {
    std::vector<Tensor> embedded;
    if (ids.empty()) {
      embedded.push_back(gather_row(table, KnowledgeVocab::kNone));
    } else {
      for (int id : ids) embedded.push_back(gather_row(table, static_cast<size_t>(id)));
    }
    states.push_back(run_lstm(tape, w, cfg.d_h, embedded).back());
  }
  return states;
}

EncodedDialogue encode_fragment_context(Tape& tape, const EncoderParams& params,
                                        const EncoderConfig& cfg,
                                        const std::vector<std::vector<int>>& token_ids,
                                        const std::vector<Role>& speaker_roles,
                                        const std::vector<std::vector<int>>& element_ids,
                                        bool disable_role, bool disable_knowledge) {
  const size_t n = token_ids.size();
  if (speaker_roles.size() != n || element_ids.size() != n)
    throw DimensionError("encode_fragment_context: sequence lengths disagree");

  EncodedDialogue enc;
  std::vector<Tensor> summaries;
  summaries.reserve(n);
  for (const auto& ids : token_ids) {
    UtteranceEncoding ue = encode_utterance(tape, params, cfg, ids);
    enc.word_states.push_back(std::move(ue.word_states));
    summaries.push_back(ue.summary);
  }

  enc.roles.reserve(n);
  for (Role r : speaker_roles) {
    if (disable_role)
      enc.roles.push_back(tape.zeros({cfg.d_role}));
    else
      enc.roles.push_back(embed_role(tape, params, r));
  }

  enc.dialogue_states = encode_dialogue(tape, params, cfg, summaries, enc.roles);

  if (disable_knowledge) {
    enc.knowledge_states.reserve(n);
    for (size_t i = 0; i < n; ++i) enc.knowledge_states.push_back(tape.zeros({cfg.d_h}));
  } else {
    enc.knowledge_states = encode_knowledge(tape, params, cfg, element_ids);
  }
  return enc;
}

}  // namespace courtqg
