#include "courtqg/decoder.hpp"

namespace courtqg {

ExtendedVocabMap ExtendedVocabMap::build(const Vocab& vocab,
                                         const std::vector<std::string>& context_tokens) {
  ExtendedVocabMap map;
  map.base = vocab.size();
  for (const std::string& tok : context_tokens) {
    if (vocab.contains(tok) || map.oov_ids.count(tok)) continue;
    map.oov_ids[tok] = static_cast<int>(map.base + map.oov_tokens.size());
    map.oov_tokens.push_back(tok);
  }
  return map;
}

int ExtendedVocabMap::id_of(const std::string& token, const Vocab& vocab) const {
  if (vocab.contains(token)) return vocab.id(token);
  auto it = oov_ids.find(token);
  return it == oov_ids.end() ? Vocab::kUnk : it->second;
}

const std::string& ExtendedVocabMap::token_for(int ext_id, const Vocab& vocab) const {
  if (ext_id >= 0 && static_cast<size_t>(ext_id) < base) return vocab.token(ext_id);
  const size_t off = static_cast<size_t>(ext_id) - base;
  if (off >= oov_tokens.size())
    throw DomainError("extended id " + std::to_string(ext_id) + " out of range");
  return oov_tokens[off];
}

DecoderParams DecoderParams::create(ParamSet& params, size_t vocab_size, size_t d_word,
                                    size_t d_h, size_t d_att, Rng& rng) {
  const size_t d_mem = 10 * d_h;  // word state (2*d_h) + fused state (8*d_h)
  DecoderParams p;
  p.init_proj = params.add("dec.init", {d_h, 8 * d_h}, rng);
  p.lstm_w = params.add("dec.lstm.w", {4 * d_h, d_word + d_h}, rng);
  p.lstm_b = params.add("dec.lstm.b", {4 * d_h}, rng);
  p.att_memory = params.add("dec.att.memory", {d_att, d_mem}, rng);
  p.att_state = params.add("dec.att.state", {d_att, d_h}, rng);
  p.att_bias = params.add("dec.att.bias", {d_att}, rng);
  p.att_score = params.add("dec.att.score", {d_att}, rng);
  p.out_w = params.add("dec.out.w", {vocab_size, d_h + d_mem}, rng);
  p.out_b = params.add("dec.out.b", {vocab_size}, rng);
  p.gate_w = params.add("dec.gate.w", {1, d_mem + d_h + d_word}, rng);
  p.gate_b = params.add("dec.gate.b", {1}, rng);
  return p;
}

DecoderMemory build_memory(Tape& tape, const DecoderParams& params,
                           const std::vector<std::vector<Tensor>>& word_states,
                           const std::vector<Tensor>& fused_states,
                           const std::vector<int>& position_ext_ids) {
  if (word_states.size() != fused_states.size())
    throw DimensionError("build_memory: " + std::to_string(word_states.size()) +
                         " utterances vs " + std::to_string(fused_states.size()) +
                         " fused states");
  std::vector<Tensor> rows;
  for (size_t i = 0; i < word_states.size(); ++i)
    for (const Tensor& ws : word_states[i]) rows.push_back(concat({ws, fused_states[i]}));
  if (rows.size() != position_ext_ids.size())
    throw DimensionError("build_memory: " + std::to_string(rows.size()) + " positions vs " +
                         std::to_string(position_ext_ids.size()) + " token ids");

  DecoderMemory mem;
  mem.entries = stack_rows(rows);
  mem.entries_t = transpose(mem.entries);
  mem.att_premul = matmul(mem.entries, transpose(tape.use(params.att_memory)));
  mem.ext_ids = position_ext_ids;
  return mem;
}

DecoderState init_decoder(Tape& tape, const DecoderParams& params,
                          const std::vector<Tensor>& fused_states) {
  if (fused_states.empty()) throw DomainError("init_decoder: empty context");
  Tensor mean = fused_states[0];
  for (size_t i = 1; i < fused_states.size(); ++i) mean = add(mean, fused_states[i]);
  mean = scale(mean, 1.0 / static_cast<double>(fused_states.size()));

  DecoderState state;
  state.hidden = tanh(matmul(tape.use(params.init_proj), mean));
  state.cell = tape.zeros({state.hidden.size()});
  state.prev_token = Vocab::kBos;
  state.step = 0;
  return state;
}

std::pair<StepDistribution, DecoderState> decode_step(
    Tape& tape, const DecoderParams& params, const NodePtr& word_embedding,
    const DecoderMemory& memory, const DecoderState& state, size_t n_oov, bool disable_copy) {
  if (memory.length() == 0) throw DomainError("decode_step: empty memory");
  const size_t vocab_size = params.out_b->size();

  // Temporary ids are fed back through the UNK embedding.
  const size_t embed_id =
      static_cast<size_t>(state.prev_token) < vocab_size ? state.prev_token : Vocab::kUnk;
  Tensor x = gather_row(tape.use(word_embedding), embed_id);

  LstmWeights lw{tape.use(params.lstm_w), tape.use(params.lstm_b)};
  auto [hidden, cell] = lstm_cell(x, state.hidden, state.cell, lw);

  // Additive attention against the precomputed memory projection.
  Tensor query = add(matmul(tape.use(params.att_state), hidden), tape.use(params.att_bias));
  Tensor scores = matmul(tanh(add_row(memory.att_premul, query)), tape.use(params.att_score));
  Tensor attention = softmax(scores);
  Tensor context = matmul(memory.entries_t, attention);

  Tensor vocab_logits =
      add(matmul(tape.use(params.out_w), concat({hidden, context})), tape.use(params.out_b));
  Tensor vocab_probs = softmax(vocab_logits);

  Tensor extended = n_oov == 0
                        ? vocab_probs
                        : concat({vocab_probs, tape.zeros({n_oov})});

  StepDistribution dist;
  dist.attention = attention;
  if (disable_copy) {
    dist.final = extended;
    dist.p_gen = 1.0;
  } else {
    Tensor gate_in = concat({context, hidden, x});
    Tensor p_gen = sigmoid(add(matmul(tape.use(params.gate_w), gate_in), tape.use(params.gate_b)));
    Tensor copy = scatter_sum(attention, memory.ext_ids, vocab_size + n_oov);
    Tensor one = tape.constant({1}, {1.0});
    dist.final = add(scale_by(extended, p_gen), scale_by(copy, sub(one, p_gen)));
    dist.p_gen = p_gen.value()[0];
  }

  DecoderState next;
  next.hidden = hidden;
  next.cell = cell;
  next.prev_token = state.prev_token;  // caller overwrites after choosing a token
  next.step = state.step + 1;
  return {dist, next};
}

}  // namespace courtqg
