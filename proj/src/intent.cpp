#include "courtqg/intent.hpp"

namespace courtqg {

IntentParams IntentParams::create(ParamSet& params, const IntentConfig& cfg, size_t d_h,
                                  size_t d_role, Rng& rng) {
  cfg.validate();
  IntentParams p;
  p.intent_transfer_raw = params.add("intent.transfer_raw", {cfg.d_intent, d_h}, rng);
  p.role_transfer_raw = params.add("intent.role_raw", {cfg.d_roletrans, d_role}, rng);
  p.summary_proj = params.add("intent.proj", {2 * d_h, cfg.d_intent + cfg.d_roletrans}, rng);
  return p;
}

Tensor materialize_transfer(Tape& tape, const NodePtr& raw) {
  return sigmoid(tape.use(raw));
}

Tensor intent_transform(const Tensor& transfer, const Tensor& knowledge_state) {
  return sigmoid(matmul(transfer, knowledge_state));
}

Tensor role_transform(const Tensor& transfer, const Tensor& role_embedding) {
  return sigmoid(matmul(transfer, role_embedding));
}

std::vector<Tensor> pair_sequence(const std::vector<Tensor>& intents,
                                  const std::vector<Tensor>& role_transfers) {
  if (role_transfers.size() != intents.size() + 1)
    throw DimensionError("pair_sequence: need " + std::to_string(intents.size() + 1) +
                         " role transfers, got " + std::to_string(role_transfers.size()));
  std::vector<Tensor> paired;
  paired.reserve(intents.size());
  for (size_t i = 0; i < intents.size(); ++i)
    paired.push_back(concat({intents[i], role_transfers[i + 1]}));
  return paired;
}

std::pair<Tensor, Tensor> intent_attention(const std::vector<Tensor>& intents,
                                           const std::vector<Tensor>& paired) {
  if (intents.empty()) throw DomainError("intent_attention: empty sequence");
  if (intents.size() != paired.size())
    throw DimensionError("intent_attention: " + std::to_string(intents.size()) +
                         " intents vs " + std::to_string(paired.size()) + " paired vectors");
  std::vector<Tensor> scores;
  scores.reserve(intents.size());
  for (const Tensor& intent : intents)
    scores.push_back(scale(sum(intent), 1.0 / static_cast<double>(intent.size())));
  Tensor weights = softmax(concat(scores));

  Tensor attended = scale_by(paired[0], gather(weights, 0));
  for (size_t i = 1; i < paired.size(); ++i)
    attended = add(attended, scale_by(paired[i], gather(weights, i)));
  return {attended, weights};
}

std::vector<Tensor> fuse(const std::vector<Tensor>& dialogue_states,
                         const Tensor& projected_summary) {
  std::vector<Tensor> fused;
  fused.reserve(dialogue_states.size());
  for (const Tensor& x : dialogue_states) {
    if (x.size() != projected_summary.size())
      throw DimensionError("fuse: dialogue state size " + std::to_string(x.size()) +
                           " vs projected summary size " +
                           std::to_string(projected_summary.size()));
    fused.push_back(concat(
        {x, projected_summary, mul(x, projected_summary), sub(x, projected_summary)}));
  }
  return fused;
}

IntentContext intent_navigation(Tape& tape, const IntentParams& params,
                                const EncodedDialogue& encoded,
                                const Tensor& questioner_role_embedding) {
  IntentContext ctx;
  Tensor k_intent = materialize_transfer(tape, params.intent_transfer_raw);
  Tensor k_role = materialize_transfer(tape, params.role_transfer_raw);

  const size_t n = encoded.num_utterances();
  ctx.intents.reserve(n);
  for (const Tensor& ks : encoded.knowledge_states)
    ctx.intents.push_back(intent_transform(k_intent, ks));

  // role_transfers[j] for j < n comes from the actual speaker of utterance j;
  // the final slot is the questioner of the target turn.
  ctx.role_transfers.reserve(n + 1);
  for (const Tensor& r : encoded.roles) ctx.role_transfers.push_back(role_transform(k_role, r));
  ctx.role_transfers.push_back(role_transform(k_role, questioner_role_embedding));

  ctx.paired = pair_sequence(ctx.intents, ctx.role_transfers);
  auto [attended, weights] = intent_attention(ctx.intents, ctx.paired);
  ctx.attended = attended;
  ctx.attention_weights = weights;

  Tensor projected = matmul(tape.use(params.summary_proj), ctx.attended);
  ctx.fused = fuse(encoded.dialogue_states, projected);
  return ctx;
}

std::vector<Tensor> fuse_without_intent(Tape& tape,
                                        const std::vector<Tensor>& dialogue_states) {
  std::vector<Tensor> fused;
  fused.reserve(dialogue_states.size());
  for (const Tensor& x : dialogue_states) {
    Tensor zero = tape.zeros({x.size()});
    fused.push_back(concat({x, zero, zero, x}));
  }
  return fused;
}

}  // namespace courtqg
