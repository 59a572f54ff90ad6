#include "courtqg/model.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace courtqg {

using ordered_json = nlohmann::ordered_json;

std::string AblationFlags::to_string() const {
  std::vector<const char*> names;
  if (disable_intent_nav) names.push_back("disable_intent_nav");
  if (disable_role) names.push_back("disable_role");
  if (disable_knowledge) names.push_back("disable_knowledge");
  if (disable_copy) names.push_back("disable_copy");
  std::string out;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) out += ",";
    out += names[i];
  }
  return out;
}

AblationFlags AblationFlags::parse(const std::string& s) {
  AblationFlags flags;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "disable_intent_nav")
      flags.disable_intent_nav = true;
    else if (item == "disable_role")
      flags.disable_role = true;
    else if (item == "disable_knowledge")
      flags.disable_knowledge = true;
    else if (item == "disable_copy")
      flags.disable_copy = true;
    else
      throw ConfigError("unknown ablation flag \"" + item + "\"");
  }
  return flags;
}

std::string ModelConfig::to_json() const {
  ordered_json j;
  j["d_word"] = encoder.d_word;
  j["d_role"] = encoder.d_role;
  j["d_elem"] = encoder.d_elem;
  j["d_h"] = encoder.d_h;
  j["d_intent"] = intent.d_intent;
  j["d_roletrans"] = intent.d_roletrans;
  j["d_att"] = d_att;
  j["ablation"] = ablation.to_string();
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& json_text) {
  ordered_json j = ordered_json::parse(json_text);
  ModelConfig cfg;
  cfg.encoder.d_word = j.at("d_word").get<size_t>();
  cfg.encoder.d_role = j.at("d_role").get<size_t>();
  cfg.encoder.d_elem = j.at("d_elem").get<size_t>();
  cfg.encoder.d_h = j.at("d_h").get<size_t>();
  cfg.intent.d_intent = j.at("d_intent").get<size_t>();
  cfg.intent.d_roletrans = j.at("d_roletrans").get<size_t>();
  cfg.d_att = j.at("d_att").get<size_t>();
  cfg.ablation = AblationFlags::parse(j.value("ablation", ""));
  return cfg;
}

Model::Model(ModelConfig cfg, Vocab vocab, KnowledgeVocab kvocab, uint64_t seed)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), kvocab_(std::move(kvocab)) {
  cfg_.encoder.validate();
  cfg_.intent.validate();
  if (cfg_.d_att < 1) throw ConfigError("d_att must be >= 1");
  Rng rng(seed);
  enc_ = EncoderParams::create(params_, cfg_.encoder, vocab_.size(), kvocab_.size(), rng);
  intent_ = IntentParams::create(params_, cfg_.intent, cfg_.encoder.d_h, cfg_.encoder.d_role, rng);
  dec_ = DecoderParams::create(params_, vocab_.size(), cfg_.encoder.d_word, cfg_.encoder.d_h,
                               cfg_.d_att, rng);
}

NodePtr Model::param(const std::string& name) const {
  NodePtr node = params_.find(name);
  if (!node) throw ConfigError("no parameter named \"" + name + "\"");
  return node;
}

PreparedFragment Model::prepare(const DialogueFragment& fragment) const {
  if (fragment.context.empty()) throw DomainError("prepare: fragment has no context");
  PreparedFragment prep;
  prep.id = fragment.id;

  std::vector<std::string> flat;
  for (const Utterance& u : fragment.context) {
    std::vector<std::string> toks = tokenize(u.text);
    std::vector<int> ids;
    ids.reserve(toks.size());
    for (const std::string& t : toks) ids.push_back(vocab_.id(t));
    prep.context_token_ids.push_back(std::move(ids));
    prep.roles.push_back(u.role);

    std::vector<int> elems;
    elems.reserve(u.elements.size());
    for (const std::string& e : u.elements) elems.push_back(kvocab_.id(e));
    prep.element_ids.push_back(std::move(elems));

    for (std::string& t : toks) flat.push_back(std::move(t));
  }

  prep.ext = ExtendedVocabMap::build(vocab_, flat);
  prep.memory_tokens = flat;
  prep.memory_ext_ids.reserve(flat.size());
  for (const std::string& t : flat) prep.memory_ext_ids.push_back(prep.ext.id_of(t, vocab_));

  prep.target_tokens = tokenize(fragment.target.text);
  prep.target_ext_ids.reserve(prep.target_tokens.size());
  for (const std::string& t : prep.target_tokens)
    prep.target_ext_ids.push_back(prep.ext.id_of(t, vocab_));
  return prep;
}

Model::ContextGraph Model::build_context(Tape& tape, const PreparedFragment& prep) const {
  ContextGraph g;
  g.encoded = encode_fragment_context(tape, enc_, cfg_.encoder, prep.context_token_ids,
                                      prep.roles, prep.element_ids, cfg_.ablation.disable_role,
                                      cfg_.ablation.disable_knowledge);
  if (cfg_.ablation.disable_intent_nav) {
    g.fused = fuse_without_intent(tape, g.encoded.dialogue_states);
  } else {
    Tensor judge = cfg_.ablation.disable_role ? tape.zeros({cfg_.encoder.d_role})
                                              : embed_role(tape, enc_, Role::Judge);
    g.fused = intent_navigation(tape, intent_, g.encoded, judge).fused;
  }
  g.memory = build_memory(tape, dec_, g.encoded.word_states, g.fused, prep.memory_ext_ids);
  g.init = init_decoder(tape, dec_, g.fused);
  return g;
}

std::vector<int> Model::gold_sequence(const PreparedFragment& prep) const {
  std::vector<int> gold = prep.target_ext_ids;
  gold.push_back(Vocab::kEos);
  // Without the copy path temporary ids are unreachable (probability exactly
  // zero), so out-of-vocabulary targets fall back to UNK.
  if (cfg_.ablation.disable_copy)
    for (int& id : gold)
      if (id >= static_cast<int>(vocab_.size())) id = Vocab::kUnk;
  return gold;
}

Tensor Model::sequence_nll(Tape& tape, const PreparedFragment& prep) const {
  if (prep.target_ext_ids.empty()) throw DomainError("sequence_nll: empty target");
  ContextGraph g = build_context(tape, prep);

  const std::vector<int> gold = gold_sequence(prep);

  Tensor total;
  DecoderState state = g.init;
  for (int gold_id : gold) {
    auto [dist, next] = decode_step(tape, dec_, enc_.word_embedding, g.memory, state,
                                    prep.n_oov(), cfg_.ablation.disable_copy);
    Tensor picked = gather(dist.final, static_cast<size_t>(gold_id));
    Tensor step_nll = scale(log(picked), -1.0);
    total = total.defined() ? add(total, step_nll) : step_nll;
    state = next;
    state.prev_token = gold_id;
  }
  return total;
}

double Model::teacher_forced_log_likelihood(const PreparedFragment& prep) const {
  if (prep.target_ext_ids.empty()) throw DomainError("empty target");
  Tape tape;
  ContextGraph g = build_context(tape, prep);

  const std::vector<int> gold = gold_sequence(prep);

  double total = 0.0;
  DecoderState state = g.init;
  for (int gold_id : gold) {
    auto [dist, next] = decode_step(tape, dec_, enc_.word_embedding, g.memory, state,
                                    prep.n_oov(), cfg_.ablation.disable_copy);
    total += std::log(dist.final.value()[gold_id]);
    state = next;
    state.prev_token = gold_id;
  }
  return total;
}

namespace {

size_t argmax_index(const std::vector<double>& v) {
  size_t best = 0;
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

SearchResult Model::greedy_search(const PreparedFragment& prep, size_t max_len) const {
  return beam_search_decode(prep, 1, max_len);
}

SearchResult Model::beam_search_decode(const PreparedFragment& prep, size_t beam_size,
                                       size_t max_len) const {
  Tape tape;
  ContextGraph g = build_context(tape, prep);

  auto step_fn = [&](const DecoderState& state, int prev) -> SearchStep<DecoderState> {
    DecoderState s = state;
    s.prev_token = prev;
    auto [dist, next] = decode_step(tape, dec_, enc_.word_embedding, g.memory, s, prep.n_oov(),
                                    cfg_.ablation.disable_copy);
    SearchStep<DecoderState> out;
    out.probs = dist.final.value();
    out.state = next;
    out.best_copy_pos = argmax_index(dist.attention.value());
    return out;
  };
  return beam_search(g.init, step_fn, beam_size, max_len);
}

std::vector<std::string> Model::realize(const PreparedFragment& prep,
                                        const SearchResult& result) const {
  std::vector<std::string> words;
  words.reserve(result.tokens.size());
  for (size_t i = 0; i < result.tokens.size(); ++i) {
    const int id = result.tokens[i];
    if (id == Vocab::kUnk && !prep.memory_tokens.empty()) {
      words.push_back(prep.memory_tokens[result.copy_positions[i]]);
    } else {
      words.push_back(prep.ext.token_for(id, vocab_));
    }
  }
  return words;
}

std::vector<std::string> Model::greedy_decode(const DialogueFragment& fragment,
                                              size_t max_len) const {
  PreparedFragment prep = prepare(fragment);
  return realize(prep, greedy_search(prep, max_len));
}

std::vector<std::string> Model::beam_decode(const DialogueFragment& fragment, size_t beam_size,
                                            size_t max_len) const {
  PreparedFragment prep = prepare(fragment);
  return realize(prep, beam_search_decode(prep, beam_size, max_len));
}

}  // namespace courtqg
