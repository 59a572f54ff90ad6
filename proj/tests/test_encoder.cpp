#include "doctest.h"

#include <cmath>

#include "courtqg/encoder.hpp"
#include "courtqg/grad_check.hpp"

using namespace courtqg;

namespace {

struct Fixture {
  EncoderConfig cfg;
  ParamSet params;
  EncoderParams enc;

  explicit Fixture(uint64_t seed = 1, size_t vocab = 12, size_t elems = 5) {
    cfg.d_word = 5;
    cfg.d_role = 3;
    cfg.d_elem = 4;
    cfg.d_h = 6;
    Rng rng(seed);
    enc = EncoderParams::create(params, cfg, vocab, elems, rng);
  }

  void zero_all() {
    for (const Parameter& p : params.all()) std::fill(p.node->value.begin(), p.node->value.end(), 0.0);
  }

  // Copy forward LSTM weights over the backward ones (both directions tied).
  void tie_utterance_lstm() {
    enc.utt_bwd_w->value = enc.utt_fwd_w->value;
    enc.utt_bwd_b->value = enc.utt_fwd_b->value;
  }
};

}  // namespace

TEST_SUITE_BEGIN("encoder");

TEST_CASE("embed_role is a deterministic lookup with distinct rows") {
  Fixture fx;
  Tape tape;
  Tensor judge1 = embed_role(tape, fx.enc, Role::Judge);
  Tensor judge2 = embed_role(tape, fx.enc, Role::Judge);
  CHECK(judge1.value() == judge2.value());
  Tensor plaintiff = embed_role(tape, fx.enc, Role::Plaintiff);
  CHECK(judge1.value() != plaintiff.value());
  CHECK(judge1.size() == fx.cfg.d_role);
}

TEST_CASE("a loss through one role row leaves the other rows without gradient") {
  Fixture fx;
  Tape tape;
  Tensor judge = embed_role(tape, fx.enc, Role::Judge);
  Tensor loss = sum(mul(judge, judge));
  fx.params.zero_grads();
  tape.backward(loss);
  const auto& grad = fx.enc.role_embedding->grad;
  const size_t d = fx.cfg.d_role;
  for (size_t r = 0; r < static_cast<size_t>(kNumRoles); ++r)
    for (size_t c = 0; c < d; ++c) {
      if (r == static_cast<size_t>(Role::Judge))
        CHECK(grad[r * d + c] != 0.0);
      else
        CHECK(grad[r * d + c] == 0.0);
    }
}

TEST_CASE("encode_utterance: single token summary equals its only word state") {
  Fixture fx;
  Tape tape;
  auto enc = encode_utterance(tape, fx.enc, fx.cfg, {7});
  REQUIRE(enc.word_states.size() == 1);
  CHECK(enc.summary.value() == enc.word_states[0].value());
  CHECK(enc.summary.size() == 2 * fx.cfg.d_h);
}

TEST_CASE("encode_utterance rejects empty token lists") {
  Fixture fx;
  Tape tape;
  CHECK_THROWS_AS(encode_utterance(tape, fx.enc, fx.cfg, {}), DomainError);
}

TEST_CASE("reversing the tokens swaps the summary halves when directions are tied") {
  Fixture fx;
  fx.tie_utterance_lstm();
  std::vector<int> tokens = {4, 9, 2, 11};
  std::vector<int> reversed(tokens.rbegin(), tokens.rend());

  Tape tape;
  auto fwd = encode_utterance(tape, fx.enc, fx.cfg, tokens);
  auto rev = encode_utterance(tape, fx.enc, fx.cfg, reversed);

  const size_t d = fx.cfg.d_h;
  for (size_t i = 0; i < d; ++i) {
    CHECK(fwd.summary.value()[i] == rev.summary.value()[d + i]);
    CHECK(fwd.summary.value()[d + i] == rev.summary.value()[i]);
  }
}

TEST_CASE("all-zero LSTM weights give all-zero states") {
  Fixture fx;
  fx.zero_all();
  Tape tape;
  auto enc = encode_utterance(tape, fx.enc, fx.cfg, {1, 2, 3});
  for (const Tensor& ws : enc.word_states)
    for (double v : ws.value()) CHECK(v == 0.0);
  for (double v : enc.summary.value()) CHECK(v == 0.0);

  std::vector<Tensor> summaries = {enc.summary, enc.summary};
  std::vector<Tensor> roles = {embed_role(tape, fx.enc, Role::Judge),
                               embed_role(tape, fx.enc, Role::Plaintiff)};
  for (const Tensor& x : encode_dialogue(tape, fx.enc, fx.cfg, summaries, roles))
    for (double v : x.value()) CHECK(v == 0.0);
}

TEST_CASE("encode_dialogue: single utterance yields a single state") {
  Fixture fx;
  Tape tape;
  auto ue = encode_utterance(tape, fx.enc, fx.cfg, {3, 5});
  auto states = encode_dialogue(tape, fx.enc, fx.cfg, {ue.summary},
                                {embed_role(tape, fx.enc, Role::Defendant)});
  CHECK(states.size() == 1);
  CHECK(states[0].size() == 2 * fx.cfg.d_h);
}

TEST_CASE("encode_dialogue rejects length mismatches") {
  Fixture fx;
  Tape tape;
  auto ue = encode_utterance(tape, fx.enc, fx.cfg, {3});
  CHECK_THROWS_AS(
      encode_dialogue(tape, fx.enc, fx.cfg, {ue.summary, ue.summary},
                      {embed_role(tape, fx.enc, Role::Judge)}),
      DimensionError);
}

TEST_CASE("bidirectionality: perturbing the last utterance changes the first state") {
  Fixture fx;
  std::vector<std::vector<int>> tokens = {{1, 2}, {3, 4}, {5, 6}};
  std::vector<Role> roles = {Role::Judge, Role::Plaintiff, Role::Defendant};
  std::vector<std::vector<int>> elements = {{}, {}, {}};

  Tape t1;
  auto enc1 = encode_fragment_context(t1, fx.enc, fx.cfg, tokens, roles, elements, false, false);
  tokens[2] = {7, 8};  // perturb only the final utterance
  Tape t2;
  auto enc2 = encode_fragment_context(t2, fx.enc, fx.cfg, tokens, roles, elements, false, false);
  CHECK(enc1.dialogue_states[0].value() != enc2.dialogue_states[0].value());
}

TEST_CASE("encode_knowledge: empty lists fall back to the NONE element") {
  Fixture fx;
  Tape tape;
  auto states = encode_knowledge(tape, fx.enc, fx.cfg, {{}, {KnowledgeVocab::kNone}});
  REQUIRE(states.size() == 2);
  CHECK(states[0].value() == states[1].value());
  for (double v : states[0].value()) CHECK(std::isfinite(v));
}

TEST_CASE("encode_knowledge is order-sensitive and deterministic") {
  Fixture fx;
  Tape tape;
  auto states = encode_knowledge(tape, fx.enc, fx.cfg, {{1, 2}, {2, 1}, {1, 2}});
  CHECK(states[0].value() != states[1].value());
  CHECK(states[0].value() == states[2].value());
}

TEST_CASE("fragment context shapes line up") {
  Fixture fx;
  std::vector<std::vector<int>> tokens = {{1, 2, 3}, {4}, {5, 6}, {7, 8, 9, 10}};
  std::vector<Role> roles = {Role::Judge, Role::Plaintiff, Role::Judge, Role::Defendant};
  std::vector<std::vector<int>> elements = {{1}, {}, {2, 3}, {}};
  Tape tape;
  auto enc = encode_fragment_context(tape, fx.enc, fx.cfg, tokens, roles, elements, false, false);
  CHECK(enc.word_states.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(enc.word_states[i].size() == tokens[i].size());
    for (const Tensor& ws : enc.word_states[i]) CHECK(ws.size() == 2 * fx.cfg.d_h);
  }
  CHECK(enc.dialogue_states.size() == 4);
  CHECK(enc.knowledge_states.size() == 4);
  CHECK(enc.roles.size() == 4);
  for (const Tensor& t : enc.knowledge_states) CHECK(t.size() == fx.cfg.d_h);
}

TEST_CASE("identical inputs produce bit-identical encodings") {
  Fixture fx(99);
  std::vector<std::vector<int>> tokens = {{1, 2}, {3}, {4, 5}};
  std::vector<Role> roles = {Role::Plaintiff, Role::Judge, Role::Witness};
  std::vector<std::vector<int>> elements = {{1}, {}, {2}};
  Tape t1, t2;
  auto a = encode_fragment_context(t1, fx.enc, fx.cfg, tokens, roles, elements, false, false);
  auto b = encode_fragment_context(t2, fx.enc, fx.cfg, tokens, roles, elements, false, false);
  for (size_t i = 0; i < a.dialogue_states.size(); ++i) {
    CHECK(a.dialogue_states[i].value() == b.dialogue_states[i].value());
    CHECK(a.knowledge_states[i].value() == b.knowledge_states[i].value());
  }
}

TEST_CASE("end-to-end encoder gradients match finite differences on a toy fragment") {
  Fixture fx(7, 8, 4);
  fx.cfg.d_word = 3;
  fx.cfg.d_role = 2;
  fx.cfg.d_elem = 2;
  fx.cfg.d_h = 3;
  ParamSet params;
  Rng rng(7);
  EncoderParams enc = EncoderParams::create(params, fx.cfg, 8, 4, rng);

  std::vector<std::vector<int>> tokens = {{1, 2, 3, 4}, {5, 6}, {7, 1}};
  std::vector<Role> roles = {Role::Judge, Role::Plaintiff, Role::Defendant};
  std::vector<std::vector<int>> elements = {{1}, {}, {2, 3}};

  auto f = [&](Tape& tape) {
    auto e = encode_fragment_context(tape, enc, fx.cfg, tokens, roles, elements, false, false);
    Tensor loss = tape.constant({1}, {0.0});
    for (const Tensor& x : e.dialogue_states) loss = add(loss, sum(mul(x, x)));
    for (const Tensor& k : e.knowledge_states) loss = add(loss, sum(sigmoid(k)));
    return loss;
  };
  auto res = grad_check(f, params.all());
  CHECK(res.max_rel_err < 1e-4);
}

TEST_SUITE_END();
