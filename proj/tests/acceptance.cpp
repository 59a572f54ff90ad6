// Acceptance suite: one pass/fail line per criterion, non-zero exit when any
// criterion fails. Criterion 9 exercises the installed CLI binary (pass its
// path with --bin); --soft additionally runs the long ablation study.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#ifdef __unix__
#include <sys/wait.h>
#endif

#include "courtqg/grad_check.hpp"
#include "courtqg/metrics.hpp"
#include "courtqg/runconfig.hpp"
#include "courtqg/synth.hpp"
#include "courtqg/train.hpp"

namespace fs = std::filesystem;
using namespace courtqg;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail = "") {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << what;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!pass) ++g_failures;
}

void info(const std::string& msg) { std::cout << "[INFO] " << msg << std::endl; }

// Spec-level checks that sit outside the nine numbered criteria but still
// gate acceptance (operation examples that need the expensive overfit model
// or the installed binary).
void report_extra(bool pass, const std::string& what, const std::string& detail = "") {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " extra: " << what;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vocab vocab_from_fragments(const std::vector<DialogueFragment>& fragments, size_t min_freq) {
  std::vector<std::vector<std::string>> seqs;
  for (const auto& f : fragments) {
    for (const auto& u : f.context) seqs.push_back(tokenize(u.text));
    seqs.push_back(tokenize(f.target.text));
  }
  return Vocab::build(seqs, min_freq);
}

struct OverfitSuite {
  std::vector<Dialogue> dialogues;
  std::vector<DialogueFragment> fragments;  // exactly 64
};

OverfitSuite overfit_suite(uint64_t seed) {
  OverfitSuite s;
  SynthConfig cfg;
  cfg.n_dialogues = 24;
  cfg.seed = seed;
  s.dialogues = generate_synthetic_corpus(cfg);
  s.fragments = extract_fragments(s.dialogues);
  if (s.fragments.size() < 64) throw ConfigError("overfit suite needs 64 fragments");
  s.fragments.resize(64);
  return s;
}

Model overfit_model(const OverfitSuite& suite, AblationFlags flags, uint64_t seed) {
  ModelConfig cfg;  // default toy dims
  cfg.ablation = flags;
  return Model(cfg, vocab_from_fragments(suite.fragments, 1),
               KnowledgeVocab::build(suite.dialogues), seed);
}

// ---- criterion 1 ------------------------------------------------------------

void criterion_gradient_integrity() {
  const auto t0 = Clock::now();

  SynthConfig scfg;
  scfg.n_dialogues = 1;
  scfg.seed = 71;
  auto dialogues = generate_synthetic_corpus(scfg);
  auto fragments = extract_fragments(dialogues);
  DialogueFragment frag = fragments.front();
  frag.context.resize(3);

  std::vector<std::vector<std::string>> seqs;
  for (const auto& u : frag.context) seqs.push_back(tokenize(u.text));
  seqs.push_back(tokenize(frag.target.text));

  ModelConfig cfg;
  cfg.encoder = {6, 3, 4, 6};  // every dimension <= 8
  cfg.intent = {4, 4};
  cfg.d_att = 5;
  Model model(cfg, Vocab::build(seqs, 1), KnowledgeVocab::build(dialogues), 71);

  PreparedFragment prep = model.prepare(frag);
  auto f = [&](Tape& tape) { return sequence_loss(tape, model, prep, 1e-4); };
  GradCheckResult res = grad_check(f, model.params().all());

  const double elapsed = seconds_since(t0);
  const bool pass = res.max_rel_err < 1e-4 && res.checked == model.params().total_size() &&
                    elapsed < 60.0;
  std::ostringstream detail;
  detail << res.checked << " parameters, max rel err " << res.max_rel_err << ", "
         << elapsed << " s";
  report(1, pass, "whole-model finite-difference gradient check", detail.str());
}

// ---- criterion 2 ------------------------------------------------------------

void criterion_intent_oracles() {
  bool pass = true;
  std::ostringstream why;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) {
      pass = false;
      why << (why.str().empty() ? "" : "; ") << what;
    }
  };
  auto raw = [](std::vector<size_t> shape, std::vector<double> data) {
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->value = std::move(data);
    node->requires_grad = true;
    return node;
  };
  const double sig1 = 1.0 / (1.0 + std::exp(-1.0));

  {  // identity-like 2x2 transfer of [1, -1]
    Tape tape;
    Tensor k = materialize_transfer(tape, raw({2, 2}, {50, -50, -50, 50}));
    Tensor intent = intent_transform(k, tape.constant({2}, {1.0, -1.0}));
    expect(std::fabs(intent.value()[0] - sig1) < 1e-9, "intent transform sigma(1)");
    expect(std::fabs(intent.value()[1] - (1.0 - sig1)) < 1e-9, "intent transform sigma(-1)");
  }
  {  // monotone pre-activation of the role transform
    Rng rng(72);
    bool mono = true;
    for (int trial = 0; trial < 50; ++trial) {
      Tape tape;
      std::vector<double> rawk(6), role(2);
      for (auto& v : rawk) v = rng.uniform(-3.0, 3.0);
      for (auto& v : role) v = rng.uniform(-2.0, 2.0);
      Tensor k = materialize_transfer(tape, raw({3, 2}, rawk));
      Tensor before = matmul(k, tape.constant({2}, role));
      role[rng.below(2)] += 0.7;
      Tensor after = matmul(k, tape.constant({2}, role));
      for (size_t i = 0; i < 3; ++i) mono &= after.value()[i] >= before.value()[i] - 1e-12;
    }
    expect(mono, "role transform monotone pre-activation");
  }
  {  // pairing against a brute-force reconstruction
    Rng rng(73);
    Tape tape;
    std::vector<Tensor> intents, transfers;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> v(2);
      for (auto& x : v) x = rng.uniform(0.0, 1.0);
      intents.push_back(tape.constant({2}, v));
    }
    for (int i = 0; i < 4; ++i) {
      std::vector<double> v(3);
      for (auto& x : v) x = rng.uniform(0.0, 1.0);
      transfers.push_back(tape.constant({3}, v));
    }
    auto paired = pair_sequence(intents, transfers);
    bool same = paired.size() == 3;
    for (size_t i = 0; same && i < 3; ++i) {
      std::vector<double> expected = intents[i].value();
      const auto& nxt = transfers[i + 1].value();
      expected.insert(expected.end(), nxt.begin(), nxt.end());
      for (size_t j = 0; j < expected.size(); ++j)
        same &= std::fabs(paired[i].value()[j] - expected[j]) < 1e-9;
    }
    expect(same, "pair_sequence brute-force oracle");
  }
  {  // attention weights from scores (ln 2, ln 1)
    Tape tape;
    const double ln2 = std::log(2.0);
    Tensor i1 = tape.constant({2}, {ln2, ln2});
    Tensor i2 = tape.constant({2}, {0.0, 0.0});
    Tensor h1 = tape.constant({3}, {3, 0, 9});
    Tensor h2 = tape.constant({3}, {0, 6, 3});
    auto [y, w] = intent_attention({i1, i2}, {h1, h2});
    expect(std::fabs(w.value()[0] - 2.0 / 3) < 1e-9 && std::fabs(w.value()[1] - 1.0 / 3) < 1e-9,
           "attention weights 2/3 and 1/3");
    const double expected[3] = {2.0, 2.0, 7.0};  // (2/3)h1 + (1/3)h2
    for (int j = 0; j < 3; ++j)
      expect(std::fabs(y.value()[j] - expected[j]) < 1e-9, "attended summary hand value");
  }
  {  // fusion against the direct formula
    Rng rng(74);
    Tape tape;
    std::vector<double> xv(4), yv(4);
    for (auto& v : xv) v = rng.uniform(-2.0, 2.0);
    for (auto& v : yv) v = rng.uniform(-2.0, 2.0);
    auto fused = fuse({tape.constant({4}, xv)}, tape.constant({4}, yv));
    bool same = fused[0].size() == 16;
    for (size_t i = 0; same && i < 4; ++i) {
      same &= std::fabs(fused[0].value()[i] - xv[i]) < 1e-9;
      same &= std::fabs(fused[0].value()[4 + i] - yv[i]) < 1e-9;
      same &= std::fabs(fused[0].value()[8 + i] - xv[i] * yv[i]) < 1e-9;
      same &= std::fabs(fused[0].value()[12 + i] - (xv[i] - yv[i])) < 1e-9;
    }
    expect(same, "fusion slot-by-slot oracle");
  }
  {  // gradients flow through the full pipeline
    EncoderConfig ecfg{3, 2, 2, 3};
    IntentConfig icfg{2, 2};
    ParamSet params;
    Rng rng(75);
    EncoderParams enc = EncoderParams::create(params, ecfg, 6, 4, rng);
    IntentParams intent = IntentParams::create(params, icfg, ecfg.d_h, ecfg.d_role, rng);
    std::vector<std::vector<int>> tokens = {{1, 2}, {3, 4}};
    std::vector<Role> roles = {Role::Plaintiff, Role::Defendant};
    std::vector<std::vector<int>> elements = {{1}, {}};
    auto f = [&](Tape& tape) {
      auto encoded =
          encode_fragment_context(tape, enc, ecfg, tokens, roles, elements, false, false);
      auto ctx = intent_navigation(tape, intent, encoded, embed_role(tape, enc, Role::Judge));
      Tensor loss = tape.constant({1}, {0.0});
      for (const Tensor& z : ctx.fused) loss = add(loss, sum(mul(z, z)));
      return loss;
    };
    expect(grad_check(f, params.all()).max_rel_err < 1e-4, "end-to-end gradient flow");
  }
  report(2, pass, "intent-navigation unit oracles", why.str());
}

// ---- criterion 3 ------------------------------------------------------------

void criterion_optimizer_rule() {
  std::vector<double> value = {1.0};
  std::vector<double> accum = {0.0};
  optimizer_step(value, {0.5}, accum, 0.1);
  const bool first = std::fabs(value[0] - 0.9) < 1e-9;
  optimizer_step(value, {0.5}, accum, 0.1);
  const double expected = 0.9 - 0.1 * 0.5 / std::sqrt(0.5);
  const bool second = std::fabs(value[0] - expected) < 1e-9;
  std::ostringstream detail;
  detail << "1 -> 0.9 -> " << value[0];
  report(3, first && second, "accumulator update rule hand trace", detail.str());
}

// ---- criteria 4 and 5 -------------------------------------------------------

struct OverfitOutcome {
  bool reached_nll = false;
  size_t epochs_used = 0;
  double final_nll = 0.0;
  double exact_fraction = 0.0;
  double elapsed = 0.0;
  Model* model = nullptr;
};

OverfitOutcome run_overfit(Model& model, const std::vector<DialogueFragment>& fragments,
                           size_t max_epochs, double nll_target) {
  const auto t0 = Clock::now();
  TrainConfig tcfg;  // default lambda, mu, batch size
  tcfg.seed = 4;

  std::vector<PreparedFragment> prepared;
  for (const auto& f : fragments) prepared.push_back(model.prepare(f));

  auto exact_fraction = [&] {
    size_t exact = 0;
    for (const auto& prep : prepared) {
      SearchResult res = model.greedy_search(prep, 30);
      if (model.realize(prep, res) == prep.target_tokens) ++exact;
    }
    return static_cast<double>(exact) / static_cast<double>(prepared.size());
  };

  // Manual loop mirroring Trainer::train so training can stop as soon as both
  // targets are met.
  OptimizerState opt = OptimizerState::create(model.params());
  Rng shuffle_rng(tcfg.seed ^ 0x5deece66dull);
  std::vector<size_t> order(prepared.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  OverfitOutcome out;
  for (size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double nll_sum = 0.0;
    size_t tokens = 0;
    for (size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const size_t end = std::min(order.size(), start + tcfg.batch_size);
      model.params().zero_grads();
      for (size_t k = start; k < end; ++k) {
        Tape tape;
        Tensor nll = model.sequence_nll(tape, prepared[order[k]]);
        nll_sum += nll.value()[0];
        tokens += prepared[order[k]].target_ext_ids.size() + 1;
        tape.backward(nll);
      }
      if (tcfg.l2_lambda != 0.0)
        for (const Parameter& p : model.params().all())
          for (size_t i = 0; i < p.node->size(); ++i)
            p.node->grad[i] += 2.0 * tcfg.l2_lambda * p.node->value[i];
      optimizer_step(model.params(), opt, tcfg.learning_rate);
    }
    out.final_nll = nll_sum / static_cast<double>(tokens);
    out.epochs_used = epoch;
    if (out.final_nll < nll_target) {
      out.reached_nll = true;
      // Exact-match decoding is the expensive check; sample it sparsely.
      if (epoch % 10 == 0 || epoch == max_epochs) {
        out.exact_fraction = exact_fraction();
        if (out.exact_fraction >= 0.9) break;
      }
    }
  }
  if (out.exact_fraction < 0.9) out.exact_fraction = exact_fraction();
  out.elapsed = seconds_since(t0);
  return out;
}

void criterion_overfit(Model& model, const OverfitSuite& suite) {
  OverfitOutcome out = run_overfit(model, suite.fragments, 200, 0.10);
  const bool pass = out.reached_nll && out.exact_fraction >= 0.9 && out.elapsed < 600.0;
  std::ostringstream detail;
  detail << "nll/token " << out.final_nll << " after " << out.epochs_used << " epochs, "
         << 100.0 * out.exact_fraction << "% exact, " << out.elapsed << " s";
  report(4, pass, "overfit oracle on 64 fragments", detail.str());
}

void criterion_copy_mechanism() {
  // Base fragments provide the vocabulary; the special fragment carries a
  // placeholder the vocabulary has never seen.
  SynthConfig scfg;
  scfg.n_dialogues = 2;
  scfg.seed = 91;
  auto dialogues = generate_synthetic_corpus(scfg);
  auto fragments = extract_fragments(dialogues);
  fragments.resize(4);

  DialogueFragment special;
  special.id = "copy-probe";
  special.context = {
      {Role::Judge, "Plaintiff, what's your relationship with <person_7>?", {"party_relationship"}},
      {Role::Plaintiff, "Friends.", {}},
      {Role::Judge, "Plaintiff, how much money did <person_7> borrow from you?", {"loan_amount"}},
      {Role::Plaintiff, "He borrowed <amount_2>.", {}},
      {Role::Defendant, "I heard the people say they were in the same circle.", {}},
  };
  special.target = {Role::Judge,
                    "Defendant, do you admit borrowing from <person_7>?",
                    {"loan_amount"}};

  Vocab vocab = vocab_from_fragments(fragments, 1);  // excludes <person_7>
  const bool excluded = !vocab.contains("<person_7>");
  KnowledgeVocab kvocab = KnowledgeVocab::build(dialogues);

  ModelConfig cfg;
  Model model(cfg, vocab, kvocab, 91);

  std::vector<DialogueFragment> train_set = fragments;
  train_set.push_back(special);
  TrainConfig tcfg;
  tcfg.epochs = 200;
  tcfg.batch_size = 5;
  tcfg.seed = 91;
  Trainer trainer(model, tcfg);
  trainer.train(train_set, {});

  // Teacher-forced pass over the special fragment; find the gold step of the
  // placeholder and read the final probability of its temporary id.
  PreparedFragment prep = model.prepare(special);
  double prob = 0.0;
  bool via_temp_id = false;
  {
    Tape tape;
    auto g = model.build_context(tape, prep);
    DecoderState state = g.init;
    std::vector<int> gold = prep.target_ext_ids;
    gold.push_back(Vocab::kEos);
    for (size_t step = 0; step < gold.size(); ++step) {
      auto [dist, next] = decode_step(tape, model.decoder_params(),
                                      model.encoder_params().word_embedding, g.memory, state,
                                      prep.n_oov(), false);
      if (step < prep.target_tokens.size() && prep.target_tokens[step] == "<person_7>") {
        via_temp_id = gold[step] >= static_cast<int>(vocab.size());
        prob = dist.final.value()[gold[step]];
      }
      state = next;
      state.prev_token = gold[step];
    }
  }
  const bool pass = excluded && via_temp_id && prob > 0.5;
  std::ostringstream detail;
  detail << "P(temporary id of <person_7>) = " << prob;
  report(5, pass, "copy mechanism emits an out-of-vocabulary placeholder", detail.str());
}

// ---- criterion 6 ------------------------------------------------------------

void criterion_metric_oracles() {
  bool pass = true;
  std::ostringstream why;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) {
      pass = false;
      why << (why.str().empty() ? "" : "; ") << what;
    }
  };
  auto close = [](double a, double b) { return std::fabs(a - b) < 1e-9; };

  const TokenSeq abc = {"a", "b", "c"};
  const TokenSeq xyz = {"x", "y", "z"};
  expect(close(rouge_n(abc, abc, 1), 1.0) && close(rouge_n(abc, abc, 2), 1.0) &&
             close(rouge_l(abc, abc), 1.0),
         "identity scores 1");
  expect(rouge_n(abc, xyz, 1) == 0.0 && rouge_l(abc, xyz) == 0.0, "disjoint scores 0");
  expect(close(rouge_n(abc, {"a", "c", "d"}, 1), 2.0 / 3), "rouge-1 hand count 2/3");
  expect(close(rouge_l({"a", "b", "c", "d"}, {"a", "c", "b", "d"}), 0.75), "rouge-L 3/4");

  expect(close(bleu4({abc}, {abc}), 1.0) == false, "bleu zero without 4-grams");  // 3 tokens
  expect(close(bleu4({{"a", "b", "c", "d", "e"}}, {{"a", "b", "c", "d", "e"}}), 1.0),
         "bleu identity");
  expect(bleu4({abc}, {{"a", "b", "c", "d"}}) == 0.0, "bleu no-smoothing zero");
  expect(close(bleu4_breakdown({abc}, {{"a", "b", "c", "d"}}).brevity_penalty,
               std::exp(1.0 - 4.0 / 3.0)),
         "brevity penalty formula");
  expect(close(bleu4({{"a", "b", "c", "d", "e", "f"}}, {{"a", "b", "c", "d", "e", "f", "g", "h"}}),
               std::exp(1.0 - 4.0 / 3.0)),
         "brevity penalty on all-precisions-1 corpus");

  std::vector<double> base(100, 0.5);
  std::vector<double> better(100, 10.5);
  expect(paired_significance(base, base, 1000, 7) >= 0.9, "null significance near 1");
  expect(paired_significance(better, base, 1000, 7) < 0.001, "separated significance < 0.001");

  report(6, pass, "metric oracles", why.str());
}

// ---- criterion 7 ------------------------------------------------------------

void criterion_protocol_fidelity() {
  bool pass = true;
  std::ostringstream why;

  SynthConfig scfg;
  scfg.n_dialogues = 50;
  scfg.seed = 77;
  auto dialogues = generate_synthetic_corpus(scfg);
  auto fragments = extract_fragments(dialogues);
  for (const auto& f : fragments) {
    if (f.target.role != Role::Judge || f.context.size() < 5) {
      pass = false;
      why << "fragment invariant violated; ";
      break;
    }
  }

  // Position gate: judge turns only at 1..5 produce nothing.
  Dialogue gate;
  gate.id = "gate";
  for (int i = 0; i < 5; ++i) gate.turns.push_back({Role::Judge, "Any evidence?", {}});
  gate.turns.push_back({Role::Plaintiff, "No.", {}});
  if (!extract_fragments(gate).empty()) {
    pass = false;
    why << "position gate leaked; ";
  }

  for (size_t n : {10u, 37u, 64u, 1001u}) {
    IndexSplit s = split_indices(n, 7);
    const bool ok = std::fabs(static_cast<double>(s.train.size()) - 0.8 * n) <= 1.0 &&
                    std::fabs(static_cast<double>(s.dev.size()) - 0.1 * n) <= 1.0 &&
                    std::fabs(static_cast<double>(s.test.size()) - 0.1 * n) <= 1.0 &&
                    s.train.size() + s.dev.size() + s.test.size() == n;
    if (!ok) {
      pass = false;
      why << "8:1:1 off for n=" << n << "; ";
    }
  }

  IndexSplit table1 = split_indices(302650, 7);
  if (table1.train.size() != 242120 || table1.dev.size() != 30265 ||
      table1.test.size() != 30265) {
    pass = false;
    why << "302650 arithmetic broken; ";
  }

  report(7, pass, "protocol fidelity (extraction gate, 8:1:1 split arithmetic)", why.str());
}

// ---- criterion 8 ------------------------------------------------------------

MetricReport eval_config(Model& model, const std::vector<DialogueFragment>& fragments) {
  std::vector<TokenSeq> predictions, references;
  for (const auto& f : fragments) {
    predictions.push_back(model.greedy_decode(f, 30));
    references.push_back(tokenize(f.target.text));
  }
  return evaluate_all(predictions, references);
}

void criterion_ablation_harness(const OverfitSuite& suite, bool soft) {
  bool pass = true;
  std::ostringstream why;

  struct Config {
    const char* name;
    AblationFlags flags;
  };
  std::vector<Config> configs = {{"full", {}}, {}, {}, {}};
  configs[1].name = "no_intent_nav";
  configs[1].flags.disable_intent_nav = true;
  configs[2].name = "no_copy";
  configs[2].flags.disable_copy = true;
  configs[3].name = "no_intent_no_copy";  // plain attentional seq2seq
  configs[3].flags.disable_intent_nav = true;
  configs[3].flags.disable_copy = true;

  for (const Config& c : configs) {
    try {
      Model model = overfit_model(suite, c.flags, 8);
      TrainConfig tcfg;
      tcfg.epochs = 8;
      tcfg.seed = 8;
      tcfg.ablation = c.flags;
      Trainer trainer(model, tcfg);
      TrainResult res = trainer.train(suite.fragments, {});
      if (res.diverged) {
        pass = false;
        why << c.name << " diverged; ";
        continue;
      }
      MetricReport rep = eval_config(model, suite.fragments);
      const std::string json = rep.to_json();
      // Table-2-shaped report: the five columns in order, then n.
      const bool shaped = json.find("rouge1") < json.find("rouge2") &&
                          json.find("rouge2") < json.find("rouge3") &&
                          json.find("rouge3") < json.find("rougeL") &&
                          json.find("rougeL") < json.find("bleu4") &&
                          json.find("bleu4") < json.find("\"n\"");
      if (!shaped) {
        pass = false;
        why << c.name << " report malformed; ";
      }
      info(std::string("ablation ") + c.name + " report: " + json);
    } catch (const std::exception& e) {
      pass = false;
      why << c.name << " threw: " << e.what() << "; ";
    }
  }
  report(8, pass, "ablation harness trains and evaluates three configurations", why.str());

  if (!soft) {
    info("soft expectation (2000 fragments, 30 epochs, 3 seeds) skipped; run with --soft");
    return;
  }
  // Logged, never asserted: full model vs. no-intent ablation on the
  // intent-scripted corpus.
  size_t wins = 0;
  for (uint64_t seed : {101ull, 102ull, 103ull}) {
    SynthConfig scfg;
    scfg.n_dialogues = 520;
    scfg.seed = seed;
    auto dialogues = generate_synthetic_corpus(scfg);
    auto fragments = extract_fragments(dialogues);
    if (fragments.size() > 2000) fragments.resize(2000);
    DatasetSplit split = split_dataset(fragments, seed);

    double dev_rouge1[2] = {0.0, 0.0};
    for (int variant = 0; variant < 2; ++variant) {
      AblationFlags flags;
      flags.disable_intent_nav = variant == 1;
      ModelConfig mcfg;
      mcfg.ablation = flags;
      Model model(mcfg, vocab_from_fragments(split.train, 1), KnowledgeVocab::build(dialogues),
                  seed);
      TrainConfig tcfg;
      tcfg.epochs = 30;
      tcfg.seed = seed;
      tcfg.ablation = flags;
      Trainer trainer(model, tcfg);
      trainer.train(split.train, split.dev);
      dev_rouge1[variant] = eval_config(model, split.dev).rouge1;
    }
    info("soft study seed " + std::to_string(seed) + ": full dev R-1 " +
         std::to_string(100 * dev_rouge1[0]) + " vs no-intent " +
         std::to_string(100 * dev_rouge1[1]));
    if (dev_rouge1[0] >= dev_rouge1[1]) ++wins;
  }
  info("soft expectation outcome: full >= no-intent in " + std::to_string(wins) + "/3 seeds");
}

// ---- criterion 9 ------------------------------------------------------------

int run_cmd(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
#ifdef __unix__
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
#else
  return rc;
#endif
}

fs::path criterion_determinism(const std::string& cli) {
  const fs::path dir0 = fs::temp_directory_path() / "courtqg_accept";
  if (cli.empty()) {
    report(9, false, "CLI determinism", "no --bin path to the courtqg binary");
    return dir0;
  }
  bool pass = true;
  std::ostringstream why;
  const fs::path dir = dir0;
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();
  const std::string quiet = " > /dev/null 2>&1";

  // synth twice
  if (run_cmd(cli + " synth --out " + d + "/c1.jsonl --n 40 --seed 11" + quiet) != 0 ||
      run_cmd(cli + " synth --out " + d + "/c2.jsonl --n 40 --seed 11" + quiet) != 0) {
    pass = false;
    why << "synth failed; ";
  } else if (read_file(dir / "c1.jsonl") != read_file(dir / "c2.jsonl")) {
    pass = false;
    why << "synth outputs differ; ";
  }

  // train twice on a tiny config
  {
    std::ofstream cfg(dir / "cfg.txt");
    cfg << "train.epochs = 2\ntrain.seed = 12\nmodel.d_h = 8\nmodel.d_word = 8\n"
           "model.d_role = 3\nmodel.d_elem = 4\nmodel.d_intent = 4\nmodel.d_roletrans = 4\n"
           "model.d_att = 8\n";
  }
  for (const char* run : {"r1", "r2"}) {
    if (run_cmd(cli + " train --corpus " + d + "/c1.jsonl --config " + d + "/cfg.txt --out " + d +
                "/" + run + quiet) != 0) {
      pass = false;
      why << "train failed; ";
    }
  }
  if (pass) {
    for (const char* f : {"train.log", "checkpoint_best.json", "config.resolved.json"}) {
      if (read_file(dir / "r1" / f) != read_file(dir / "r2" / f)) {
        pass = false;
        why << "train artifact " << f << " differs; ";
      }
    }
  }

  // eval twice
  if (pass) {
    for (const char* run : {"e1", "e2"}) {
      if (run_cmd(cli + " eval --model " + d + "/r1/checkpoint_best.json --corpus " + d +
                  "/c1.jsonl --split test --out " + d + "/" + run + quiet) != 0) {
        pass = false;
        why << "eval failed; ";
      }
    }
  }
  if (pass) {
    for (const char* f : {"report.json", "predictions.jsonl"}) {
      if (read_file(dir / "e1" / f) != read_file(dir / "e2" / f)) {
        pass = false;
        why << "eval artifact " << f << " differs; ";
      }
    }
  }

  // generate twice on a fragment file
  if (pass) {
    auto dialogues = load_corpus((dir / "c1.jsonl").string());
    auto fragments = extract_fragments(dialogues);
    save_fragments((dir / "frag.jsonl").string(), {fragments.front()});
    for (const char* out : {"g1.txt", "g2.txt"}) {
      if (run_cmd(cli + " generate --model " + d + "/r1/checkpoint_best.json --fragment " + d +
                  "/frag.jsonl > " + d + "/" + out + " 2>/dev/null") != 0) {
        pass = false;
        why << "generate failed; ";
      }
    }
    if (pass && read_file(dir / "g1.txt") != read_file(dir / "g2.txt")) {
      pass = false;
      why << "generate outputs differ; ";
    }
  }

  report(9, pass, "repeated commands are byte-identical", why.str());
  return dir;
}

// CLI failure contracts and surface laws, using the artefacts the
// determinism run left behind.
void cli_contract_extras(const std::string& cli, const fs::path& dir) {
  if (cli.empty() || !fs::exists(dir / "r1" / "checkpoint_best.json")) {
    report_extra(false, "CLI contract checks", "prerequisite run missing");
    return;
  }
  const std::string d = dir.string();
  const std::string quiet = " > /dev/null 2>&1";

  report_extra(run_cmd(cli + " synth --out " + d + "/zero.jsonl --n 0 --seed 1" + quiet) == 2,
               "synth --n 0 exits 2");
  report_extra(run_cmd(cli + " synth --out /nonexistent_dir_zz/c.jsonl --n 5 --seed 1" + quiet) ==
                   2,
               "synth with unwritable path exits 2");

  {
    std::ofstream bad(dir / "bad.cfg");
    bad << "train.muu = 1\n";
  }
  const int rc_bad = run_cmd(cli + " train --corpus " + d + "/c1.jsonl --config " + d +
                             "/bad.cfg --out " + d + "/bad 2> " + d + "/bad.err");
  std::string err = read_file(dir / "bad.err");
  report_extra(rc_bad == 2 && err.find("train.muu") != std::string::npos,
               "train with an unknown config key exits 2 naming the key");

  {
    std::ofstream div(dir / "div.cfg");
    div << "train.mu = 1e300\ntrain.epochs = 2\nmodel.d_h = 8\nmodel.d_word = 8\n"
           "model.d_role = 3\nmodel.d_elem = 4\nmodel.d_intent = 4\nmodel.d_roletrans = 4\n"
           "model.d_att = 8\n";
  }
  const int rc_div = run_cmd(cli + " train --corpus " + d + "/c1.jsonl --config " + d +
                             "/div.cfg --out " + d + "/div" + quiet);
  bool ckpt_ok = true;
  const fs::path div_ckpt = dir / "div" / "checkpoint_best.json";
  if (fs::exists(div_ckpt)) {
    try {
      load_checkpoint(div_ckpt.string());
    } catch (const std::exception&) {
      ckpt_ok = false;
    }
  }
  report_extra(rc_div == 3 && ckpt_ok, "divergence exits 3 without corrupting the checkpoint");

  {
    auto dialogues = load_corpus((dir / "c1.jsonl").string());
    DialogueFragment shorty;
    shorty.id = "short";
    shorty.context.assign(dialogues[0].turns.begin(), dialogues[0].turns.begin() + 4);
    shorty.target = {Role::Judge, "Which circle?", {}};
    save_fragments((dir / "short.jsonl").string(), {shorty});
  }
  report_extra(run_cmd(cli + " generate --model " + d + "/r1/checkpoint_best.json --fragment " +
                       d + "/short.jsonl" + quiet) == 2,
               "generate with a 4-utterance context exits 2 citing the rule");

  report_extra(run_cmd(cli + " synth --out " + d + "/other.jsonl --n 40 --seed 99" + quiet) == 0 &&
                   run_cmd(cli + " eval --model " + d + "/r1/checkpoint_best.json --corpus " + d +
                           "/other.jsonl --split test --out " + d + "/em" + quiet) == 2,
               "eval with a mismatched corpus vocabulary exits 2");

  const int rc_beam = run_cmd(cli + " eval --model " + d + "/r1/checkpoint_best.json --corpus " +
                              d + "/c1.jsonl --split test --beam 1 --out " + d + "/e3" + quiet);
  report_extra(rc_beam == 0 &&
                   read_file(dir / "e3" / "report.json") == read_file(dir / "e1" / "report.json"),
               "eval --beam 1 equals the default greedy report");

  {
    std::ofstream abl(dir / "abl.cfg");
    abl << "train.epochs = 1\nmodel.d_h = 8\nmodel.d_word = 8\nmodel.d_role = 3\n"
           "model.d_elem = 4\nmodel.d_intent = 4\nmodel.d_roletrans = 4\nmodel.d_att = 8\n";
  }
  const int rc_abl = run_cmd(cli + " train --corpus " + d + "/c1.jsonl --config " + d +
                             "/abl.cfg --out " + d + "/abl --ablation disable_copy" + quiet);
  const std::string resolved = read_file(dir / "abl" / "config.resolved.json");
  const std::string ckpt = read_file(dir / "abl" / "checkpoint_best.json");
  report_extra(rc_abl == 0 && resolved.find("disable_copy") != std::string::npos &&
                   ckpt.find("disable_copy") != std::string::npos,
               "--ablation disable_copy is recorded in the saved config and checkpoint");
}

// Operation examples that need the overfit model from criterion 4.
void extra_overfit_artifacts(Model& model, const OverfitSuite& suite) {
  size_t ends_with_q = 0;
  const size_t n = 50;
  for (size_t i = 0; i < n; ++i) {
    auto words = model.greedy_decode(suite.fragments[i], 30);
    if (!words.empty() && words.back() == "?") ++ends_with_q;
  }
  std::ostringstream detail;
  detail << ends_with_q << "/" << n << " end with '?'";
  report_extra(ends_with_q * 10 >= n * 9, "generated questions end with a question mark",
               detail.str());
}

void extra_first_epochs_monotone(const OverfitSuite& suite) {
  Model model = overfit_model(suite, {}, 14);
  TrainConfig tcfg;
  tcfg.epochs = 5;
  tcfg.seed = 14;
  Trainer trainer(model, tcfg);
  TrainResult res = trainer.train(suite.fragments, {});
  bool monotone = res.log.size() == 5;
  for (size_t i = 1; i < res.log.size(); ++i)
    monotone &= res.log[i].train_nll_per_token <= res.log[i - 1].train_nll_per_token + 1e-9;
  report_extra(monotone, "mean train NLL/token is non-increasing over the first 5 epochs");
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  bool soft = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--bin" && i + 1 < argc)
      cli = argv[++i];
    else if (arg == "--soft")
      soft = true;
  }

  try {
    criterion_gradient_integrity();
    criterion_intent_oracles();
    criterion_optimizer_rule();

    OverfitSuite suite = overfit_suite(4);
    Model model = overfit_model(suite, {}, 4);
    criterion_overfit(model, suite);
    criterion_copy_mechanism();
    criterion_metric_oracles();
    criterion_protocol_fidelity();
    criterion_ablation_harness(suite, soft);
    const fs::path cli_dir = criterion_determinism(cli);
    cli_contract_extras(cli, cli_dir);
    extra_overfit_artifacts(model, suite);
    extra_first_epochs_monotone(suite);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance suite aborted: " << e.what() << std::endl;
    return 1;
  }

  std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
