#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "courtqg/metrics.hpp"
#include "courtqg/runconfig.hpp"
#include "courtqg/synth.hpp"
#include "courtqg/train.hpp"

namespace fs = std::filesystem;
using namespace courtqg;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

Vocab vocab_from_fragments(const std::vector<DialogueFragment>& fragments, size_t min_freq) {
  std::vector<std::vector<std::string>> seqs;
  for (const auto& f : fragments) {
    for (const auto& u : f.context) seqs.push_back(tokenize(u.text));
    seqs.push_back(tokenize(f.target.text));
  }
  return Vocab::build(seqs, min_freq);
}

struct EvalData {
  std::vector<DialogueFragment> fragments;  // requested split, corpus order
  Vocab vocab;                              // rebuilt from the train split
  KnowledgeVocab kvocab;                    // rebuilt from the whole corpus
};

// Reproduces the fragment extraction, split, and vocabulary construction of a
// training run so a checkpoint can be validated against the corpus.
EvalData rebuild_eval_data(const std::string& corpus_path, const TrainConfig& tcfg,
                           const std::string& split_name) {
  auto dialogues = load_corpus(corpus_path);
  auto fragments = extract_fragments(dialogues);
  DatasetSplit split = split_dataset(fragments, tcfg.seed);

  EvalData data;
  data.vocab = vocab_from_fragments(split.train, tcfg.min_freq);
  data.kvocab = KnowledgeVocab::build(dialogues);
  if (split_name == "train")
    data.fragments = std::move(split.train);
  else if (split_name == "dev")
    data.fragments = std::move(split.dev);
  else if (split_name == "test")
    data.fragments = std::move(split.test);
  else
    throw ConfigError("unknown split \"" + split_name + "\" (expected train, dev or test)");
  return data;
}

std::vector<std::vector<std::string>> decode_all(const Model& model,
                                                 const std::vector<DialogueFragment>& fragments,
                                                 size_t beam, size_t max_len) {
  std::vector<std::vector<std::string>> predictions(fragments.size());
  // Per-fragment decoding is embarrassingly parallel; output order is fixed
  // by the index, so the result is identical at any thread count.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long i = 0; i < static_cast<long long>(fragments.size()); ++i)
    predictions[static_cast<size_t>(i)] =
        beam <= 1 ? model.greedy_decode(fragments[static_cast<size_t>(i)], max_len)
                  : model.beam_decode(fragments[static_cast<size_t>(i)], beam, max_len);
  return predictions;
}

int run_synth(const std::string& out_path, size_t n, uint64_t seed) {
  SynthConfig cfg;
  cfg.n_dialogues = n;
  cfg.seed = seed;
  auto dialogues = generate_synthetic_corpus(cfg);
  save_corpus(out_path, dialogues, cfg.to_json());

  size_t utterances = 0;
  for (const auto& d : dialogues) utterances += d.turns.size();
  const double avg = static_cast<double>(utterances) / static_cast<double>(dialogues.size());
  std::printf("%-10s %12s %12s %12s\n", "dataset", "#samples", "#utterances", "#avg_length");
  std::printf("%-10s %12zu %12zu %12.2f\n", "synth", dialogues.size(), utterances, avg);
  return 0;
}

int run_train(const std::string& corpus_path, const std::string& config_path,
              const std::string& out_dir, const std::string& ablation) {
  RunConfig cfg;
  if (!config_path.empty()) cfg.apply_file(config_path);
  if (!ablation.empty()) cfg.train.ablation = AblationFlags::parse(ablation);
  cfg.model.ablation = cfg.train.ablation;
  cfg.train.validate();

  auto dialogues = load_corpus(corpus_path);
  auto fragments = extract_fragments(dialogues);
  DatasetSplit split = split_dataset(fragments, cfg.train.seed);

  Vocab vocab = vocab_from_fragments(split.train, cfg.train.min_freq);
  KnowledgeVocab kvocab = KnowledgeVocab::build(dialogues);
  Model model(cfg.model, std::move(vocab), std::move(kvocab), cfg.train.seed);

  fs::create_directories(out_dir);
  {
    ordered_json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["config"] = ordered_json::parse(cfg.to_json());
    std::ofstream out(fs::path(out_dir) / "config.resolved.json", std::ios::binary);
    out << j.dump() << "\n";
  }

  std::ofstream log_file(fs::path(out_dir) / "train.log", std::ios::binary);
  const std::string ckpt_path = (fs::path(out_dir) / "checkpoint_best.json").string();

  Trainer trainer(model, cfg.train);
  TrainResult result = trainer.train(
      split.train, split.dev,
      [&](const EpochLog& log) {
        const std::string line = "epoch=" + std::to_string(log.epoch) +
                                 " train_nll=" + format_double(log.train_nll_per_token) +
                                 " dev_nll=" + format_double(log.dev_nll_per_token);
        std::cout << line << "\n";
        log_file << line << "\n";
        log_file.flush();
      },
      [&](const EpochLog&) { save_checkpoint(ckpt_path, model, cfg.train); });

  if (result.diverged) {
    std::cerr << "training diverged (non-finite loss); last good checkpoint kept at "
              << ckpt_path << "\n";
    return kExitRuntime;
  }
  std::cout << "best_epoch=" << result.best_epoch
            << " best_dev_nll=" << format_double(result.best_dev_nll) << "\n";
  return 0;
}

int run_eval(const std::string& model_path, const std::string& corpus_path,
             const std::string& split_name, size_t beam, const std::string& out_dir,
             const std::string& compare_path, uint64_t bootstrap_seed) {
  if (beam < 1) throw ConfigError("--beam must be >= 1");
  LoadedCheckpoint primary = load_checkpoint(model_path);
  EvalData data = rebuild_eval_data(corpus_path, primary.train_config, split_name);
  if (data.vocab.hash() != primary.model->vocab().hash())
    throw ConfigError("vocabulary hash mismatch between checkpoint \"" + model_path +
                      "\" and corpus \"" + corpus_path + "\"");

  const size_t max_len = primary.train_config.max_target_len;
  auto predictions = decode_all(*primary.model, data.fragments, beam, max_len);

  std::vector<TokenSeq> references;
  references.reserve(data.fragments.size());
  for (const auto& f : data.fragments) references.push_back(tokenize(f.target.text));

  MetricReport report = evaluate_all(predictions, references);

  fs::create_directories(out_dir);
  ordered_json run_config;
  run_config["model"] = model_path;
  run_config["corpus"] = corpus_path;
  run_config["split"] = split_name;
  run_config["beam"] = beam;
  run_config["train_config"] = ordered_json::parse(primary.train_config.to_json());
  run_config["model_config"] = ordered_json::parse(primary.model->config().to_json());

  {
    std::ofstream out(fs::path(out_dir) / "predictions.jsonl", std::ios::binary);
    ordered_json meta;
    meta["format_version"] = kCheckpointFormatVersion;
    meta["kind"] = "predictions";
    meta["config"] = run_config;
    out << meta.dump() << "\n";
    for (size_t i = 0; i < data.fragments.size(); ++i) {
      ordered_json line;
      line["id"] = data.fragments[i].id;
      line["prediction"] = predictions[i];
      line["reference"] = references[i];
      out << line.dump() << "\n";
    }
  }

  ordered_json report_json = ordered_json::parse(report.to_json());
  report_json["format_version"] = kCheckpointFormatVersion;
  report_json["config"] = run_config;

  std::printf("%-12s %7s %7s %7s %7s %7s\n", "model", "R-1", "R-2", "R-3", "R-L", "BLEU");
  auto print_row = [](const char* name, const MetricReport& r) {
    std::printf("%-12s %7.2f %7.2f %7.2f %7.2f %7.2f\n", name, 100 * r.rouge1, 100 * r.rouge2,
                100 * r.rouge3, 100 * r.rougeL, 100 * r.bleu4);
  };
  print_row("primary", report);

  if (!compare_path.empty()) {
    LoadedCheckpoint baseline = load_checkpoint(compare_path);
    if (baseline.model->vocab().hash() != data.vocab.hash())
      throw ConfigError("vocabulary hash mismatch between checkpoint \"" + compare_path +
                        "\" and corpus \"" + corpus_path + "\"");
    auto base_predictions = decode_all(*baseline.model, data.fragments, beam, max_len);
    MetricReport base_report = evaluate_all(base_predictions, references);
    print_row("baseline", base_report);

    const size_t resamples = 2000;
    ordered_json sig;
    sig["rouge1"] =
        paired_significance(report.per_rouge1, base_report.per_rouge1, resamples, bootstrap_seed);
    sig["rouge2"] =
        paired_significance(report.per_rouge2, base_report.per_rouge2, resamples, bootstrap_seed);
    sig["rouge3"] =
        paired_significance(report.per_rouge3, base_report.per_rouge3, resamples, bootstrap_seed);
    sig["rougeL"] =
        paired_significance(report.per_rougeL, base_report.per_rougeL, resamples, bootstrap_seed);
    sig["bleu4"] =
        paired_significance(report.per_bleu4, base_report.per_bleu4, resamples, bootstrap_seed);
    report_json["baseline"] = ordered_json::parse(base_report.to_json());
    report_json["significance"] = sig;
    std::printf("significance (paired bootstrap, p for primary > baseline): R-1 %s\n",
                format_double(sig["rouge1"].get<double>()).c_str());
  }

  std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
  out << report_json.dump() << "\n";
  return 0;
}

int run_generate(const std::string& model_path, const std::string& fragment_path) {
  LoadedCheckpoint loaded = load_checkpoint(model_path);
  auto fragments = load_fragments(fragment_path);
  if (fragments.empty()) throw ConfigError("fragment file \"" + fragment_path + "\" is empty");
  const DialogueFragment& fragment = fragments[0];
  if (fragment.context.size() < kMinContextUtterances)
    throw ConfigError("fragment context has " + std::to_string(fragment.context.size()) +
                      " utterances; at least " + std::to_string(kMinContextUtterances) +
                      " are required");
  auto tokens =
      loaded.model->greedy_decode(fragment, loaded.train_config.max_target_len);
  std::string line;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) line += " ";
    line += tokens[i];
  }
  std::cout << line << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"court-debate question generation toolkit"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "generate a synthetic private-loan debate corpus");
  std::string synth_out;
  size_t synth_n = 100;
  uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output corpus path (JSON lines)")->required();
  synth->add_option("--n", synth_n, "number of dialogues");
  synth->add_option("--seed", synth_seed, "generator seed");

  auto* train = app.add_subcommand("train", "train a model on a corpus");
  std::string train_corpus, train_config, train_out, train_ablation;
  train->add_option("--corpus", train_corpus, "corpus path")->required();
  train->add_option("--config", train_config, "key=value config file");
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--ablation", train_ablation,
                    "comma-separated flags: disable_intent_nav, disable_role, "
                    "disable_knowledge, disable_copy");

  auto* eval = app.add_subcommand("eval", "decode a split and score it");
  std::string eval_model, eval_corpus, eval_split = "test", eval_out = ".", eval_compare;
  size_t eval_beam = 1;
  uint64_t eval_seed = 1;
  eval->add_option("--model", eval_model, "checkpoint path")->required();
  eval->add_option("--corpus", eval_corpus, "corpus path")->required();
  eval->add_option("--split", eval_split, "train, dev or test");
  eval->add_option("--beam", eval_beam, "beam size (1 = greedy)");
  eval->add_option("--out", eval_out, "output directory for predictions and report");
  eval->add_option("--compare", eval_compare, "second checkpoint for paired significance");
  eval->add_option("--bootstrap-seed", eval_seed, "seed for the significance bootstrap");

  auto* generate = app.add_subcommand("generate", "generate the next judge question");
  std::string gen_model, gen_fragment;
  generate->add_option("--model", gen_model, "checkpoint path")->required();
  generate->add_option("--fragment", gen_fragment, "fragment file (context + optional target)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      if (synth_n < 1) {
        std::cerr << "error: --n must be >= 1\n";
        return kExitUsage;
      }
      return run_synth(synth_out, synth_n, synth_seed);
    }
    if (train->parsed()) return run_train(train_corpus, train_config, train_out, train_ablation);
    if (eval->parsed())
      return run_eval(eval_model, eval_corpus, eval_split, eval_beam, eval_out, eval_compare,
                      eval_seed);
    if (generate->parsed()) return run_generate(gen_model, gen_fragment);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
