#include "courtqg/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace courtqg {

using ordered_json = nlohmann::ordered_json;

std::string TrainConfig::to_json() const {
  ordered_json j;
  j["l2_lambda"] = l2_lambda;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["max_target_len"] = max_target_len;
  j["min_freq"] = min_freq;
  j["seed"] = seed;
  j["ablation"] = ablation.to_string();
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& json_text) {
  ordered_json j = ordered_json::parse(json_text);
  TrainConfig cfg;
  cfg.l2_lambda = j.at("l2_lambda").get<double>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.epochs = j.at("epochs").get<size_t>();
  cfg.batch_size = j.at("batch_size").get<size_t>();
  cfg.max_target_len = j.at("max_target_len").get<size_t>();
  cfg.min_freq = j.at("min_freq").get<size_t>();
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.ablation = AblationFlags::parse(j.value("ablation", ""));
  return cfg;
}

OptimizerState OptimizerState::create(const ParamSet& params) {
  OptimizerState state;
  state.accum.reserve(params.all().size());
  for (const Parameter& p : params.all())
    state.accum.emplace_back(p.node->size(), 0.0);
  return state;
}

void optimizer_step(std::vector<double>& value, const std::vector<double>& grad,
                    std::vector<double>& accum, double mu) {
  if (value.size() != grad.size() || value.size() != accum.size())
    throw DimensionError("optimizer_step: value/grad/accumulator sizes disagree");
  for (double g : grad)
    if (!std::isfinite(g))
      throw DomainError("optimizer_step: non-finite gradient, step aborted");
  for (size_t i = 0; i < value.size(); ++i) {
    accum[i] += grad[i] * grad[i];
    value[i] -= mu * grad[i] / std::sqrt(accum[i] + 1e-12);
  }
}

void optimizer_step(ParamSet& params, OptimizerState& state, double mu) {
  const auto& all = params.all();
  if (state.accum.size() != all.size())
    throw DimensionError("optimizer_step: state does not match the parameter set");
  // Validate every gradient before touching any parameter.
  for (const Parameter& p : all) {
    p.node->ensure_grad();
    for (double g : p.node->grad)
      if (!std::isfinite(g))
        throw DomainError("optimizer_step: non-finite gradient in \"" + p.name +
                          "\", step aborted");
  }
  for (size_t pi = 0; pi < all.size(); ++pi)
    optimizer_step(all[pi].node->value, all[pi].node->grad, state.accum[pi], mu);
}

Tensor l2_penalty(Tape& tape, const ParamSet& params, double lambda) {
  Tensor total = tape.constant({1}, {0.0});
  for (const Parameter& p : params.all()) {
    Tensor t = tape.use(p.node);
    total = add(total, sum(mul(t, t)));
  }
  return scale(total, lambda);
}

Tensor sequence_loss(Tape& tape, const Model& model, const PreparedFragment& prep,
                     double lambda) {
  Tensor nll = model.sequence_nll(tape, prep);
  if (lambda == 0.0) return nll;
  return add(nll, l2_penalty(tape, model.params(), lambda));
}

Trainer::Trainer(Model& model, TrainConfig cfg) : model_(model), cfg_(std::move(cfg)) {
  cfg_.validate();
}

double Trainer::mean_nll_per_token(const std::vector<PreparedFragment>& prepared) const {
  if (prepared.empty()) return 0.0;
  double total = 0.0;
  size_t tokens = 0;
  for (const PreparedFragment& prep : prepared) {
    Tape tape;
    total += model_.sequence_nll(tape, prep).value()[0];
    tokens += prep.target_ext_ids.size() + 1;  // EOS scored too
  }
  return total / static_cast<double>(tokens);
}

TrainResult Trainer::train(const std::vector<DialogueFragment>& train_fragments,
                           const std::vector<DialogueFragment>& dev_fragments,
                           const std::function<void(const EpochLog&)>& on_epoch,
                           const std::function<void(const EpochLog&)>& on_best) {
  if (train_fragments.empty()) throw ConfigError("train: empty training split");

  std::vector<PreparedFragment> train_prep;
  train_prep.reserve(train_fragments.size());
  for (const auto& f : train_fragments) train_prep.push_back(model_.prepare(f));
  std::vector<PreparedFragment> dev_prep;
  dev_prep.reserve(dev_fragments.size());
  for (const auto& f : dev_fragments) dev_prep.push_back(model_.prepare(f));

  OptimizerState opt = OptimizerState::create(model_.params());
  Rng shuffle_rng(cfg_.seed ^ 0x5deece66dull);

  TrainResult result;
  result.best_dev_nll = std::numeric_limits<double>::infinity();

  std::vector<size_t> order(train_prep.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_nll = 0.0;
    size_t epoch_tokens = 0;

    for (size_t start = 0; start < order.size() && !result.diverged;
         start += cfg_.batch_size) {
      const size_t end = std::min(order.size(), start + cfg_.batch_size);
      model_.params().zero_grads();

      for (size_t k = start; k < end; ++k) {
        const PreparedFragment& prep = train_prep[order[k]];
        Tape tape;
        Tensor nll = model_.sequence_nll(tape, prep);
        const double v = nll.value()[0];
        if (!std::isfinite(v)) {
          result.diverged = true;
          break;
        }
        epoch_nll += v;
        epoch_tokens += prep.target_ext_ids.size() + 1;
        tape.backward(nll);  // accumulates into parameter grads
      }
      if (result.diverged) break;

      // Regularizer joins once per optimization step: d(lambda*|p|^2) = 2*lambda*p.
      if (cfg_.l2_lambda != 0.0) {
        for (const Parameter& p : model_.params().all())
          for (size_t i = 0; i < p.node->size(); ++i)
            p.node->grad[i] += 2.0 * cfg_.l2_lambda * p.node->value[i];
      }
      try {
        optimizer_step(model_.params(), opt, cfg_.learning_rate);
      } catch (const DomainError&) {
        result.diverged = true;
      }
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_nll_per_token = epoch_tokens ? epoch_nll / epoch_tokens : 0.0;
    log.dev_nll_per_token = mean_nll_per_token(dev_prep);
    if (!std::isfinite(log.train_nll_per_token) || !std::isfinite(log.dev_nll_per_token))
      result.diverged = true;
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (result.diverged) break;

    const double dev_score = dev_prep.empty() ? log.train_nll_per_token : log.dev_nll_per_token;
    if (dev_score < result.best_dev_nll) {
      result.best_dev_nll = dev_score;
      result.best_epoch = epoch;
      if (on_best) on_best(log);
    }
  }
  return result;
}

// ---- checkpoints ------------------------------------------------------------

void save_checkpoint(const std::string& path, const Model& model, const TrainConfig& tcfg) {
  ordered_json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["model_config"] = ordered_json::parse(model.config().to_json());
  j["train_config"] = ordered_json::parse(tcfg.to_json());
  j["vocab"] = model.vocab().tokens();
  j["knowledge_vocab"] = model.knowledge_vocab().elements();
  j["vocab_hash"] = model.vocab().hash();
  ordered_json params = ordered_json::array();
  for (const Parameter& p : model.params().all()) {
    ordered_json pj;
    pj["name"] = p.name;
    pj["shape"] = p.node->shape;
    pj["data"] = p.node->value;
    params.push_back(std::move(pj));
  }
  j["params"] = std::move(params);

  // Write-to-temp then rename, so an interrupted save never clobbers the
  // previous checkpoint.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ParseError("cannot open \"" + tmp + "\" for writing");
    out << j.dump() << "\n";
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open \"" + path + "\" for reading");
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("corrupt checkpoint \"" + path + "\": " + e.what());
  }
  if (!j.contains("format_version"))
    throw ParseError("checkpoint \"" + path + "\" has no format_version");
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointFormatVersion)
    throw ParseError("checkpoint format version " + std::to_string(version) +
                     " unsupported (expected " + std::to_string(kCheckpointFormatVersion) + ")");

  try {
    ModelConfig mcfg = ModelConfig::from_json(j.at("model_config").dump());
    TrainConfig tcfg = TrainConfig::from_json(j.at("train_config").dump());
    Vocab vocab = Vocab::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    KnowledgeVocab kvocab =
        KnowledgeVocab::from_elements(j.at("knowledge_vocab").get<std::vector<std::string>>());

    LoadedCheckpoint loaded;
    loaded.train_config = tcfg;
    loaded.model = std::make_unique<Model>(mcfg, std::move(vocab), std::move(kvocab), 0);

    for (const auto& pj : j.at("params")) {
      const std::string name = pj.at("name").get<std::string>();
      NodePtr node = loaded.model->param(name);
      const auto shape = pj.at("shape").get<std::vector<size_t>>();
      if (shape != node->shape)
        throw ParseError("checkpoint parameter \"" + name + "\" has the wrong shape");
      auto data = pj.at("data").get<std::vector<double>>();
      if (data.size() != node->size())
        throw ParseError("checkpoint parameter \"" + name + "\" has the wrong size");
      node->value = std::move(data);
    }
    return loaded;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed checkpoint \"" + path + "\": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError("malformed checkpoint \"" + path + "\": " + e.what());
  }
}

}  // namespace courtqg
