#ifndef COURTQG_TRAIN_HPP
#define COURTQG_TRAIN_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "courtqg/model.hpp"

namespace courtqg {

struct TrainConfig {
  double l2_lambda = 1e-5;     // weight of the squared-norm regularizer
  double learning_rate = 0.1;  // initial learning rate of the accumulator rule
  size_t epochs = 30;
  size_t batch_size = 8;
  size_t max_target_len = 30;
  size_t min_freq = 1;  // vocabulary frequency threshold
  uint64_t seed = 1;
  AblationFlags ablation;

  std::string to_json() const;
  static TrainConfig from_json(const std::string& json_text);

  void validate() const {
    if (l2_lambda < 0) throw ConfigError("l2_lambda must be >= 0");
    if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_target_len < 1) throw ConfigError("max_target_len must be >= 1");
  }
};

// Per-parameter running sums of squared sub-gradients. The accumulator only
// grows, so the effective step size mu/sqrt(G) never increases.
struct OptimizerState {
  std::vector<std::vector<double>> accum;  // aligned with ParamSet order

  static OptimizerState create(const ParamSet& params);
};

// Elementwise: G += g^2; value -= mu * g / sqrt(G + 1e-12). The epsilon under
// the root keeps the zero-gradient first step well defined (no update).
// Throws DomainError on non-finite gradients without touching any value.
void optimizer_step(std::vector<double>& value, const std::vector<double>& grad,
                    std::vector<double>& accum, double mu);

// Applies the rule to every parameter, reading gradients off the nodes.
void optimizer_step(ParamSet& params, OptimizerState& state, double mu);

// lambda * sum over parameters of the squared L2 norm, as a graph node.
Tensor l2_penalty(Tape& tape, const ParamSet& params, double lambda);

// Teacher-forced NLL plus the regularizer, in one graph. The regularizer
// belongs to the optimization step, not the token loop, so batched training
// adds it once per step (see Trainer); this single-fragment form is the
// gradient-check surface.
Tensor sequence_loss(Tape& tape, const Model& model, const PreparedFragment& prep,
                     double lambda);

struct EpochLog {
  size_t epoch = 0;
  double train_nll_per_token = 0.0;
  double dev_nll_per_token = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  size_t best_epoch = 0;
  double best_dev_nll = 0.0;
  bool diverged = false;
};

// Batched training with gradient accumulation: fragments of a batch are
// processed sequentially onto the same parameter gradients, the L2 gradient
// 2*lambda*value is added once, then one optimizer step runs. Shuffling is
// seeded; identical configs give identical runs.
class Trainer {
 public:
  Trainer(Model& model, TrainConfig cfg);

  // on_epoch fires after every epoch; on_best fires whenever the dev NLL
  // improves (checkpoint hook). Dev NLL of an empty dev set is 0.
  TrainResult train(const std::vector<DialogueFragment>& train_fragments,
                    const std::vector<DialogueFragment>& dev_fragments,
                    const std::function<void(const EpochLog&)>& on_epoch = {},
                    const std::function<void(const EpochLog&)>& on_best = {});

  // Mean teacher-forced NLL per target token (EOS counted).
  double mean_nll_per_token(const std::vector<PreparedFragment>& prepared) const;

 private:
  Model& model_;
  TrainConfig cfg_;
};

// ---- checkpoints ------------------------------------------------------------
// Single JSON document holding format version, model/train configs, both
// vocabularies, and all parameter tensors. save -> load -> save is
// byte-identical.

constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const std::string& path, const Model& model, const TrainConfig& tcfg);

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  TrainConfig train_config;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace courtqg

#endif  // COURTQG_TRAIN_HPP
