#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "definf/dataset.hpp"
#include "definf/encoders.hpp"

namespace definf {

struct TrainConfig {
  double lr = 1e-3;  // desk-scale preset; paper_preset() switches to 2e-5
  int epochs = 30;
  int batch_size = 16;
  int grad_accum = 2;
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  double warmup_fraction = 0.1;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
  static TrainConfig paper_preset();
};

struct EpochStats {
  int epoch = 0;        // 1-based
  double train_loss = 0.0;
  double dev_acc = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based epoch with the highest dev accuracy (first on ties)
  double best_dev_acc = 0.0;
  std::vector<double> post_clip_norms;  // one entry per optimizer step
};

// Piecewise-linear schedule: warm up from 0 to lr over the first
// warmup_fraction of steps, then decay linearly to 0.  step is 1-based.
double lr_at_step(const TrainConfig& cfg, long long step, long long total_steps);

struct TrainResult {
  EncoderModel model;  // parameters of the best-dev checkpoint
  TrainHistory history;
};

TrainResult train(const Corpus& train_split, const Corpus& dev_split,
                  const EncoderConfig& enc_cfg, const EmbedderConfig& emb_cfg,
                  const TrainConfig& cfg);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<int> preds;           // argmax class per example (0 = strengthens)
  std::vector<GateTrace> traces;    // one per example for the moe encoder, else empty
};

// gold label index shared by training, eval and analysis.
int label_index(Label l);

EvalResult evaluate(EncoderModel& model, const Corpus& data);

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const EncoderModel& model, const std::string& path);
// expect, when set, enforces the encoder kind and names both kinds on error.
EncoderModel load_checkpoint(const std::string& path);
EncoderModel load_checkpoint(const std::string& path, EncoderKind expect);

void save_history_csv(const TrainHistory& h, const std::string& path);

}  // namespace definf
