#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "eadgen/corpus.hpp"
#include "eadgen/decoder.hpp"
#include "eadgen/model.hpp"

namespace eadgen {

struct TrainConfig {
  double lr = 0.1;
  double lr_decay = 0.5;    // applied when validation loss stalls
  double l2_coeff = 1e-4;
  std::size_t l2_every = 10;  // add the L2 term on every n-th example
  double dropout_rate = 0.3;
  std::size_t patience = 10;  // stalled epochs before stopping
  std::size_t max_epochs = 300;
  std::uint64_t seed = 1;
  std::size_t restarts = 5;
  double clip_norm = 5.0;  // global gradient-norm ceiling
};

// Plain-cross-entropy utility over already-computed distributions:
// F = -sum_t log p_t[reference_t]. Lengths must match.
double nll_loss(const std::vector<int>& reference,
                const std::vector<Tensor>& distributions);

// Teacher-forced sentence loss on a tape: inputs are BOS followed by the
// reference, targets are the reference followed by EOS.
VarId teacher_forced_loss_on_tape(Tape& tape, const GeneratorModel& model,
                                  const DaIds& ids,
                                  const std::vector<int>& reference,
                                  const StepOptions& opts = {});

struct EpochStats {
  double train_loss = 0.0;  // mean per-sentence NLL (without the L2 term)
  double valid_loss = 0.0;
  double valid_bleu = 0.0;
  double lr = 0.0;  // rate in force during the epoch
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;  // index into epochs
  double best_valid_loss = 0.0;
  double best_valid_bleu = 0.0;
  double wall_seconds = 0.0;
  bool stopped_early = false;
};

// Per-sentence SGD with backpropagation through the whole unrolled step
// sequence, periodic L2, gradient clipping, validation-driven lr decay and
// early stopping. The model ends at its best-validation-loss snapshot.
TrainReport train(GeneratorModel& model, const Corpus& train_corpus,
                  const Corpus& valid_corpus, const TrainConfig& cfg,
                  std::ostream* log = nullptr);

double validation_loss(const GeneratorModel& model, const Corpus& corpus);
double validation_bleu(const GeneratorModel& model, const Corpus& corpus);

struct RestartResult {
  std::uint64_t seed = 0;
  TrainReport report;
};

struct MultiRestartReport {
  std::vector<RestartResult> runs;
  std::size_t best_index = 0;  // highest validation BLEU
  double mean_valid_bleu = 0.0;
  double mean_valid_loss = 0.0;
};

// Trains `restarts` models from seeds cfg.seed, cfg.seed+1, ... in
// parallel and keeps the one with the highest validation BLEU; per-run and
// mean statistics go to `out`.
std::unique_ptr<GeneratorModel> multi_restart(const ModelConfig& model_cfg,
                                              const Corpus& train_corpus,
                                              const Corpus& valid_corpus,
                                              const TrainConfig& cfg,
                                              MultiRestartReport* out = nullptr,
                                              std::ostream* log = nullptr);

}  // namespace eadgen
