#include "eadgen/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "eadgen/errors.hpp"
#include "eadgen/generate.hpp"
#include "eadgen/metrics.hpp"

namespace eadgen {

double nll_loss(const std::vector<int>& reference,
                const std::vector<Tensor>& distributions) {
  if (reference.size() != distributions.size()) {
    throw std::invalid_argument("nll_loss: got " +
                                std::to_string(reference.size()) +
                                " targets for " +
                                std::to_string(distributions.size()) +
                                " distributions");
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    const int id = reference[t];
    if (id < 0 || static_cast<std::size_t>(id) >= distributions[t].size()) {
      throw std::invalid_argument("nll_loss: token id out of range");
    }
    loss -= std::log(distributions[t].data[static_cast<std::size_t>(id)]);
  }
  return loss;
}

VarId teacher_forced_loss_on_tape(Tape& tape, const GeneratorModel& model,
                                  const DaIds& ids,
                                  const std::vector<int>& reference,
                                  const StepOptions& opts) {
  EncodedNodes enc = encode_on_tape(tape, model, ids);
  VarId h = tape.constant(Tensor::zeros({model.cfg.hidden_dim}));

  std::vector<int> targets = reference;
  targets.push_back(kEosId);

  std::vector<VarId> losses;
  losses.reserve(targets.size());
  int prev = kBosId;
  for (int target : targets) {
    StepNodes step = model_step_on_tape(tape, model, enc, h, prev, opts);
    losses.push_back(
        tape.neg(tape.pick(step.logprobs, static_cast<std::size_t>(target))));
    h = step.h;
    prev = target;
  }
  return tape.sum(losses);
}

namespace {

void check_train_config(const TrainConfig& cfg) {
  // lr = 0 is a valid degenerate rate: every update is exactly zero and
  // the model comes back unchanged.
  if (cfg.lr < 0.0) throw ConfigError("train: lr must be non-negative");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0) {
    throw ConfigError("train: dropout_rate must lie in [0, 1)");
  }
  if (cfg.l2_every == 0) throw ConfigError("train: l2_every must be >= 1");
  if (cfg.max_epochs == 0) throw ConfigError("train: max_epochs must be >= 1");
  if (cfg.lr_decay <= 0.0 || cfg.lr_decay > 1.0) {
    throw ConfigError("train: lr_decay must lie in (0, 1]");
  }
}

}  // namespace

double validation_loss(const GeneratorModel& model, const Corpus& corpus) {
  double total = 0.0;
  Tape tape(&model.params);  // read-only: values only, no gradients
  for (const Example& ex : corpus.examples) {
    VarId loss =
        teacher_forced_loss_on_tape(tape, model, da_ids(ex), ex.delex.tokens);
    total += tape.scalar_value(loss);
    tape.clear();
  }
  return corpus.examples.empty() ? 0.0
                                 : total / static_cast<double>(corpus.examples.size());
}

double validation_bleu(const GeneratorModel& model, const Corpus& corpus) {
  std::vector<std::vector<std::string>> hyps;
  std::vector<std::vector<std::vector<std::string>>> refs;
  for (const Corpus::Group& group : corpus.grouped()) {
    Candidate top = greedy_decode(model, group.da, model.cfg.max_len);
    hyps.push_back(tokens_to_strings(top.tokens, model.vocabs.words));
    refs.push_back(group.references);
  }
  if (hyps.empty()) return 0.0;
  return corpus_bleu(hyps, refs);
}

TrainReport train(GeneratorModel& model, const Corpus& train_corpus,
                  const Corpus& valid_corpus, const TrainConfig& cfg,
                  std::ostream* log) {
  check_train_config(cfg);
  if (train_corpus.examples.empty()) {
    throw ConfigError("train: empty training corpus");
  }
  if (valid_corpus.examples.empty()) {
    throw ConfigError("train: empty validation corpus");
  }

  const auto t_start = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  TrainReport report;
  double lr = cfg.lr;
  double best_valid = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_snapshot = model.params.snapshot();
  std::size_t stalled = 0;
  std::size_t example_counter = 0;

  std::vector<std::size_t> order(train_corpus.examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_nll = 0.0;

    for (std::size_t idx : order) {
      const Example& ex = train_corpus.examples[idx];
      Tape tape(&model.params);
      StepOptions opts;
      opts.training = true;
      opts.dropout_rate = cfg.dropout_rate;
      opts.rng = &rng;

      VarId loss =
          teacher_forced_loss_on_tape(tape, model, da_ids(ex), ex.delex.tokens, opts);
      const double nll = tape.scalar_value(loss);
      if (!std::isfinite(nll)) {
        throw NumericError("train: non-finite loss on record " +
                           std::to_string(ex.record_index) + " (" +
                           ex.da_string + ")");
      }
      epoch_nll += nll;

      ++example_counter;
      if (cfg.l2_coeff > 0.0 && example_counter % cfg.l2_every == 0) {
        loss = tape.sum({loss, tape.l2_penalty(cfg.l2_coeff)});
      }
      tape.backward(loss);
      model.params.clip_gradients(cfg.clip_norm);
      model.params.sgd_step(lr);
    }

    EpochStats stats;
    stats.lr = lr;
    stats.train_loss = epoch_nll / static_cast<double>(order.size());
    stats.valid_loss = validation_loss(model, valid_corpus);
    stats.valid_bleu = validation_bleu(model, valid_corpus);
    report.epochs.push_back(stats);
    if (log) {
      (*log) << "epoch " << (epoch + 1) << ": train " << stats.train_loss
             << "  valid " << stats.valid_loss << "  bleu " << stats.valid_bleu
             << "  lr " << lr << "\n";
    }

    if (stats.valid_loss < best_valid) {
      best_valid = stats.valid_loss;
      best_snapshot = model.params.snapshot();
      report.best_epoch = epoch;
      report.best_valid_loss = stats.valid_loss;
      report.best_valid_bleu = stats.valid_bleu;
      stalled = 0;
    } else {
      ++stalled;
      lr *= cfg.lr_decay;
      if (stalled >= cfg.patience) {
        report.stopped_early = true;
        break;
      }
    }
  }

  model.params.restore(best_snapshot);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

std::unique_ptr<GeneratorModel> multi_restart(const ModelConfig& model_cfg,
                                              const Corpus& train_corpus,
                                              const Corpus& valid_corpus,
                                              const TrainConfig& cfg,
                                              MultiRestartReport* out,
                                              std::ostream* log) {
  if (cfg.restarts == 0) throw ConfigError("multi_restart: restarts must be >= 1");
  const std::size_t n = cfg.restarts;

  std::vector<std::unique_ptr<GeneratorModel>> models(n);
  std::vector<TrainReport> reports(n);
  std::vector<std::exception_ptr> failures(n);

  // One independently seeded model per thread; each run is sequential
  // inside (per-sentence SGD is order-dependent, the seed pins the order).
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i]() {
      try {
        const std::uint64_t seed = cfg.seed + i;
        TrainConfig run_cfg = cfg;
        run_cfg.seed = seed;
        auto model = std::make_unique<GeneratorModel>(
            model_cfg, train_corpus.vocabs, seed);
        reports[i] = train(*model, train_corpus, valid_corpus, run_cfg);
        models[i] = std::move(model);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : failures) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t best = 0;
  double mean_bleu = 0.0;
  double mean_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_bleu += reports[i].best_valid_bleu;
    mean_loss += reports[i].best_valid_loss;
    if (reports[i].best_valid_bleu > reports[best].best_valid_bleu) best = i;
    if (log) {
      (*log) << "restart " << i << " (seed " << (cfg.seed + i) << "): valid bleu "
             << reports[i].best_valid_bleu << ", valid loss "
             << reports[i].best_valid_loss << "\n";
    }
  }

  if (out) {
    out->runs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      out->runs.push_back({cfg.seed + i, std::move(reports[i])});
    }
    out->best_index = best;
    out->mean_valid_bleu = mean_bleu / static_cast<double>(n);
    out->mean_valid_loss = mean_loss / static_cast<double>(n);
  }
  return std::move(models[best]);
}

}  // namespace eadgen
