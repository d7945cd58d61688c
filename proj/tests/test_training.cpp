#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eadgen/corpus.hpp"
#include "eadgen/decoder.hpp"
#include "eadgen/diagnostics.hpp"
#include "eadgen/errors.hpp"
#include "eadgen/model.hpp"
#include "eadgen/train.hpp"

using namespace eadgen;

namespace {

ModelConfig tiny_model_cfg() {
  ModelConfig cfg;
  cfg.embed_dim = 6;
  cfg.act_dim = 4;
  cfg.hidden_dim = 10;
  cfg.refiner = Refiner::AroaM;
  cfg.max_len = 20;
  return cfg;
}

Corpus one_liner_corpus() {
  return load_dataset_text(
      R"j([["inform(name='Alfredo')", "Alfredo is very nice ."]])j",
      "inline");
}

Corpus toy_corpus(std::size_t records, std::uint64_t seed) {
  return load_dataset_text(toy_dataset_json(records, seed), "toy");
}

double param_sq_norm(const ParamStore& params) {
  double acc = 0.0;
  for (const Param& p : params.all())
    for (double v : p.value.data) acc += v * v;
  return acc;
}

bool params_equal(const ParamStore& a, const ParamStore& b) {
  if (a.count() != b.count()) return false;
  for (std::size_t i = 0; i < a.count(); ++i)
    if (a.at(i).value.data != b.at(i).value.data) return false;
  return true;
}

}  // namespace

TEST_CASE("nll_loss") {
  SUBCASE("one-hot distributions cost nothing") {
    Tensor d0 = Tensor::zeros({4});
    d0[2] = 1.0;
    Tensor d1 = Tensor::zeros({4});
    d1[0] = 1.0;
    CHECK(nll_loss({2, 0}, {d0, d1}) == 0.0);
  }

  SUBCASE("uniform distributions cost T log V") {
    const std::size_t V = 7, T = 3;
    Tensor u = Tensor::zeros({V});
    u.fill(1.0 / static_cast<double>(V));
    std::vector<Tensor> dists(T, u);
    CHECK(nll_loss({0, 3, 6}, dists) ==
          doctest::Approx(static_cast<double>(T) * std::log(7.0))
              .epsilon(1e-12));
  }

  SUBCASE("three-token case against the hand sum") {
    Tensor d0 = Tensor::of({0.2, 0.5, 0.3});
    Tensor d1 = Tensor::of({0.25, 0.25, 0.5});
    Tensor d2 = Tensor::of({0.1, 0.8, 0.1});
    // -(ln 0.5 + ln 0.25 + ln 0.1) = ln 2 + ln 4 + ln 10 = ln 80
    CHECK(nll_loss({1, 0, 2}, {d0, d1, d2}) ==
          doctest::Approx(std::log(80.0)).epsilon(1e-12));
  }

  SUBCASE("length mismatch and bad ids are rejected") {
    Tensor u = Tensor::of({0.5, 0.5});
    CHECK_THROWS_AS(nll_loss({0, 1}, {u}), std::invalid_argument);
    CHECK_THROWS_AS(nll_loss({2}, {u}), std::invalid_argument);
    CHECK_THROWS_AS(nll_loss({-1}, {u}), std::invalid_argument);
  }
}

TEST_CASE("teacher-forced loss agrees with step-by-step decoding") {
  Corpus corpus = toy_corpus(8, 21);
  REQUIRE(!corpus.examples.empty());
  GeneratorModel model(tiny_model_cfg(), corpus.vocabs, 99);
  const Example& ex = corpus.examples[0];

  Tape tape(&model.params);
  const double tape_loss =
      tape.scalar_value(teacher_forced_loss_on_tape(tape, model, da_ids(ex),
                                                    ex.delex.tokens));

  // Same computation through the generation-side session, forcing the
  // reference token at every step.
  std::vector<int> targets = ex.delex.tokens;
  targets.push_back(kEosId);
  DecoderSession session(model, ex.da);
  DecodeState state{session.initial_state()};
  double stepped = 0.0;
  std::vector<Tensor> dists;
  for (int target : targets) {
    StepResult r = step_token(session, state, StepMode::Forced, target);
    stepped -= r.logprob;
    DecoderSession::Step probe = session.advance(state.h, state.prev_token);
    Tensor p = probe.logprobs;
    for (double& v : p.data) v = std::exp(v);
    dists.push_back(std::move(p));
    state = r.state;
  }
  CHECK(tape_loss == doctest::Approx(stepped).epsilon(1e-12));

  // And through the plain-distribution utility.
  CHECK(nll_loss(targets, dists) ==
        doctest::Approx(tape_loss).epsilon(1e-9));

  // A one-example corpus averages to exactly that sentence's loss.
  Corpus single;
  single.vocabs = corpus.vocabs;
  single.examples.push_back(ex);
  single.record_count = 1;
  CHECK(validation_loss(model, single) ==
        doctest::Approx(tape_loss).epsilon(1e-12));
}

TEST_CASE("loss gradient with the periodic penalty matches finite differences") {
  // Same fixture as the gradient suite, with the squared-norm term added.
  // The reference side runs in extended precision so the comparison floor
  // is not dominated by cancellation in f(x+h) - f(x-h).
  GradSuiteConfig gcfg;
  const double coeff = 0.01;
  ModelConfig mc;
  mc.embed_dim = gcfg.embed_dim;
  mc.act_dim = gcfg.act_dim;
  mc.hidden_dim = gcfg.hidden_dim;
  mc.refiner = Refiner::AroaM;
  CorpusVocabs vocabs = synthetic_vocabs(gcfg.word_vocab);
  GeneratorModel model(mc, vocabs, gcfg.seed);
  DaIds ids;
  std::vector<int> sentence;
  suite_fixture(gcfg, vocabs, &ids, &sentence);

  Tape tape(&model.params);
  VarId data_loss = teacher_forced_loss_on_tape(tape, model, ids, sentence);
  VarId full = tape.sum({data_loss, tape.l2_penalty(coeff)});
  model.params.zero_grads();
  tape.backward(full);

  long double base_sq = 0.0L;
  for (const Param& p : model.params.all())
    for (double v : p.value.data)
      base_sq += static_cast<long double>(v) * static_cast<long double>(v);

  double worst = 0.0;
  for (Param& p : model.params.all()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data[i];
      const double hi = saved + gcfg.h;
      const double lo = saved - gcfg.h;
      const long double sv = static_cast<long double>(saved);

      p.value.data[i] = hi;
      long double up = reference_sentence_loss(model, ids, sentence) +
                       coeff * (base_sq - sv * sv +
                                static_cast<long double>(hi) *
                                    static_cast<long double>(hi));
      p.value.data[i] = lo;
      long double down = reference_sentence_loss(model, ids, sentence) +
                         coeff * (base_sq - sv * sv +
                                  static_cast<long double>(lo) *
                                      static_cast<long double>(lo));
      p.value.data[i] = saved;

      const double cd = static_cast<double>((up - down) / (hi - lo));
      const double a = p.grad.data[i];
      const double rel = std::abs(a - cd) /
                         std::max({std::abs(a), std::abs(cd), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("one example is memorized") {
  Corpus corpus = one_liner_corpus();
  // Full-width model: the small test dimensions underfit and oscillate at
  // this rate, which is not what this case is about.
  ModelConfig mc;
  mc.max_len = 20;
  GeneratorModel model(mc, corpus.vocabs, 3);
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.dropout_rate = 0.0;
  cfg.l2_coeff = 0.0;
  cfg.max_epochs = 200;
  cfg.patience = 200;
  cfg.seed = 5;

  TrainReport report = train(model, corpus, corpus, cfg);
  REQUIRE(report.epochs.size() >= 6);
  const std::vector<EpochStats>& ep = report.epochs;

  // The post-warm-up descent runs essentially monotone down to the
  // memorization threshold. At a 0.1 rate the trajectory crosses one rough
  // patch (around a loss of 5-8) where an update can overshoot, so a
  // handful of small upticks are tolerated; past the threshold the loss
  // may jitter at machine noise but never climbs back out.
  std::size_t memorized_at = ep.size();
  for (std::size_t e = 0; e < ep.size(); ++e) {
    if (ep[e].train_loss < 0.05) {
      memorized_at = e;
      break;
    }
  }
  REQUIRE(memorized_at < ep.size());
  int upticks = 0;
  for (std::size_t e = 6; e <= memorized_at; ++e) {
    const double prev = ep[e - 1].train_loss;
    const double cur = ep[e].train_loss;
    if (cur >= prev) {
      ++upticks;
      CHECK(cur < prev * 1.10);  // never more than a 10% overshoot
    }
  }
  CHECK(upticks <= 3);
  for (std::size_t e = memorized_at; e < ep.size(); ++e)
    CHECK(ep[e].train_loss < 0.05);
  CHECK(ep.back().train_loss < 0.05);
}

TEST_CASE("a zero learning rate leaves the model untouched") {
  Corpus corpus = toy_corpus(6, 31);
  GeneratorModel model(tiny_model_cfg(), corpus.vocabs, 8);
  const std::vector<Tensor> before = model.params.snapshot();

  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.max_epochs = 3;
  cfg.patience = 10;
  cfg.seed = 2;
  TrainReport report = train(model, corpus, corpus, cfg);
  CHECK(report.epochs.size() == 3);

  const std::vector<Tensor> after = model.params.snapshot();
  REQUIRE(after.size() == before.size());
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(after[i].data == before[i].data);

  cfg.lr = -0.1;
  CHECK_THROWS_AS(train(model, corpus, corpus, cfg), ConfigError);
}

TEST_CASE("invalid training configurations are rejected") {
  Corpus corpus = toy_corpus(4, 41);
  GeneratorModel model(tiny_model_cfg(), corpus.vocabs, 8);
  TrainConfig good;
  good.max_epochs = 1;

  auto expect_config_error = [&](void (*tweak)(TrainConfig&)) {
    TrainConfig bad = good;
    tweak(bad);
    CHECK_THROWS_AS(train(model, corpus, corpus, bad), ConfigError);
  };
  expect_config_error([](TrainConfig& c) { c.dropout_rate = 1.0; });
  expect_config_error([](TrainConfig& c) { c.dropout_rate = -0.2; });
  expect_config_error([](TrainConfig& c) { c.l2_every = 0; });
  expect_config_error([](TrainConfig& c) { c.max_epochs = 0; });
  expect_config_error([](TrainConfig& c) { c.lr_decay = 0.0; });
  expect_config_error([](TrainConfig& c) { c.lr_decay = 1.5; });

  Corpus empty;
  empty.vocabs = corpus.vocabs;
  CHECK_THROWS_AS(train(model, empty, corpus, good), ConfigError);
  CHECK_THROWS_AS(train(model, corpus, empty, good), ConfigError);
}

TEST_CASE("one small SGD step decreases the stepped example's loss") {
  Corpus corpus = toy_corpus(25, 77);
  REQUIRE(corpus.examples.size() >= 20);
  GeneratorModel model(tiny_model_cfg(), corpus.vocabs, 12);

  int violations = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const Example& ex = corpus.examples[i];
    const std::vector<Tensor> saved = model.params.snapshot();

    Tape tape(&model.params);
    VarId loss =
        teacher_forced_loss_on_tape(tape, model, da_ids(ex), ex.delex.tokens);
    const double before = tape.scalar_value(loss);
    model.params.zero_grads();
    tape.backward(loss);
    model.params.clip_gradients(5.0);
    model.params.sgd_step(1e-4);

    Tape after_tape(&model.params);
    const double after = after_tape.scalar_value(
        teacher_forced_loss_on_tape(after_tape, model, da_ids(ex),
                                    ex.delex.tokens));
    if (!(after < before)) ++violations;
    model.params.restore(saved);
  }
  CHECK(violations <= 1);
}

TEST_CASE("a heavy penalty shrinks the parameter norm") {
  Corpus corpus = toy_corpus(20, 55);
  ModelConfig mc = tiny_model_cfg();
  mc.init_range = 0.4;  // start with some weight to decay
  GeneratorModel model(mc, corpus.vocabs, 14);

  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.l2_coeff = 1.0;
  cfg.dropout_rate = 0.0;
  cfg.max_epochs = 1;
  cfg.patience = 10;
  cfg.seed = 6;

  // train() hands back the end-of-best-epoch snapshot, so with one epoch
  // per call the runs chain together.
  double norm = param_sq_norm(model.params);
  for (int epoch = 0; epoch < 4; ++epoch) {
    train(model, corpus, corpus, cfg);
    const double next = param_sq_norm(model.params);
    CHECK(next < norm);
    norm = next;
  }
}

TEST_CASE("validation drives decay, stopping and the returned snapshot") {
  Corpus full = toy_corpus(40, 67);
  DataSplits splits = split_corpus(full, 9);
  GeneratorModel model(tiny_model_cfg(), splits.train.vocabs, 20);

  TrainConfig cfg;
  cfg.lr = 0.2;
  cfg.dropout_rate = 0.3;
  cfg.patience = 3;
  cfg.max_epochs = 30;
  cfg.seed = 4;

  std::ostringstream log;
  TrainReport report = train(model, splits.train, splits.valid, cfg, &log);
  REQUIRE(!report.epochs.empty());
  CHECK(report.best_epoch < report.epochs.size());
  CHECK(!log.str().empty());

  // The reported best is the running minimum of the validation curve.
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_at = 0;
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    if (report.epochs[e].valid_loss < best) {
      best = report.epochs[e].valid_loss;
      best_at = e;
    }
  }
  CHECK(report.best_epoch == best_at);
  CHECK(report.best_valid_loss == best);
  CHECK(report.best_valid_bleu == report.epochs[best_at].valid_bleu);

  // The learning rate halves exactly on the non-improving epochs.
  double expect_lr = cfg.lr;
  double running = std::numeric_limits<double>::infinity();
  for (const EpochStats& stats : report.epochs) {
    CHECK(stats.lr == expect_lr);
    if (stats.valid_loss < running) {
      running = stats.valid_loss;
    } else {
      expect_lr *= cfg.lr_decay;
    }
  }

  if (report.stopped_early) {
    CHECK(report.epochs.size() < cfg.max_epochs);
    // The tail that triggered the stop never improved on the best.
    REQUIRE(report.epochs.size() >= cfg.patience);
    for (std::size_t e = report.epochs.size() - cfg.patience;
         e < report.epochs.size(); ++e)
      CHECK(report.epochs[e].valid_loss >= report.best_valid_loss);
  }

  // The model that comes back reproduces the best epoch's validation loss:
  // the snapshot restore really rewinds the parameters.
  CHECK(validation_loss(model, splits.valid) ==
        doctest::Approx(report.best_valid_loss).epsilon(1e-12));
}

TEST_CASE("a non-finite loss aborts with the offending record") {
  Corpus corpus = toy_corpus(5, 91);
  GeneratorModel model(tiny_model_cfg(), corpus.vocabs, 8);
  model.params.at("dec.output").value.data[0] =
      std::numeric_limits<double>::quiet_NaN();

  TrainConfig cfg;
  cfg.max_epochs = 1;
  try {
    train(model, corpus, corpus, cfg);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("record") != std::string::npos);
    // Any training record may come first under the shuffle; the message
    // must carry some real DA from the corpus.
    bool names_da = false;
    for (const Example& ex : corpus.examples)
      if (msg.find(ex.da_string) != std::string::npos) names_da = true;
    CHECK(names_da);
  }
}

TEST_CASE("multi-restart") {
  Corpus full = toy_corpus(30, 101);
  DataSplits splits = split_corpus(full, 17);
  ModelConfig mc = tiny_model_cfg();

  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.dropout_rate = 0.0;
  cfg.max_epochs = 4;
  cfg.patience = 10;
  cfg.seed = 40;

  SUBCASE("zero restarts is a configuration error") {
    TrainConfig bad = cfg;
    bad.restarts = 0;
    CHECK_THROWS_AS(multi_restart(mc, splits.train, splits.valid, bad),
                    ConfigError);
  }

  SUBCASE("one restart reproduces a plain training run") {
    TrainConfig one = cfg;
    one.restarts = 1;
    MultiRestartReport mr;
    auto picked = multi_restart(mc, splits.train, splits.valid, one, &mr);
    REQUIRE(picked);
    REQUIRE(mr.runs.size() == 1);
    CHECK(mr.best_index == 0);
    CHECK(mr.runs[0].seed == one.seed);

    GeneratorModel reference(mc, splits.train.vocabs, one.seed);
    TrainReport ref_report = train(reference, splits.train, splits.valid, one);
    CHECK(params_equal(picked->params, reference.params));
    CHECK(mr.runs[0].report.best_valid_loss == ref_report.best_valid_loss);
    CHECK(mr.runs[0].report.best_valid_bleu == ref_report.best_valid_bleu);
    CHECK(mr.mean_valid_bleu == ref_report.best_valid_bleu);
    CHECK(mr.mean_valid_loss == ref_report.best_valid_loss);
  }

  SUBCASE("selection takes the highest validation BLEU and reports means") {
    TrainConfig three = cfg;
    three.restarts = 3;
    MultiRestartReport mr;
    std::ostringstream log;
    auto picked = multi_restart(mc, splits.train, splits.valid, three, &mr,
                                &log);
    REQUIRE(picked);
    REQUIRE(mr.runs.size() == 3);
    CHECK(!log.str().empty());

    double sum_bleu = 0.0, sum_loss = 0.0;
    for (std::size_t i = 0; i < mr.runs.size(); ++i) {
      CHECK(mr.runs[i].seed == three.seed + i);
      sum_bleu += mr.runs[i].report.best_valid_bleu;
      sum_loss += mr.runs[i].report.best_valid_loss;
      CHECK(mr.runs[i].report.best_valid_bleu <=
            mr.runs[mr.best_index].report.best_valid_bleu);
    }
    CHECK(mr.mean_valid_bleu == sum_bleu / 3.0);
    CHECK(mr.mean_valid_loss == sum_loss / 3.0);

    // The returned model really is the winning run's snapshot.
    CHECK(validation_bleu(*picked, splits.valid) ==
          doctest::Approx(mr.runs[mr.best_index].report.best_valid_bleu)
              .epsilon(1e-12));
  }

  SUBCASE("a run left at initialization loses to a trained one") {
    GeneratorModel crippled(mc, splits.train.vocabs, cfg.seed);
    TrainConfig frozen = cfg;
    frozen.lr = 0.0;
    frozen.max_epochs = 2;
    TrainReport crippled_report =
        train(crippled, splits.train, splits.valid, frozen);

    GeneratorModel trained(mc, splits.train.vocabs, cfg.seed);
    TrainConfig active = cfg;
    active.max_epochs = 8;
    TrainReport trained_report =
        train(trained, splits.train, splits.valid, active);

    CHECK(trained_report.best_valid_bleu > crippled_report.best_valid_bleu);
    // Under the selection rule the trained run wins.
    const std::size_t selected =
        trained_report.best_valid_bleu > crippled_report.best_valid_bleu ? 1
                                                                         : 0;
    CHECK(selected == 1);
  }
}
