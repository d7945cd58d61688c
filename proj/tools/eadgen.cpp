#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eadgen/checkpoint.hpp"
#include "eadgen/config.hpp"
#include "eadgen/corpus.hpp"
#include "eadgen/diagnostics.hpp"
#include "eadgen/errors.hpp"
#include "eadgen/generate.hpp"
#include "eadgen/metrics.hpp"
#include "eadgen/train.hpp"

namespace {

using namespace eadgen;

// exit codes: 0 ok, 1 usage, 2 data, 3 numeric
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct Cli {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string data_path;
  std::string ckpt_path;
  std::string out_path;
  std::string report_path;
  std::string da_string;
  std::string split = "test";
  std::string refiner = "all";
  std::size_t n = 5;
  std::size_t records = 200;
  std::uint64_t seed = 7;
  double h = 1e-5;
  double tol = 1e-4;
  bool lexicalize = false;
  bool greedy = false;
  bool quiet = false;
};

AppConfig build_config(const Cli& cli, const std::string& echo_json) {
  AppConfig cfg;
  if (!echo_json.empty()) {
    // Checkpoints carry the config they were trained with; start there.
    nlohmann::json j = nlohmann::json::parse(echo_json, nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
      for (const auto& [key, value] : j.items()) {
        if (value.is_string()) {
          apply_override(cfg, key + "=" + value.get<std::string>());
        }
      }
    }
  }
  if (!cli.config_path.empty()) cfg = load_config_file(cli.config_path, cfg);
  for (const std::string& assignment : cli.overrides) {
    apply_override(cfg, assignment);
  }
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

int cmd_make_toy(const Cli& cli) {
  write_text(cli.out_path, toy_dataset_json(cli.records, cli.seed));
  if (!cli.out_path.empty() && cli.out_path != "-") {
    std::cout << "wrote toy dataset to " << cli.out_path << "\n";
  }
  return kExitOk;
}

int cmd_train(const Cli& cli) {
  AppConfig cfg = build_config(cli, "");
  Corpus full = load_dataset(cli.data_path);
  DataSplits splits = split_corpus(full, cfg.train.seed);
  std::cout << "data: " << splits.train.examples.size() << " train / "
            << splits.valid.examples.size() << " valid / "
            << splits.test.examples.size() << " test examples, "
            << splits.train.vocabs.words.size() << " word types\n";

  MultiRestartReport runs;
  std::ostream* log = cli.quiet ? nullptr : &std::cout;
  std::unique_ptr<GeneratorModel> model = multi_restart(
      cfg.model, splits.train, splits.valid, cfg.train, &runs, log);

  const TrainReport& best = runs.runs[runs.best_index].report;
  std::cout << "best restart: seed " << runs.runs[runs.best_index].seed
            << ", valid bleu " << best.best_valid_bleu << ", valid loss "
            << best.best_valid_loss << " (epoch " << (best.best_epoch + 1)
            << ")\n";
  std::cout << "mean over " << runs.runs.size() << " restarts: valid bleu "
            << runs.mean_valid_bleu << ", valid loss " << runs.mean_valid_loss
            << "\n";

  save_checkpoint(cli.out_path, *model, config_to_json(cfg));
  std::cout << "checkpoint: " << cli.out_path << "\n";
  return kExitOk;
}

int cmd_generate(const Cli& cli) {
  Checkpoint ckpt = load_checkpoint(cli.ckpt_path);
  AppConfig cfg = build_config(cli, ckpt.config_echo);
  cfg.beam.topk = cli.n;
  if (cfg.beam.overgen < cfg.beam.topk) cfg.beam.overgen = cfg.beam.topk;

  const DialogueAct da = canonical_order(parse_da(cli.da_string));
  std::vector<Candidate> picked =
      rerank(beam_search(*ckpt.model, da, cfg.beam), cfg.beam);

  std::printf("%-3s %-10s %-10s %-7s %s\n", "#", "R", "nll", "err",
              "utterance");
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const Candidate& c = picked[i];
    std::string text =
        join_tokens(tokens_to_strings(c.tokens, ckpt.model->vocabs.words));
    if (cli.lexicalize) text = lexicalize_text(text, da);
    std::printf("%-3zu %-10.4f %-10.4f %-7.3f %s\n", i + 1, c.score, c.nll,
                c.err, text.c_str());
  }
  return kExitOk;
}

int cmd_evaluate(const Cli& cli) {
  Checkpoint ckpt = load_checkpoint(cli.ckpt_path);
  AppConfig cfg = build_config(cli, ckpt.config_echo);

  Corpus full = load_dataset(cli.data_path);
  DataSplits splits = split_corpus(full, cfg.train.seed);
  const Corpus* corpus = nullptr;
  if (cli.split == "train") {
    corpus = &splits.train;
  } else if (cli.split == "valid") {
    corpus = &splits.valid;
  } else if (cli.split == "test") {
    corpus = &splits.test;
  } else if (cli.split == "all") {
    corpus = &full;
  } else {
    throw ConfigError("unknown split '" + cli.split +
                      "' (train, valid, test or all)");
  }

  EvalOptions opts;
  opts.beam = cfg.beam;
  opts.greedy = cli.greedy;
  opts.lexicalized = cli.lexicalize;
  EvalReport report = evaluate_corpus(*ckpt.model, *corpus, opts);
  report.config_echo = config_to_json(cfg);
  write_text(cli.report_path, format_report(report));
  if (!cli.report_path.empty() && cli.report_path != "-") {
    std::cout << "BLEU " << report.bleu << "  ERR% " << report.err.percent()
              << "  -> " << cli.report_path << "\n";
  }
  return kExitOk;
}

int cmd_gradcheck(const Cli& cli) {
  GradSuiteConfig suite;
  suite.seed = cli.seed;
  suite.h = cli.h;
  std::vector<Refiner> variants;
  if (cli.refiner == "all") {
    variants.assign(std::begin(kAllRefiners), std::end(kAllRefiners));
  } else {
    variants.push_back(refiner_from_name(cli.refiner));
  }

  bool ok = true;
  for (const GradSuiteResult& r : run_gradient_suite(suite, variants)) {
    const bool pass = r.report.max_rel_error < cli.tol;
    ok = ok && pass;
    std::printf("%-9s max rel err %.3e (worst %s[%zu]: analytic %.6e vs fd %.6e)  %s\n",
                refiner_name(r.refiner).c_str(), r.report.max_rel_error,
                r.report.worst_param.c_str(), r.report.worst_index,
                r.report.worst_analytic, r.report.worst_numeric,
                pass ? "ok" : "FAIL");
  }
  if (!ok) throw NumericError("gradient check failed (tolerance " +
                              std::to_string(cli.tol) + ")");
  return kExitOk;
}

int cmd_inspect(const Cli& cli) {
  Checkpoint ckpt = load_checkpoint(cli.ckpt_path);
  const GeneratorModel& m = *ckpt.model;
  std::cout << "seed: " << ckpt.seed << "\n";
  std::cout << "refiner: " << refiner_name(m.cfg.refiner) << "\n";
  std::cout << "dims: embed " << m.cfg.embed_dim << ", act " << m.cfg.act_dim
            << ", hidden " << m.cfg.hidden_dim << ", max_len " << m.cfg.max_len
            << "\n";
  std::cout << "vocabs: " << m.vocabs.words.size() << " words, "
            << m.vocabs.slots.size() << " slots, " << m.vocabs.values.size()
            << " values, " << m.vocabs.acts.size() << " acts\n";
  std::cout << "parameters (" << m.params.count() << " tensors, "
            << m.params.total_values() << " values):\n";
  for (const Param& p : m.params.all()) {
    std::cout << "  " << p.name << "  " << p.value.shape_str() << "\n";
  }
  if (!ckpt.config_echo.empty()) {
    std::cout << "config: " << ckpt.config_echo << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  CLI::App app{"encoder-aggregator-decoder utterance generator"};
  app.require_subcommand(1);

  CLI::App* train = app.add_subcommand("train", "train a model, write a checkpoint");
  train->add_option("--config", cli.config_path, "key = value config file");
  train->add_option("--data", cli.data_path, "dataset JSON")->required();
  train->add_option("--out", cli.out_path, "checkpoint path")->required();
  train->add_option("--set", cli.overrides, "config override key=value");
  train->add_flag("--quiet", cli.quiet, "suppress per-epoch logs");

  CLI::App* gen = app.add_subcommand("generate", "decode one dialogue act");
  gen->add_option("--ckpt", cli.ckpt_path, "checkpoint")->required();
  gen->add_option("--da", cli.da_string, "dialogue act string")->required();
  gen->add_option("--n", cli.n, "candidates to print");
  gen->add_flag("--lexicalize", cli.lexicalize, "substitute slot values back");
  gen->add_option("--set", cli.overrides, "config override key=value");

  CLI::App* eval = app.add_subcommand("evaluate", "score a dataset split");
  eval->add_option("--ckpt", cli.ckpt_path, "checkpoint")->required();
  eval->add_option("--data", cli.data_path, "dataset JSON")->required();
  eval->add_option("--split", cli.split, "train, valid, test or all");
  eval->add_option("--report", cli.report_path, "report file ('-' = stdout)");
  eval->add_flag("--greedy", cli.greedy, "greedy decoding, no reranking");
  eval->add_flag("--lexicalized", cli.lexicalize, "BLEU on lexicalized text");
  eval->add_option("--set", cli.overrides, "config override key=value");

  CLI::App* grad = app.add_subcommand("gradcheck", "finite-difference suite");
  grad->add_option("--seed", cli.seed, "fixture seed");
  grad->add_option("--refiner", cli.refiner, "variant name or 'all'");
  grad->add_option("--fd-step", cli.h, "finite-difference step");
  grad->add_option("--tol", cli.tol, "max relative error accepted");

  CLI::App* inspect = app.add_subcommand("inspect", "dump checkpoint layout");
  inspect->add_option("--ckpt", cli.ckpt_path, "checkpoint")->required();

  CLI::App* toy = app.add_subcommand("make-toy", "write the built-in toy dataset");
  toy->add_option("--out", cli.out_path, "output JSON path ('-' = stdout)")
      ->required();
  toy->add_option("--records", cli.records, "distinct DA records");
  toy->add_option("--seed", cli.seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(train)) return cmd_train(cli);
    if (app.got_subcommand(gen)) return cmd_generate(cli);
    if (app.got_subcommand(eval)) return cmd_evaluate(cli);
    if (app.got_subcommand(grad)) return cmd_gradcheck(cli);
    if (app.got_subcommand(inspect)) return cmd_inspect(cli);
    if (app.got_subcommand(toy)) return cmd_make_toy(cli);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
