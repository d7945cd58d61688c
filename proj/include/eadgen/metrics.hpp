#pragma once

#include <string>
#include <vector>

#include "eadgen/corpus.hpp"
#include "eadgen/generate.hpp"
#include "eadgen/model.hpp"

namespace eadgen {

// Corpus-level BLEU-4. Per-segment n-gram counts are clipped against the
// maximum reference count; the brevity penalty uses the closest-length
// reference (ties toward the shorter one). Orders with an empty corpus
// denominator are dropped with weight renormalization; a zero numerator
// over a non-empty denominator floors the precision at 1e-9. Throws
// std::invalid_argument on an empty corpus or a segment with no reference.
double corpus_bleu(
    const std::vector<std::vector<std::string>>& hypotheses,
    const std::vector<std::vector<std::vector<std::string>>>& references);

// Slot-error percentage over a corpus: summed (missing + redundant) over
// summed slot totals, times 100. Summing counts first is not the same as
// averaging per-DA rates; this is the count-sum form.
double corpus_err_percent(const std::vector<SlotErrors>& per_da);

struct ErrTotals {
  long missing = 0;
  long redundant = 0;
  long total_slots = 0;
  double percent() const {
    return total_slots > 0
               ? 100.0 * static_cast<double>(missing + redundant) /
                     static_cast<double>(total_slots)
               : 0.0;
  }
};

struct DaResult {
  std::string da_string;
  std::vector<std::string> tokens;  // top candidate, display form
  SlotErrors errors;
  double nll = 0.0;
  double score = 0.0;
};

struct EvalReport {
  double bleu = 0.0;
  ErrTotals err;
  std::vector<DaResult> per_da;
  std::string config_echo;
};

struct EvalOptions {
  BeamConfig beam;
  bool greedy = false;       // skip over-generation, argmax only
  bool lexicalized = false;  // score BLEU on re-lexicalized text
};

// Generates one utterance per distinct DA of the corpus (beam + rerank
// top-1, or greedy) and scores BLEU against all references of that DA
// plus the corpus slot-error percentage.
EvalReport evaluate_corpus(const GeneratorModel& model, const Corpus& corpus,
                           const EvalOptions& opts);

std::string format_report(const EvalReport& report);

}  // namespace eadgen
