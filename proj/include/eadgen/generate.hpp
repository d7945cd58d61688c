#pragma once

#include <string>
#include <vector>

#include "eadgen/decoder.hpp"
#include "eadgen/model.hpp"

namespace eadgen {

struct Candidate {
  std::vector<int> tokens;  // ends with EOS unless cut at max_len
  double nll = 0.0;
  double err = 0.0;
  double score = 0.0;  // nll + lambda * err, set by the scorer in use
};

struct BeamConfig {
  std::size_t width = 10;
  std::size_t overgen = 20;
  std::size_t topk = 5;
  double lambda = 1000.0;
  std::size_t max_len = 60;
};

// Missing/redundant counting against the delexicalizable DA pairs.
// total is N; binary (yes/no) and dont_care pairs never enter it.
struct SlotErrors {
  int missing = 0;    // p: required indexed slot tokens absent
  int redundant = 0;  // q: unlicensed tokens plus duplicate emissions
  int total = 0;      // N
  double err = 0.0;   // (p + q) / N, 0 when N = 0
};

SlotErrors slot_error_rate(const std::vector<std::string>& tokens,
                           const DialogueAct& da);

// Word ids to display strings; pad/bos/eos markers are dropped.
std::vector<std::string> tokens_to_strings(const std::vector<int>& ids,
                                           const Vocab& words);
std::string join_tokens(const std::vector<std::string>& tokens);

// Deterministic argmax decoding. err is filled from the DA; score uses the
// given lambda.
Candidate greedy_decode(const GeneratorModel& model, const DialogueAct& da,
                        std::size_t max_len, double lambda = 0.0,
                        std::vector<StepTrace>* trace = nullptr);

// Over-generation: width-limited best-first beam over summed token
// log-probabilities, no length normalization. Finished hypotheses (EOS or
// max_len) accumulate in a side pool while the beam runs on; the pool is
// then sorted by nll (ties by token ids) and cut to overgen. Candidates
// come back nll-ascending with err filled and score = nll.
std::vector<Candidate> beam_search(const GeneratorModel& model,
                                   const DialogueAct& da,
                                   const BeamConfig& cfg,
                                   std::vector<StepTrace>* trace = nullptr);

// Slot-error-penalized selection: score = nll + lambda * err, ascending,
// first topk returned. Stable for tied scores.
std::vector<Candidate> rerank(std::vector<Candidate> candidates,
                              const BeamConfig& cfg);

}  // namespace eadgen
