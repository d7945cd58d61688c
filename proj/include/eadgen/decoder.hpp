#pragma once

#include <vector>

#include "eadgen/aggregator.hpp"
#include "eadgen/encoder.hpp"
#include "eadgen/model.hpp"
#include "eadgen/rng.hpp"
#include "eadgen/tape.hpp"

namespace eadgen {

// DA-conditioned GRU transition: the DA vector d enters both gates, the
// candidate activation, and a direct tanh path added to the candidate.
VarId decoder_step_on_tape(Tape& tape, const GeneratorModel& model, VarId x,
                           VarId h_prev, VarId d);

VarId output_logits(Tape& tape, const GeneratorModel& model, VarId h);

struct StepOptions {
  bool training = false;
  double dropout_rate = 0.0;  // drop probability; inverted scaling
  Rng* rng = nullptr;         // required when dropout is active
};

// Every node of one full decoding step (align, refine, transition,
// output), kept for losses, traces and diagnostics.
struct StepNodes {
  VarId d = kNoVar;
  VarId alpha = kNoVar;
  VarId x = kNoVar;
  VarId beta = kNoVar;
  VarId h = kNoVar;         // next decoder state (never dropped)
  VarId logits = kNoVar;
  VarId logprobs = kNoVar;  // log-softmax of the logits
};

// token_id indexes the word embedding table. Dropout (training only) hits
// the refined input x and the pre-output copy of h.
StepNodes model_step_on_tape(Tape& tape, const GeneratorModel& model,
                             const EncodedNodes& enc, VarId h_prev,
                             int token_id, const StepOptions& opts = {});

// Per-step attention record for inspection and the trace checks.
struct StepTrace {
  Tensor alpha;          // empty when the DA has no pairs
  double beta = 0.0;
  bool has_beta = false;
};

// Forward-only decoding context for one DA: owns a read-only tape with the
// DA encoded once, and advances the decoder state token by token.
class DecoderSession {
 public:
  DecoderSession(const GeneratorModel& model, const DialogueAct& da);

  VarId initial_state();  // zero vector

  struct Step {
    VarId h = kNoVar;
    Tensor logprobs;
    StepTrace trace;
  };
  Step advance(VarId h_prev, int token_id);

  const GeneratorModel& model() const { return *model_; }

 private:
  const GeneratorModel* model_;
  Tape tape_;
  EncodedNodes enc_;
};

struct DecodeState {
  VarId h = kNoVar;
  std::size_t t = 0;         // tokens emitted so far
  int prev_token = kBosId;   // input for the next step
};

enum class StepMode { Greedy, Sample, Forced };

struct StepResult {
  int next_token = kEosId;
  double logprob = 0.0;
  DecodeState state;
  StepTrace trace;
};

// Runs one decoding step and picks the next token by mode: the argmax
// (Greedy), a draw from the output distribution (Sample, needs rng), or a
// caller-given id (Forced). Throws SequenceOverflow once the session's
// model max_len is exhausted.
StepResult step_token(DecoderSession& session, const DecodeState& state,
                      StepMode mode, int forced_next = -1, Rng* rng = nullptr);

}  // namespace eadgen
