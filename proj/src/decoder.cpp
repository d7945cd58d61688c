#include "eadgen/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eadgen/errors.hpp"

namespace eadgen {

namespace {

// Inverted-dropout mask: kept entries scale by 1/keep so inference needs
// no rescaling.
VarId dropout_mask(Tape& tape, std::size_t n, double rate, Rng& rng) {
  Tensor mask = Tensor::zeros({n});
  const double keep = 1.0 - rate;
  for (std::size_t i = 0; i < n; ++i) {
    mask.data[i] = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  return tape.constant(std::move(mask));
}

}  // namespace

VarId decoder_step_on_tape(Tape& tape, const GeneratorModel& model, VarId x,
                           VarId h_prev, VarId d) {
  // The x/h terms are summed first and the DA term added afterwards, so a
  // zeroed DA weight leaves the plain-GRU result bit-for-bit untouched.
  VarId r = tape.sigmoid(tape.add(
      tape.add(tape.matvec(tape.param("dec.reset_in"), x),
               tape.matvec(tape.param("dec.reset_rec"), h_prev)),
      tape.matvec(tape.param("dec.reset_da"), d)));
  VarId u = tape.sigmoid(tape.add(
      tape.add(tape.matvec(tape.param("dec.update_in"), x),
               tape.matvec(tape.param("dec.update_rec"), h_prev)),
      tape.matvec(tape.param("dec.update_da"), d)));
  VarId cand = tape.tanh(tape.add(
      tape.add(tape.matvec(tape.param("dec.cand_in"), x),
               tape.hadamard(r, tape.matvec(tape.param("dec.cand_rec"), h_prev))),
      tape.matvec(tape.param("dec.cand_da"), d)));
  cand = tape.add(cand, tape.tanh(tape.matvec(tape.param("dec.da_direct"), d)));
  return tape.gru_blend(u, h_prev, cand);
}

VarId output_logits(Tape& tape, const GeneratorModel& model, VarId h) {
  (void)model;
  return tape.matvec(tape.param("dec.output"), h);
}

StepNodes model_step_on_tape(Tape& tape, const GeneratorModel& model,
                             const EncodedNodes& enc, VarId h_prev,
                             int token_id, const StepOptions& opts) {
  const bool drop = opts.training && opts.dropout_rate > 0.0;
  if (drop && !opts.rng) {
    throw std::invalid_argument("dropout requires an rng");
  }

  StepNodes step;
  AlignNodes align = align_on_tape(tape, model, enc, h_prev);
  step.d = align.d;
  step.alpha = align.alpha;

  VarId w = tape.param_row("emb.word", static_cast<std::size_t>(token_id));
  RefineNodes refine = refine_on_tape(tape, model, step.d, w, h_prev);
  step.x = refine.x;
  step.beta = refine.beta;
  if (drop) {
    step.x = tape.hadamard(
        step.x, dropout_mask(tape, model.cfg.embed_dim, opts.dropout_rate,
                             *opts.rng));
  }

  step.h = decoder_step_on_tape(tape, model, step.x, h_prev, step.d);
  VarId h_out = step.h;
  if (drop) {
    h_out = tape.hadamard(
        h_out, dropout_mask(tape, model.cfg.hidden_dim, opts.dropout_rate,
                            *opts.rng));
  }
  step.logits = output_logits(tape, model, h_out);
  step.logprobs = tape.log_softmax(step.logits);
  return step;
}

DecoderSession::DecoderSession(const GeneratorModel& model,
                               const DialogueAct& da)
    : model_(&model), tape_(&model.params) {
  enc_ = encode_on_tape(tape_, model,
                        da_ids(model.vocabs, canonical_order(da)));
}

VarId DecoderSession::initial_state() {
  return tape_.constant(Tensor::zeros({model_->cfg.hidden_dim}));
}

DecoderSession::Step DecoderSession::advance(VarId h_prev, int token_id) {
  StepNodes nodes = model_step_on_tape(tape_, *model_, enc_, h_prev, token_id);
  Step step;
  step.h = nodes.h;
  step.logprobs = tape_.value(nodes.logprobs);
  if (nodes.alpha != kNoVar) step.trace.alpha = tape_.value(nodes.alpha);
  if (nodes.beta != kNoVar) {
    step.trace.beta = tape_.scalar_value(nodes.beta);
    step.trace.has_beta = true;
  }
  return step;
}

StepResult step_token(DecoderSession& session, const DecodeState& state,
                      StepMode mode, int forced_next, Rng* rng) {
  const std::size_t max_len = session.model().cfg.max_len;
  if (state.t >= max_len) {
    throw SequenceOverflow("decode step past max_len=" +
                           std::to_string(max_len));
  }
  DecoderSession::Step step = session.advance(state.h, state.prev_token);

  StepResult out;
  const Tensor& lp = step.logprobs;
  switch (mode) {
    case StepMode::Greedy: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < lp.size(); ++i) {
        if (lp.data[i] > lp.data[best]) best = i;
      }
      out.next_token = static_cast<int>(best);
      break;
    }
    case StepMode::Sample: {
      if (!rng) throw std::invalid_argument("sampling requires an rng");
      std::vector<double> probs(lp.size());
      for (std::size_t i = 0; i < lp.size(); ++i) probs[i] = std::exp(lp.data[i]);
      out.next_token = rng->categorical(probs);
      break;
    }
    case StepMode::Forced: {
      if (forced_next < 0 || static_cast<std::size_t>(forced_next) >= lp.size()) {
        throw std::invalid_argument("forced token id out of range");
      }
      out.next_token = forced_next;
      break;
    }
  }
  out.logprob = lp.data[static_cast<std::size_t>(out.next_token)];
  out.state.h = step.h;
  out.state.t = state.t + 1;
  out.state.prev_token = out.next_token;
  out.trace = std::move(step.trace);
  return out;
}

}  // namespace eadgen
