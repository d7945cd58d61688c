#pragma once

#include <vector>

#include "eadgen/encoder.hpp"
#include "eadgen/model.hpp"
#include "eadgen/tape.hpp"

namespace eadgen {

// Attention over the encoded slot-value states, recomputed every decoder
// step from the previous decoder state:
//   e_i = score . tanh(attn_features_i + attn.recurrent h_prev)
//   alpha = softmax(e),  d = [act ; sum_i alpha_i s_i]
// With no pairs the summary is a zero vector and alpha is kNoVar.
struct AlignNodes {
  VarId d = kNoVar;      // size act_dim + hidden_dim
  VarId alpha = kNoVar;  // attention weights, kNoVar when the DA has no pairs
};

AlignNodes align_on_tape(Tape& tape, const GeneratorModel& model,
                         const EncodedNodes& enc, VarId h_prev);

// Second-stage refinement of the word embedding w by the DA vector d.
// beta is the scalar attention-over-attention gate (kNoVar for the other
// variants).
struct RefineNodes {
  VarId x = kNoVar;
  VarId beta = kNoVar;
};

RefineNodes refine_on_tape(Tape& tape, const GeneratorModel& model, VarId d,
                           VarId w, VarId h_prev);

}  // namespace eadgen
