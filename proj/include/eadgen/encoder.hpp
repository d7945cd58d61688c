#pragma once

#include <vector>

#include "eadgen/model.hpp"
#include "eadgen/tape.hpp"

namespace eadgen {

// Parameter nodes of one GRU, loaded onto a tape once per sentence.
struct GruCell {
  VarId reset_in, reset_rec;
  VarId update_in, update_rec;
  VarId cand_in, cand_rec;
};

GruCell load_gru_cell(Tape& tape, const GruNames& names);

// One GRU transition:
//   r = sigmoid(Wr x + Ur h),  u = sigmoid(Wu x + Uu h)
//   c = tanh(Wc x + r * (Uc h)),  h' = u * h + (1 - u) * c
VarId gru_step(Tape& tape, const GruCell& cell, VarId input, VarId h_prev);

// Encoding of one DA, as tape nodes. `states` holds the summed
// forward/backward hidden state per slot-value pair; `attn_features`
// caches the attention feature projection of each state, computed once
// per sentence. The act embedding stays outside the attended set.
struct EncodedNodes {
  std::vector<VarId> states;           // s_i, one per pair
  std::vector<VarId> pair_embeddings;  // z_i = [slot_emb; value_emb]
  std::vector<VarId> attn_features;    // attn.features * s_i
  VarId act_vec = kNoVar;              // a
};

EncodedNodes encode_on_tape(Tape& tape, const GeneratorModel& model,
                            const DaIds& ids);

// Plain-value encoding for callers that do not hold a tape. The DA must
// already be in canonical order.
struct EncodedDA {
  std::vector<Tensor> states;
  std::vector<Tensor> pair_embeddings;
  Tensor act_vec;
};

EncodedDA encode(const GeneratorModel& model, const DialogueAct& canonical);

}  // namespace eadgen
