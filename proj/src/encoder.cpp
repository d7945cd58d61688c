#include "eadgen/encoder.hpp"

#include <stdexcept>

namespace eadgen {

GruCell load_gru_cell(Tape& tape, const GruNames& names) {
  GruCell c;
  c.reset_in = tape.param(names.reset_in);
  c.reset_rec = tape.param(names.reset_rec);
  c.update_in = tape.param(names.update_in);
  c.update_rec = tape.param(names.update_rec);
  c.cand_in = tape.param(names.cand_in);
  c.cand_rec = tape.param(names.cand_rec);
  return c;
}

VarId gru_step(Tape& tape, const GruCell& cell, VarId input, VarId h_prev) {
  VarId r = tape.sigmoid(
      tape.add(tape.matvec(cell.reset_in, input), tape.matvec(cell.reset_rec, h_prev)));
  VarId u = tape.sigmoid(
      tape.add(tape.matvec(cell.update_in, input), tape.matvec(cell.update_rec, h_prev)));
  VarId cand = tape.tanh(
      tape.add(tape.matvec(cell.cand_in, input),
               tape.hadamard(r, tape.matvec(cell.cand_rec, h_prev))));
  return tape.gru_blend(u, h_prev, cand);
}

EncodedNodes encode_on_tape(Tape& tape, const GeneratorModel& model,
                            const DaIds& ids) {
  if (ids.slot_ids.size() != ids.value_ids.size())
    throw std::invalid_argument("slot/value id lists differ in length");
  const std::size_t K = ids.slot_ids.size();
  const std::size_t H = model.cfg.hidden_dim;

  EncodedNodes enc;
  enc.act_vec = tape.param_row("emb.act", static_cast<std::size_t>(ids.act_id));
  if (K == 0) return enc;

  enc.pair_embeddings.reserve(K);
  for (std::size_t i = 0; i < K; ++i) {
    VarId slot = tape.param_row("emb.slot", static_cast<std::size_t>(ids.slot_ids[i]));
    VarId value = tape.param_row("emb.value", static_cast<std::size_t>(ids.value_ids[i]));
    enc.pair_embeddings.push_back(tape.concat(slot, value));
  }

  GruCell fwd = load_gru_cell(tape, encoder_fwd_names());
  GruCell bwd = load_gru_cell(tape, encoder_bwd_names());

  std::vector<VarId> fwd_states(K), bwd_states(K);
  VarId h = tape.constant(Tensor::zeros({H}));
  for (std::size_t i = 0; i < K; ++i) {
    h = gru_step(tape, fwd, enc.pair_embeddings[i], h);
    fwd_states[i] = h;
  }
  h = tape.constant(Tensor::zeros({H}));
  for (std::size_t i = K; i-- > 0;) {
    h = gru_step(tape, bwd, enc.pair_embeddings[i], h);
    bwd_states[i] = h;
  }

  VarId features = tape.param("attn.features");
  enc.states.reserve(K);
  enc.attn_features.reserve(K);
  for (std::size_t i = 0; i < K; ++i) {
    VarId s = tape.add(fwd_states[i], bwd_states[i]);
    enc.states.push_back(s);
    enc.attn_features.push_back(tape.matvec(features, s));
  }
  return enc;
}

EncodedDA encode(const GeneratorModel& model, const DialogueAct& canonical) {
  if (!is_canonical(canonical))
    throw std::invalid_argument("encode() requires a canonical-order DA: " +
                                canonical.to_string());
  Tape tape(&model.params);  // read-only binding
  EncodedNodes nodes = encode_on_tape(tape, model, da_ids(model.vocabs, canonical));
  EncodedDA out;
  out.act_vec = tape.value(nodes.act_vec);
  for (VarId s : nodes.states) out.states.push_back(tape.value(s));
  for (VarId z : nodes.pair_embeddings) out.pair_embeddings.push_back(tape.value(z));
  return out;
}

}  // namespace eadgen
