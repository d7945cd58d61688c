#include "eadgen/aggregator.hpp"

#include "eadgen/errors.hpp"

namespace eadgen {

AlignNodes align_on_tape(Tape& tape, const GeneratorModel& model,
                         const EncodedNodes& enc, VarId h_prev) {
  AlignNodes out;
  const std::size_t K = enc.states.size();
  if (K == 0) {
    VarId summary = tape.constant(Tensor::zeros({model.cfg.hidden_dim}));
    out.d = tape.concat(enc.act_vec, summary);
    return out;
  }

  VarId rec = tape.matvec(tape.param("attn.recurrent"), h_prev);
  VarId score = tape.param("attn.score");
  std::vector<VarId> energies;
  energies.reserve(K);
  for (std::size_t i = 0; i < K; ++i) {
    energies.push_back(
        tape.dot(score, tape.tanh(tape.add(enc.attn_features[i], rec))));
  }
  out.alpha = tape.softmax(tape.pack(energies));
  VarId summary = tape.weighted_sum(out.alpha, enc.states);
  out.d = tape.concat(enc.act_vec, summary);
  return out;
}

RefineNodes refine_on_tape(Tape& tape, const GeneratorModel& model, VarId d,
                           VarId w, VarId h_prev) {
  auto need = [&](const std::string& leaf) {
    const std::string name = model.refiner_param(leaf);
    if (!model.params.has(name)) {
      throw ConfigError("refiner " + refiner_name(model.cfg.refiner) +
                        " is missing parameter " + name);
    }
    return tape.param(name);
  };

  RefineNodes out;
  switch (model.cfg.refiner) {
    case Refiner::GrAdd:
      out.x = tape.add(tape.matvec(need("gate"), d), w);
      break;
    case Refiner::GrMul:
      out.x = tape.hadamard(tape.matvec(need("gate"), d), w);
      break;
    case Refiner::AroaV:
      out.beta = tape.sigmoid(tape.dot(need("vector"), d));
      out.x = tape.scale(out.beta, w);
      break;
    case Refiner::AroaM:
      out.beta = tape.sigmoid(tape.dot(tape.matvec(need("token"), w), d));
      out.x = tape.scale(out.beta, w);
      break;
    case Refiner::AroaC: {
      VarId v = tape.add(tape.matvec(need("token"), w),
                         tape.matvec(need("context"), h_prev));
      out.beta = tape.sigmoid(tape.dot(v, d));
      out.x = tape.scale(out.beta, w);
      break;
    }
    case Refiner::Identity:
      out.x = w;
      break;
  }
  return out;
}

}  // namespace eadgen
