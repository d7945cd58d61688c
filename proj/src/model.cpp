#include "eadgen/model.hpp"

#include "eadgen/errors.hpp"
#include "eadgen/rng.hpp"

namespace eadgen {

const Refiner kAllRefiners[6] = {Refiner::GrAdd, Refiner::GrMul,
                                 Refiner::AroaV, Refiner::AroaM,
                                 Refiner::AroaC, Refiner::Identity};

std::string refiner_name(Refiner r) {
  switch (r) {
    case Refiner::GrAdd:
      return "gr-add";
    case Refiner::GrMul:
      return "gr-mul";
    case Refiner::AroaV:
      return "aroa-v";
    case Refiner::AroaM:
      return "aroa-m";
    case Refiner::AroaC:
      return "aroa-c";
    case Refiner::Identity:
      return "identity";
  }
  throw ConfigError("unknown refiner enum value");
}

Refiner refiner_from_name(const std::string& name) {
  for (Refiner r : kAllRefiners)
    if (refiner_name(r) == name) return r;
  throw ConfigError("unknown refiner '" + name +
                    "' (expected gr-add, gr-mul, aroa-v, aroa-m, aroa-c or "
                    "identity)");
}

GruNames encoder_fwd_names() {
  return {"enc.fwd.reset_in",  "enc.fwd.reset_rec", "enc.fwd.update_in",
          "enc.fwd.update_rec", "enc.fwd.cand_in",  "enc.fwd.cand_rec"};
}

GruNames encoder_bwd_names() {
  return {"enc.bwd.reset_in",  "enc.bwd.reset_rec", "enc.bwd.update_in",
          "enc.bwd.update_rec", "enc.bwd.cand_in",  "enc.bwd.cand_rec"};
}

std::string GeneratorModel::refiner_param(const std::string& leaf) const {
  return "refiner." + refiner_name(cfg.refiner) + "." + leaf;
}

GeneratorModel::GeneratorModel(ModelConfig c, CorpusVocabs v,
                               std::uint64_t seed, bool zero_init)
    : cfg(c), vocabs(std::move(v)) {
  params.rng_seed = seed;
  const std::size_t E = cfg.embed_dim;
  const std::size_t A = cfg.act_dim;
  const std::size_t H = cfg.hidden_dim;
  const std::size_t D = A + H;
  if (E == 0 || A == 0 || H == 0)
    throw ConfigError("model dimensions must be positive");
  if (vocabs.words.size() == 0 || vocabs.acts.size() == 0 ||
      vocabs.slots.size() == 0 || vocabs.values.size() == 0)
    throw ConfigError("model requires non-empty vocabularies");

  Rng rng(seed);
  const double range = zero_init ? 0.0 : cfg.init_range;
  auto make = [&](const std::string& name, std::vector<std::size_t> shape) {
    params.create(name, std::move(shape), rng, range);
  };
  const auto W = static_cast<std::size_t>(vocabs.words.size());

  // Embedding tables are indexed by row.
  make("emb.word", {W, E});
  make("emb.slot", {static_cast<std::size_t>(vocabs.slots.size()), E});
  make("emb.value", {static_cast<std::size_t>(vocabs.values.size()), E});
  make("emb.act", {static_cast<std::size_t>(vocabs.acts.size()), A});

  // Bidirectional encoder over [slot;value] pairs (input size 2E).
  for (const GruNames& g : {encoder_fwd_names(), encoder_bwd_names()}) {
    make(g.reset_in, {H, 2 * E});
    make(g.reset_rec, {H, H});
    make(g.update_in, {H, 2 * E});
    make(g.update_rec, {H, H});
    make(g.cand_in, {H, 2 * E});
    make(g.cand_rec, {H, H});
  }

  // Additive attention: score_i = v . tanh(W s_i + U h_prev).
  make("attn.features", {H, H});
  make("attn.recurrent", {H, H});
  make("attn.score", {H});

  switch (cfg.refiner) {
    case Refiner::GrAdd:
    case Refiner::GrMul:
      make(refiner_param("gate"), {E, D});
      break;
    case Refiner::AroaV:
      make(refiner_param("vector"), {D});
      break;
    case Refiner::AroaM:
      make(refiner_param("token"), {D, E});
      break;
    case Refiner::AroaC:
      make(refiner_param("token"), {D, E});
      make(refiner_param("context"), {D, H});
      break;
    case Refiner::Identity:
      break;  // parameter-free
  }

  // Decoder GRU with the DA vector injected into every gate, plus a
  // direct tanh path and the output projection.
  make("dec.reset_in", {H, E});
  make("dec.reset_rec", {H, H});
  make("dec.reset_da", {H, D});
  make("dec.update_in", {H, E});
  make("dec.update_rec", {H, H});
  make("dec.update_da", {H, D});
  make("dec.cand_in", {H, E});
  make("dec.cand_rec", {H, H});
  make("dec.cand_da", {H, D});
  make("dec.da_direct", {H, D});
  make("dec.output", {W, H});
}

DaIds da_ids(const CorpusVocabs& vocabs, const DialogueAct& canonical) {
  DaIds ids;
  ids.act_id = vocabs.acts.id_or(canonical.act_type, kAuxUnkId);
  ids.slot_ids.reserve(canonical.pairs.size());
  ids.value_ids.reserve(canonical.pairs.size());
  for (const SlotValue& sv : canonical.pairs) {
    ids.slot_ids.push_back(vocabs.slots.id_or(sv.slot, kAuxUnkId));
    ids.value_ids.push_back(vocabs.values.id_or(sv.value, kAuxUnkId));
  }
  return ids;
}

DaIds da_ids(const Example& ex) {
  DaIds ids;
  ids.act_id = ex.act_id;
  ids.slot_ids = ex.slot_ids;
  ids.value_ids = ex.value_ids;
  return ids;
}

}  // namespace eadgen
