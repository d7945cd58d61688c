#pragma once

#include <cstdint>
#include <string>

#include "eadgen/corpus.hpp"
#include "eadgen/params.hpp"

namespace eadgen {

// Input-refinement mechanism between the attention summary and the
// decoder: gating (gr-add, gr-mul), attention-over-attention (aroa-*),
// or the plain attentive encoder-decoder (identity).
enum class Refiner { GrAdd, GrMul, AroaV, AroaM, AroaC, Identity };

std::string refiner_name(Refiner r);
Refiner refiner_from_name(const std::string& name);  // throws ConfigError
extern const Refiner kAllRefiners[6];

struct ModelConfig {
  std::size_t embed_dim = 80;   // slot, value and word embeddings
  std::size_t act_dim = 80;     // act-type embedding
  std::size_t hidden_dim = 80;  // encoder and decoder GRU state
  Refiner refiner = Refiner::AroaM;
  double init_range = 0.08;
  std::size_t max_len = 60;
};

struct GruNames {
  std::string reset_in, reset_rec;
  std::string update_in, update_rec;
  std::string cand_in, cand_rec;
};

GruNames encoder_fwd_names();
GruNames encoder_bwd_names();

// All trainable state of one generator: embeddings, the bidirectional
// encoder GRU, attention, the active refiner's parameters and the
// DA-conditioned decoder. Parameter creation order is fixed; it pins both
// RNG consumption and the checkpoint layout.
class GeneratorModel {
 public:
  ModelConfig cfg;
  CorpusVocabs vocabs;
  ParamStore params;

  GeneratorModel(ModelConfig cfg, CorpusVocabs vocabs, std::uint64_t seed,
                 bool zero_init = false);

  std::size_t da_dim() const { return cfg.act_dim + cfg.hidden_dim; }
  // "refiner.<variant>.<leaf>"
  std::string refiner_param(const std::string& leaf) const;
};

// act/slot/value ids of a canonical DA under a model's vocabularies
struct DaIds {
  int act_id = kAuxUnkId;
  std::vector<int> slot_ids;
  std::vector<int> value_ids;
};

DaIds da_ids(const CorpusVocabs& vocabs, const DialogueAct& canonical);
DaIds da_ids(const Example& ex);

}  // namespace eadgen
