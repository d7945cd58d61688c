#pragma once

#include <cstdint>
#include <vector>

#include "eadgen/grad_check.hpp"
#include "eadgen/model.hpp"

namespace eadgen {

// Shape of the synthetic finite-difference fixture: a small random model,
// one random DA with `pairs` slot-value pairs and one random sentence.
struct GradSuiteConfig {
  std::uint64_t seed = 7;
  double h = 1e-5;
  std::size_t embed_dim = 8;
  std::size_t act_dim = 8;
  std::size_t hidden_dim = 8;
  std::size_t word_vocab = 20;
  std::size_t pairs = 3;
  std::size_t sentence_len = 6;
};

struct GradSuiteResult {
  Refiner refiner;
  GradCheckReport report;
  // |tape loss - reference loss| / |loss|: agreement of the two
  // independent forward implementations at the unperturbed parameters
  double value_gap = 0.0;
};

// Checks the tape's analytic gradients of a full teacher-forced sentence
// loss (encode, align, refine, decode, NLL) against central finite
// differences, once per requested refiner variant.
//
// The differences are taken over an independent plain-loop forward
// implementation that carries extended (long double) precision. A
// double-precision difference of two ~20-nat losses keeps only ~1e-10 of
// gradient signal, which drowns near-zero entries under the error
// formula's 1e-8 floor; the extended evaluation pushes that noise to
// ~1e-13 so the comparison is meaningful at h = 1e-5.
std::vector<GradSuiteResult> run_gradient_suite(
    const GradSuiteConfig& cfg, const std::vector<Refiner>& variants);

// The reference forward pass itself: teacher-forced sentence NLL computed
// with plain loops in long double, no tape involvement. Exposed for value
// cross-checks in tests.
long double reference_sentence_loss(const GeneratorModel& model,
                                    const DaIds& ids,
                                    const std::vector<int>& sentence);

// Vocabularies with the given number of word types plus small synthetic
// slot/value/act sets; shared by the gradient suite and the beam oracle.
CorpusVocabs synthetic_vocabs(std::size_t word_vocab, std::size_t slots = 3,
                              std::size_t values = 3, std::size_t acts = 1);

// The random DA/sentence fixture the suite decodes from `cfg`; exposed so
// tests can rebuild the exact same case.
void suite_fixture(const GradSuiteConfig& cfg, const CorpusVocabs& vocabs,
                   DaIds* ids, std::vector<int>* sentence);

}  // namespace eadgen
