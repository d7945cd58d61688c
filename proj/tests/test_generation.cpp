#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "eadgen/corpus.hpp"
#include "eadgen/da.hpp"
#include "eadgen/decoder.hpp"
#include "eadgen/diagnostics.hpp"
#include "eadgen/generate.hpp"
#include "eadgen/model.hpp"

using namespace eadgen;

namespace {

std::vector<std::string> toks(const std::string& text) {
  return tokenize(text);
}

ModelConfig beam_model_cfg(std::size_t max_len) {
  ModelConfig cfg;
  cfg.embed_dim = 3;
  cfg.act_dim = 2;
  cfg.hidden_dim = 4;
  cfg.refiner = Refiner::AroaM;
  cfg.init_range = 0.5;
  cfg.max_len = max_len;
  return cfg;
}

// Exhaustive search over every complete sequence (EOS-terminated or cut at
// the length limit), accumulating negative log-probabilities with the same
// arithmetic the beam uses. Ties prefer the lexicographically smaller
// token sequence, visited first by the ascending-token recursion.
struct BestSeq {
  std::vector<int> tokens;
  double nll = 0.0;
  bool set = false;
};

void enumerate_all(DecoderSession& session, const DecodeState& st,
                   std::vector<int>& prefix, double nll, std::size_t limit,
                   BestSeq* best) {
  const int V = session.model().vocabs.words.size();
  for (int v = 0; v < V; ++v) {
    StepResult r = step_token(session, st, StepMode::Forced, v);
    const double child_nll = nll - r.logprob;
    prefix.push_back(v);
    if (v == kEosId || r.state.t >= limit) {
      if (!best->set || child_nll < best->nll) {
        best->tokens = prefix;
        best->nll = child_nll;
        best->set = true;
      }
    } else {
      enumerate_all(session, r.state, prefix, child_nll, limit, best);
    }
    prefix.pop_back();
  }
}

Candidate make_candidate(double nll, double err) {
  Candidate c;
  c.nll = nll;
  c.err = err;
  return c;
}

}  // namespace

TEST_CASE("slot error counting") {
  SUBCASE("all four slots realized exactly once") {
    DialogueAct da = parse_da(
        "inform(name='rex'; food='thai'; area='north'; pricerange='cheap')");
    SlotErrors e = slot_error_rate(
        toks("SLOT_NAME_1 serves SLOT_FOOD_1 food in the SLOT_AREA_1 at "
             "SLOT_PRICERANGE_1 prices"),
        da);
    CHECK(e.missing == 0);
    CHECK(e.redundant == 0);
    CHECK(e.total == 4);
    CHECK(e.err == 0.0);
  }

  SUBCASE("one missing and one spurious over four slots") {
    DialogueAct da = parse_da(
        "inform(name='rex'; food='thai'; area='north'; pricerange='cheap')");
    // area dropped, a phone token invented
    SlotErrors e = slot_error_rate(
        toks("SLOT_NAME_1 serves SLOT_FOOD_1 food at SLOT_PRICERANGE_1 "
             "prices , call SLOT_PHONE_1"),
        da);
    CHECK(e.missing == 1);
    CHECK(e.redundant == 1);
    CHECK(e.total == 4);
    CHECK(e.err == 0.5);
  }

  SUBCASE("repeated resolution with the second one missing") {
    // Two-entity comparison: six delexicalizable pairs. The first
    // resolution token shows up in both clauses while the second never
    // appears, leaving one redundant and one missing.
    DialogueAct da = parse_da(
        "compare(name='aristaeus 59'; screensizerange='large'; "
        "resolution='1080p'; name='charon 61'; screensizerange='medium'; "
        "resolution='720p')");
    SlotErrors e = slot_error_rate(
        toks("the SLOT_NAME_1 has a SLOT_SCREENSIZERANGE_1 screen and "
             "SLOT_RESOLUTION_1 resolution , the SLOT_NAME_2 has a "
             "SLOT_SCREENSIZERANGE_2 screen and SLOT_RESOLUTION_1 "
             "resolution"),
        da);
    CHECK(e.missing == 1);
    CHECK(e.redundant == 1);
    CHECK(e.total == 6);
    CHECK(e.err == doctest::Approx(2.0 / 6.0).epsilon(1e-15));
  }

  SUBCASE("binary and dont_care pairs never enter the denominator") {
    DialogueAct da = parse_da(
        "inform(name='rex'; dogsallowed='yes'; area='dont_care')");
    SlotErrors perfect = slot_error_rate(toks("SLOT_NAME_1 allows dogs"), da);
    CHECK(perfect.total == 1);
    CHECK(perfect.err == 0.0);

    // Emitting a slot token for the excluded pairs is unlicensed in full.
    SlotErrors spurious = slot_error_rate(
        toks("SLOT_NAME_1 allows SLOT_DOGSALLOWED_1 in SLOT_AREA_1"), da);
    CHECK(spurious.missing == 0);
    CHECK(spurious.redundant == 2);
    CHECK(spurious.total == 1);
    CHECK(spurious.err == 2.0);
  }

  SUBCASE("licensed duplicates count per extra emission") {
    DialogueAct da = parse_da("inform(name='rex'; area='north')");
    SlotErrors twice = slot_error_rate(
        toks("SLOT_NAME_1 , yes SLOT_NAME_1 , in SLOT_AREA_1"), da);
    CHECK(twice.redundant == 1);
    CHECK(twice.missing == 0);
    SlotErrors thrice = slot_error_rate(
        toks("SLOT_NAME_1 SLOT_NAME_1 SLOT_NAME_1 SLOT_AREA_1"), da);
    CHECK(thrice.redundant == 2);
    CHECK(thrice.err == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("a wrong index is spurious even when the slot exists") {
    DialogueAct da = parse_da("inform(name='rex'; area='north')");
    SlotErrors e =
        slot_error_rate(toks("SLOT_NAME_2 is in the SLOT_AREA_1"), da);
    CHECK(e.missing == 1);    // SLOT_NAME_1 absent
    CHECK(e.redundant == 1);  // SLOT_NAME_2 unlicensed
    CHECK(e.total == 2);
    CHECK(e.err == 1.0);
  }

  SUBCASE("no delexicalizable pairs means a zero rate") {
    DialogueAct da = parse_da("confirm(dogsallowed='no')");
    SlotErrors clean = slot_error_rate(toks("no dogs allowed"), da);
    CHECK(clean.total == 0);
    CHECK(clean.err == 0.0);
    // Even spurious emissions cannot produce a rate without a denominator.
    SlotErrors noisy = slot_error_rate(toks("SLOT_NAME_1 maybe"), da);
    CHECK(noisy.total == 0);
    CHECK(noisy.redundant == 1);
    CHECK(noisy.err == 0.0);
  }

  SUBCASE("an empty utterance misses everything") {
    DialogueAct da = parse_da("inform(name='rex'; food='thai')");
    SlotErrors e = slot_error_rate({}, da);
    CHECK(e.missing == 2);
    CHECK(e.redundant == 0);
    CHECK(e.err == 1.0);
  }

  SUBCASE("plain words never count") {
    DialogueAct da = parse_da("inform(name='rex')");
    SlotErrors e = slot_error_rate(
        toks("slot_name_1 SLOTNAME SLOT_ SLOT_NAME_x SLOT_NAME_1"), da);
    CHECK(e.missing == 0);
    CHECK(e.redundant == 0);
    CHECK(e.err == 0.0);
  }

  SUBCASE("the input DA need not be canonical") {
    DialogueAct da = parse_da("inform(food='thai'; area='north'; name='rex')");
    SlotErrors e = slot_error_rate(
        toks("SLOT_NAME_1 serves SLOT_FOOD_1 in the SLOT_AREA_1"), da);
    CHECK(e.err == 0.0);
    CHECK(e.total == 3);
  }
}

TEST_CASE("token rendering") {
  Vocab words = make_word_vocab();
  const int hello = words.add("hello");
  const int there = words.add("there");
  CHECK(tokens_to_strings({kBosId, hello, there, kEosId, kPadId}, words) ==
        std::vector<std::string>{"hello", "there"});
  CHECK(tokens_to_strings({}, words).empty());
  CHECK(join_tokens({"a", "b", "c"}) == "a b c");
  CHECK(join_tokens({}) == "");
  CHECK(join_tokens({"one"}) == "one");
}

TEST_CASE("greedy decoding") {
  CorpusVocabs vocabs = synthetic_vocabs(12);
  GeneratorModel model(beam_model_cfg(8), vocabs, 5);
  DialogueAct da = parse_da("act0(slot0='val1'; slot1='val2')");

  std::vector<StepTrace> trace;
  Candidate c1 = greedy_decode(model, da, 8, 0.0, &trace);
  Candidate c2 = greedy_decode(model, da, 8);
  CHECK(c1.tokens == c2.tokens);
  CHECK(c1.nll == c2.nll);
  REQUIRE(!c1.tokens.empty());
  CHECK(trace.size() == c1.tokens.size());
  const bool ended = c1.tokens.back() == kEosId || c1.tokens.size() == 8;
  CHECK(ended);
  CHECK(c1.nll > 0.0);
  CHECK(c1.score == c1.nll);  // lambda 0

  // The nll really is the sum of the chosen tokens' log-probabilities.
  DecoderSession session(model, canonical_order(da));
  DecodeState st{session.initial_state()};
  double nll = 0.0;
  for (int tok : c1.tokens) {
    StepResult r = step_token(session, st, StepMode::Forced, tok);
    nll -= r.logprob;
    st = r.state;
  }
  CHECK(c1.nll == doctest::Approx(nll).epsilon(1e-12));

  // A non-zero lambda folds the slot error into the score.
  Candidate pen = greedy_decode(model, da, 8, 100.0);
  CHECK(pen.score == pen.nll + 100.0 * pen.err);

  // The model-side cap applies even when the caller asks for more.
  Candidate capped = greedy_decode(model, da, 50);
  CHECK(capped.tokens.size() <= 8);
}

TEST_CASE("beam search") {
  CorpusVocabs vocabs = synthetic_vocabs(12);

  SUBCASE("width one is greedy decoding") {
    for (std::uint64_t seed : {3u, 7u, 11u}) {
      GeneratorModel model(beam_model_cfg(10), vocabs, seed);
      DialogueAct da = parse_da("act0(slot0='val0'; slot2='val1')");
      BeamConfig cfg;
      cfg.width = 1;
      cfg.overgen = 5;
      cfg.max_len = 10;
      std::vector<Candidate> beam = beam_search(model, da, cfg);
      Candidate greedy = greedy_decode(model, da, 10);
      REQUIRE(beam.size() == 1);
      CHECK(beam[0].tokens == greedy.tokens);
      CHECK(beam[0].nll == greedy.nll);
      CHECK(beam[0].err == greedy.err);
    }
  }

  SUBCASE("candidates come back nll-ascending and well-formed") {
    GeneratorModel model(beam_model_cfg(8), vocabs, 23);
    DialogueAct da = parse_da("act0(slot0='val0'; slot1='val1')");
    BeamConfig cfg;
    cfg.width = 10;
    cfg.overgen = 20;
    cfg.max_len = 8;
    std::vector<Candidate> out = beam_search(model, da, cfg);
    REQUIRE(!out.empty());
    CHECK(out.size() <= cfg.overgen);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Candidate& c = out[i];
      CHECK(!c.tokens.empty());
      const bool finished = c.tokens.back() == kEosId || c.tokens.size() == 8;
      CHECK(finished);
      CHECK(c.score == c.nll);
      CHECK(std::count(c.tokens.begin(), c.tokens.end(), kEosId) <= 1);
      if (i > 0) CHECK(out[i - 1].nll <= c.nll);
    }
    // Distinct hypotheses only.
    for (std::size_t i = 1; i < out.size(); ++i)
      CHECK(out[i - 1].tokens != out[i].tokens);
  }

  SUBCASE("an act-only DA still generates") {
    GeneratorModel model(beam_model_cfg(6), vocabs, 31);
    std::vector<Candidate> out =
        beam_search(model, parse_da("act0()"), BeamConfig{});
    CHECK(!out.empty());
    for (const Candidate& c : out) CHECK(c.err == 0.0);
  }

  SUBCASE("degenerate configurations return nothing") {
    GeneratorModel model(beam_model_cfg(6), vocabs, 31);
    DialogueAct da = parse_da("act0(slot0='val0')");
    BeamConfig cfg;
    cfg.width = 0;
    CHECK(beam_search(model, da, cfg).empty());
    cfg = BeamConfig{};
    cfg.overgen = 0;
    CHECK(beam_search(model, da, cfg).empty());
    cfg = BeamConfig{};
    cfg.max_len = 0;
    CHECK(beam_search(model, da, cfg).empty());
  }

  SUBCASE("wide beam on a tiny vocabulary finds the exhaustive argmax") {
    CorpusVocabs small = synthetic_vocabs(4);  // reserved ids only
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      GeneratorModel model(beam_model_cfg(4), small, seed);
      DialogueAct da = parse_da("act0(slot0='val0'; slot1='val1')");

      BeamConfig cfg;
      cfg.width = 64;
      cfg.overgen = 64;
      cfg.max_len = 4;
      std::vector<Candidate> beam = beam_search(model, da, cfg);
      REQUIRE(!beam.empty());

      DecoderSession session(model, canonical_order(da));
      DecodeState st{session.initial_state()};
      std::vector<int> prefix;
      BestSeq best;
      enumerate_all(session, st, prefix, 0.0, 4, &best);
      REQUIRE(best.set);

      CHECK(beam[0].tokens == best.tokens);
      CHECK(beam[0].nll == doctest::Approx(best.nll).epsilon(1e-12));
    }
  }
}

TEST_CASE("reranking") {
  SUBCASE("slot errors dominate at the default trade-off") {
    std::vector<Candidate> cands = {make_candidate(10.0, 0.25),
                                    make_candidate(10.0, 0.0)};
    BeamConfig cfg;
    cfg.lambda = 1000.0;
    cfg.topk = 2;
    std::vector<Candidate> out = rerank(cands, cfg);
    REQUIRE(out.size() == 2);
    CHECK(out[0].err == 0.0);
    CHECK(out[0].score == 10.0);
    CHECK(out[1].score == 260.0);
    CHECK(out[1].score - out[0].score == 250.0);
  }

  SUBCASE("lambda zero falls back to the nll order") {
    std::vector<Candidate> cands = {
        make_candidate(5.0, 1.0), make_candidate(2.0, 0.0),
        make_candidate(9.0, 0.5), make_candidate(3.0, 2.0)};
    BeamConfig cfg;
    cfg.lambda = 0.0;
    cfg.topk = 4;
    std::vector<Candidate> out = rerank(cands, cfg);
    REQUIRE(out.size() == 4);
    CHECK(out[0].nll == 2.0);
    CHECK(out[1].nll == 3.0);
    CHECK(out[2].nll == 5.0);
    CHECK(out[3].nll == 9.0);
    for (const Candidate& c : out) CHECK(c.score == c.nll);
  }

  SUBCASE("five candidates against hand-computed scores") {
    std::vector<Candidate> cands = {
        make_candidate(8.0, 0.0),   // R = 8
        make_candidate(6.0, 0.5),   // R = 11
        make_candidate(9.0, 0.0),   // R = 9
        make_candidate(7.0, 0.25),  // R = 9.5
        make_candidate(5.0, 1.0)};  // R = 15
    BeamConfig cfg;
    cfg.lambda = 10.0;
    cfg.topk = 3;
    std::vector<Candidate> out = rerank(cands, cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[0].score == 8.0);
    CHECK(out[1].score == 9.0);
    CHECK(out[2].score == 9.5);
    CHECK(out[0].nll == 8.0);
    CHECK(out[1].nll == 9.0);
    CHECK(out[2].nll == 7.0);
  }

  SUBCASE("reranking permutes, never invents or drops") {
    std::vector<Candidate> cands;
    for (int i = 0; i < 6; ++i) {
      Candidate c = make_candidate(10.0 - i, (i % 3) * 0.5);
      c.tokens = {i};
      cands.push_back(c);
    }
    BeamConfig cfg;
    cfg.lambda = 2.0;
    cfg.topk = 6;
    std::vector<Candidate> out = rerank(cands, cfg);
    REQUIRE(out.size() == 6);
    for (std::size_t i = 1; i < out.size(); ++i)
      CHECK(out[i - 1].score <= out[i].score);
    std::vector<int> seen;
    for (const Candidate& c : out) {
      REQUIRE(c.tokens.size() == 1);
      seen.push_back(c.tokens[0]);
      CHECK(c.score == c.nll + cfg.lambda * c.err);
    }
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<int>{0, 1, 2, 3, 4, 5});
  }

  SUBCASE("ties keep their arrival order") {
    std::vector<Candidate> cands = {make_candidate(4.0, 0.0),
                                    make_candidate(3.0, 0.5),
                                    make_candidate(4.0, 0.0)};
    cands[0].tokens = {7};
    cands[1].tokens = {8};
    cands[2].tokens = {9};
    BeamConfig cfg;
    cfg.lambda = 2.0;  // scores: 4, 4, 4 — all tied
    cfg.topk = 3;
    std::vector<Candidate> out = rerank(cands, cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[0].tokens == std::vector<int>{7});
    CHECK(out[1].tokens == std::vector<int>{8});
    CHECK(out[2].tokens == std::vector<int>{9});
  }

  SUBCASE("a short list comes back whole") {
    std::vector<Candidate> cands = {make_candidate(1.0, 0.0)};
    BeamConfig cfg;
    cfg.topk = 5;
    CHECK(rerank(cands, cfg).size() == 1);
    CHECK(rerank({}, cfg).empty());
  }

  SUBCASE("a large lambda prefers the clean candidate from a real beam") {
    CorpusVocabs vocabs = synthetic_vocabs(12);
    GeneratorModel model(beam_model_cfg(8), vocabs, 41);
    DialogueAct da = parse_da("act0(slot0='val0'; slot1='val1')");
    BeamConfig cfg;
    cfg.width = 10;
    cfg.overgen = 20;
    cfg.max_len = 8;
    std::vector<Candidate> pool = beam_search(model, da, cfg);
    REQUIRE(!pool.empty());

    double best_err = pool[0].err;
    for (const Candidate& c : pool) best_err = std::min(best_err, c.err);

    cfg.lambda = 1e9;  // err dominates everything
    cfg.topk = 1;
    std::vector<Candidate> picked = rerank(pool, cfg);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].err == best_err);
  }
}
