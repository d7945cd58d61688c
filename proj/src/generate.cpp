#include "eadgen/generate.hpp"

#include <algorithm>
#include <iostream>
#include <unordered_map>
#include <unordered_set>

namespace eadgen {

SlotErrors slot_error_rate(const std::vector<std::string>& tokens,
                           const DialogueAct& da) {
  const DialogueAct canon = canonical_order(da);

  // Licensed tokens: one indexed slot token per delexicalizable pair.
  std::unordered_set<std::string> required;
  for (std::size_t i = 0; i < canon.pairs.size(); ++i) {
    if (is_delexicalizable_value(canon.pairs[i].value)) {
      required.insert(slot_token(canon, i));
    }
  }

  std::unordered_map<std::string, int> emitted;
  for (const std::string& tok : tokens) {
    SlotTokenRef ref;
    if (parse_slot_token(tok, &ref)) ++emitted[tok];
  }

  SlotErrors out;
  out.total = static_cast<int>(required.size());
  for (const std::string& req : required) {
    if (emitted.find(req) == emitted.end()) ++out.missing;
  }
  for (const auto& [tok, count] : emitted) {
    // A licensed token is redundant only past its first emission; anything
    // unlicensed (wrong slot or wrong index) counts in full.
    out.redundant += required.count(tok) ? count - 1 : count;
  }
  if (out.total > 0) {
    out.err = static_cast<double>(out.missing + out.redundant) / out.total;
  }
  return out;
}

std::vector<std::string> tokens_to_strings(const std::vector<int>& ids,
                                           const Vocab& words) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    out.push_back(words.token(id));
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Candidate greedy_decode(const GeneratorModel& model, const DialogueAct& da,
                        std::size_t max_len, double lambda,
                        std::vector<StepTrace>* trace) {
  const DialogueAct canon = canonical_order(da);
  const std::size_t limit = std::min(max_len, model.cfg.max_len);
  DecoderSession session(model, canon);
  DecodeState st;
  st.h = session.initial_state();

  Candidate cand;
  while (st.t < limit) {
    StepResult r = step_token(session, st, StepMode::Greedy);
    if (trace) trace->push_back(r.trace);
    cand.tokens.push_back(r.next_token);
    cand.nll -= r.logprob;
    st = r.state;
    if (r.next_token == kEosId) break;
  }
  cand.err = slot_error_rate(tokens_to_strings(cand.tokens, model.vocabs.words),
                             canon)
                 .err;
  cand.score = cand.nll + lambda * cand.err;
  return cand;
}

namespace {

struct Hyp {
  std::vector<int> tokens;
  double nll = 0.0;
  DecodeState st;
};

}  // namespace

std::vector<Candidate> beam_search(const GeneratorModel& model,
                                   const DialogueAct& da,
                                   const BeamConfig& cfg,
                                   std::vector<StepTrace>* trace) {
  const DialogueAct canon = canonical_order(da);
  const std::size_t limit = std::min(cfg.max_len, model.cfg.max_len);
  if (limit == 0 || cfg.width == 0 || cfg.overgen == 0) return {};

  DecoderSession session(model, canon);
  const std::size_t V = static_cast<std::size_t>(model.vocabs.words.size());

  std::vector<Hyp> live(1);
  live[0].st.h = session.initial_state();
  std::vector<Hyp> pool;

  // All live hypotheses share the same depth, so comparing (parent tokens,
  // extension token) element-wise is exactly lexicographic order over the
  // extended sequences.
  struct Ext {
    double nll;
    std::size_t parent;
    int token;
  };

  while (!live.empty()) {
    std::vector<Tensor> logprobs(live.size());
    std::vector<VarId> next_h(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      DecoderSession::Step step =
          session.advance(live[i].st.h, live[i].st.prev_token);
      if (trace) trace->push_back(step.trace);
      logprobs[i] = std::move(step.logprobs);
      next_h[i] = step.h;
    }

    std::vector<Ext> exts;
    exts.reserve(live.size() * V);
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t v = 0; v < V; ++v) {
        exts.push_back({live[i].nll - logprobs[i].data[v], i,
                        static_cast<int>(v)});
      }
    }
    auto ext_less = [&](const Ext& a, const Ext& b) {
      if (a.nll != b.nll) return a.nll < b.nll;
      const std::vector<int>& ta = live[a.parent].tokens;
      const std::vector<int>& tb = live[b.parent].tokens;
      if (ta != tb) return ta < tb;
      return a.token < b.token;
    };
    const std::size_t keep = std::min(cfg.width, exts.size());
    std::partial_sort(exts.begin(), exts.begin() + static_cast<std::ptrdiff_t>(keep),
                      exts.end(), ext_less);

    std::vector<Hyp> next_live;
    for (std::size_t k = 0; k < keep; ++k) {
      const Ext& e = exts[k];
      Hyp h;
      h.tokens = live[e.parent].tokens;
      h.tokens.push_back(e.token);
      h.nll = e.nll;
      h.st.h = next_h[e.parent];
      h.st.t = live[e.parent].st.t + 1;
      h.st.prev_token = e.token;
      if (e.token == kEosId || h.st.t >= limit) {
        pool.push_back(std::move(h));
      } else {
        next_live.push_back(std::move(h));
      }
    }
    live = std::move(next_live);
  }

  std::sort(pool.begin(), pool.end(), [](const Hyp& a, const Hyp& b) {
    if (a.nll != b.nll) return a.nll < b.nll;
    return a.tokens < b.tokens;
  });
  if (pool.size() > cfg.overgen) pool.resize(cfg.overgen);

  std::vector<Candidate> out;
  out.reserve(pool.size());
  for (Hyp& h : pool) {
    Candidate c;
    c.tokens = std::move(h.tokens);
    c.nll = h.nll;
    c.err = slot_error_rate(tokens_to_strings(c.tokens, model.vocabs.words),
                            canon)
                .err;
    c.score = c.nll;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Candidate> rerank(std::vector<Candidate> candidates,
                              const BeamConfig& cfg) {
  if (candidates.size() < cfg.topk) {
    std::cerr << "rerank: only " << candidates.size()
              << " candidates for topk=" << cfg.topk << "\n";
  }
  for (Candidate& c : candidates) {
    c.score = c.nll + cfg.lambda * c.err;
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.score < b.score;
                   });
  if (candidates.size() > cfg.topk) candidates.resize(cfg.topk);
  return candidates;
}

}  // namespace eadgen
