#include "eadgen/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "eadgen/rng.hpp"
#include "eadgen/tape.hpp"
#include "eadgen/train.hpp"

namespace eadgen {

namespace {

// ---- long double helpers for the reference forward pass ----

using ldvec = std::vector<long double>;

long double sigl(long double x) { return 1.0L / (1.0L + std::exp(-x)); }

const Tensor& mat(const GeneratorModel& m, const std::string& name) {
  return m.params.at(name).value;
}

ldvec rowl(const Tensor& m, std::size_t row) {
  const std::size_t cols = m.shape[1];
  ldvec out(cols);
  for (std::size_t c = 0; c < cols; ++c)
    out[c] = static_cast<long double>(m.data[row * cols + c]);
  return out;
}

ldvec vecl(const Tensor& v) {
  return ldvec(v.data.begin(), v.data.end());
}

ldvec matvecl(const Tensor& m, const ldvec& v) {
  const std::size_t rows = m.shape[0];
  const std::size_t cols = m.shape[1];
  ldvec out(rows, 0.0L);
  for (std::size_t r = 0; r < rows; ++r) {
    long double acc = 0.0L;
    for (std::size_t c = 0; c < cols; ++c)
      acc += static_cast<long double>(m.data[r * cols + c]) * v[c];
    out[r] = acc;
  }
  return out;
}

long double dotl(const ldvec& a, const ldvec& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

ldvec concatl(const ldvec& a, const ldvec& b) {
  ldvec out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

struct GruMats {
  const Tensor *reset_in, *reset_rec, *update_in, *update_rec, *cand_in,
      *cand_rec;
};

GruMats gru_mats(const GeneratorModel& m, const GruNames& n) {
  return {&mat(m, n.reset_in),  &mat(m, n.reset_rec), &mat(m, n.update_in),
          &mat(m, n.update_rec), &mat(m, n.cand_in),   &mat(m, n.cand_rec)};
}

ldvec gru_step_l(const GruMats& g, const ldvec& z, const ldvec& h) {
  const std::size_t H = h.size();
  ldvec ri = matvecl(*g.reset_in, z), rr = matvecl(*g.reset_rec, h);
  ldvec ui = matvecl(*g.update_in, z), ur = matvecl(*g.update_rec, h);
  ldvec ci = matvecl(*g.cand_in, z), cr = matvecl(*g.cand_rec, h);
  ldvec out(H);
  for (std::size_t j = 0; j < H; ++j) {
    const long double r = sigl(ri[j] + rr[j]);
    const long double u = sigl(ui[j] + ur[j]);
    const long double c = std::tanh(ci[j] + r * cr[j]);
    out[j] = u * h[j] + (1.0L - u) * c;
  }
  return out;
}

}  // namespace

long double reference_sentence_loss(const GeneratorModel& model,
                                    const DaIds& ids,
                                    const std::vector<int>& sentence) {
  const std::size_t H = model.cfg.hidden_dim;
  const std::size_t K = ids.slot_ids.size();

  // Encode the slot/value pairs with both GRU directions.
  std::vector<ldvec> pair_emb(K);
  const Tensor& slot_emb = mat(model, "emb.slot");
  const Tensor& value_emb = mat(model, "emb.value");
  for (std::size_t i = 0; i < K; ++i) {
    pair_emb[i] =
        concatl(rowl(slot_emb, static_cast<std::size_t>(ids.slot_ids[i])),
                rowl(value_emb, static_cast<std::size_t>(ids.value_ids[i])));
  }
  const GruMats fwd = gru_mats(model, encoder_fwd_names());
  const GruMats bwd = gru_mats(model, encoder_bwd_names());
  std::vector<ldvec> states(K, ldvec(H, 0.0L));
  {
    ldvec h(H, 0.0L);
    for (std::size_t i = 0; i < K; ++i) {
      h = gru_step_l(fwd, pair_emb[i], h);
      for (std::size_t j = 0; j < H; ++j) states[i][j] += h[j];
    }
    h.assign(H, 0.0L);
    for (std::size_t i = K; i-- > 0;) {
      h = gru_step_l(bwd, pair_emb[i], h);
      for (std::size_t j = 0; j < H; ++j) states[i][j] += h[j];
    }
  }
  std::vector<ldvec> attn_feat(K);
  const Tensor& w_feat = mat(model, "attn.features");
  for (std::size_t i = 0; i < K; ++i) attn_feat[i] = matvecl(w_feat, states[i]);

  const ldvec act = rowl(mat(model, "emb.act"),
                         static_cast<std::size_t>(ids.act_id));
  const Tensor& w_rec = mat(model, "attn.recurrent");
  const ldvec score = vecl(mat(model, "attn.score"));

  const Tensor& word_emb = mat(model, "emb.word");
  const Tensor& dec_out = mat(model, "dec.output");

  std::vector<int> targets = sentence;
  targets.push_back(kEosId);

  ldvec h(H, 0.0L);
  int prev = kBosId;
  long double loss = 0.0L;
  for (int target : targets) {
    // Attention-weighted DA summary for this step.
    ldvec summary(H, 0.0L);
    if (K > 0) {
      ldvec rec = matvecl(w_rec, h);
      ldvec e(K);
      long double emax = 0.0L;
      for (std::size_t i = 0; i < K; ++i) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < H; ++j)
          acc += score[j] * std::tanh(attn_feat[i][j] + rec[j]);
        e[i] = acc;
        if (i == 0 || acc > emax) emax = acc;
      }
      long double z = 0.0L;
      for (std::size_t i = 0; i < K; ++i) {
        e[i] = std::exp(e[i] - emax);
        z += e[i];
      }
      for (std::size_t i = 0; i < K; ++i) {
        const long double alpha = e[i] / z;
        for (std::size_t j = 0; j < H; ++j) summary[j] += alpha * states[i][j];
      }
    }
    const ldvec d = concatl(act, summary);

    // Refine the previous word embedding into the step input.
    const ldvec w = rowl(word_emb, static_cast<std::size_t>(prev));
    ldvec x;
    switch (model.cfg.refiner) {
      case Refiner::GrAdd: {
        x = matvecl(mat(model, model.refiner_param("gate")), d);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += w[j];
        break;
      }
      case Refiner::GrMul: {
        x = matvecl(mat(model, model.refiner_param("gate")), d);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] *= w[j];
        break;
      }
      case Refiner::AroaV: {
        const long double beta =
            sigl(dotl(vecl(mat(model, model.refiner_param("vector"))), d));
        x = w;
        for (long double& v : x) v *= beta;
        break;
      }
      case Refiner::AroaM: {
        const long double beta =
            sigl(dotl(matvecl(mat(model, model.refiner_param("token")), w), d));
        x = w;
        for (long double& v : x) v *= beta;
        break;
      }
      case Refiner::AroaC: {
        ldvec v = matvecl(mat(model, model.refiner_param("token")), w);
        const ldvec c = matvecl(mat(model, model.refiner_param("context")), h);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += c[j];
        const long double beta = sigl(dotl(v, d));
        x = w;
        for (long double& val : x) val *= beta;
        break;
      }
      case Refiner::Identity:
        x = w;
        break;
    }

    // Decoder step: DA-conditioned GRU plus the direct tanh path.
    ldvec ri = matvecl(mat(model, "dec.reset_in"), x);
    ldvec rr = matvecl(mat(model, "dec.reset_rec"), h);
    ldvec rd = matvecl(mat(model, "dec.reset_da"), d);
    ldvec ui = matvecl(mat(model, "dec.update_in"), x);
    ldvec ur = matvecl(mat(model, "dec.update_rec"), h);
    ldvec ud = matvecl(mat(model, "dec.update_da"), d);
    ldvec ci = matvecl(mat(model, "dec.cand_in"), x);
    ldvec cr = matvecl(mat(model, "dec.cand_rec"), h);
    ldvec cd = matvecl(mat(model, "dec.cand_da"), d);
    ldvec dd = matvecl(mat(model, "dec.da_direct"), d);
    ldvec h_next(H);
    for (std::size_t j = 0; j < H; ++j) {
      const long double r = sigl(ri[j] + rr[j] + rd[j]);
      const long double u = sigl(ui[j] + ur[j] + ud[j]);
      const long double c =
          std::tanh(ci[j] + r * cr[j] + cd[j]) + std::tanh(dd[j]);
      h_next[j] = u * h[j] + (1.0L - u) * c;
    }
    h = std::move(h_next);

    // Cross-entropy of the forced target under softmax(W h).
    const ldvec logits = matvecl(dec_out, h);
    long double lmax = logits[0];
    for (long double v : logits) lmax = std::max(lmax, v);
    long double z = 0.0L;
    for (long double v : logits) z += std::exp(v - lmax);
    loss += (std::log(z) + lmax) -
            logits[static_cast<std::size_t>(target)];
    prev = target;
  }
  return loss;
}

CorpusVocabs synthetic_vocabs(std::size_t word_vocab, std::size_t slots,
                              std::size_t values, std::size_t acts) {
  CorpusVocabs v;
  v.words = make_word_vocab();
  for (std::size_t i = v.words.tokens.size(); i < word_vocab; ++i) {
    v.words.add("w" + std::to_string(i));
  }
  v.slots = make_aux_vocab();
  for (std::size_t i = 0; i < slots; ++i) v.slots.add("slot" + std::to_string(i));
  v.values = make_aux_vocab();
  for (std::size_t i = 0; i < values; ++i) v.values.add("val" + std::to_string(i));
  v.acts = make_aux_vocab();
  for (std::size_t i = 0; i < acts; ++i) v.acts.add("act" + std::to_string(i));
  return v;
}

void suite_fixture(const GradSuiteConfig& cfg, const CorpusVocabs& vocabs,
                   DaIds* ids, std::vector<int>* sentence) {
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  ids->act_id = 1 % vocabs.acts.size();
  ids->slot_ids.clear();
  ids->value_ids.clear();
  for (std::size_t i = 0; i < cfg.pairs; ++i) {
    ids->slot_ids.push_back(static_cast<int>(
        1 + rng.below(static_cast<std::size_t>(vocabs.slots.size()) - 1)));
    ids->value_ids.push_back(static_cast<int>(
        1 + rng.below(static_cast<std::size_t>(vocabs.values.size()) - 1)));
  }
  sentence->clear();
  for (std::size_t t = 0; t < cfg.sentence_len; ++t) {
    sentence->push_back(static_cast<int>(
        kUnkId + 1 +
        rng.below(static_cast<std::size_t>(vocabs.words.size()) -
                  static_cast<std::size_t>(kUnkId) - 1)));
  }
}

std::vector<GradSuiteResult> run_gradient_suite(
    const GradSuiteConfig& cfg, const std::vector<Refiner>& variants) {
  std::vector<GradSuiteResult> results;
  results.reserve(variants.size());

  for (Refiner refiner : variants) {
    ModelConfig mc;
    mc.embed_dim = cfg.embed_dim;
    mc.act_dim = cfg.act_dim;
    mc.hidden_dim = cfg.hidden_dim;
    mc.refiner = refiner;

    CorpusVocabs vocabs = synthetic_vocabs(cfg.word_vocab);
    GeneratorModel model(mc, vocabs, cfg.seed);

    // Fixture drawn after the parameters so every variant sees the same
    // DA/sentence under the same seed.
    DaIds ids;
    std::vector<int> sentence;
    suite_fixture(cfg, model.vocabs, &ids, &sentence);

    GradSuiteResult r;
    r.refiner = refiner;

    // Analytic gradients from one backward pass over the tape.
    model.params.zero_grads();
    {
      Tape tape(&model.params);
      const VarId loss =
          teacher_forced_loss_on_tape(tape, model, ids, sentence);
      r.report.loss = tape.scalar_value(loss);
      tape.backward(loss);
    }

    const long double base = reference_sentence_loss(model, ids, sentence);
    r.value_gap = std::abs(static_cast<double>(
                      (static_cast<long double>(r.report.loss) - base) / base));

    // Central differences of the reference loss, one parameter at a time.
    // The actual perturbed values are doubles, so divide by the exact step
    // the evaluations saw rather than the nominal 2h.
    for (std::size_t p = 0; p < model.params.count(); ++p) {
      Param& param = model.params.at(p);
      for (std::size_t i = 0; i < param.value.size(); ++i) {
        const double saved = param.value.data[i];
        param.value.data[i] = saved + cfg.h;
        const long double hi = param.value.data[i];
        const long double up = reference_sentence_loss(model, ids, sentence);
        param.value.data[i] = saved - cfg.h;
        const long double lo = param.value.data[i];
        const long double down = reference_sentence_loss(model, ids, sentence);
        param.value.data[i] = saved;
        const double cd = static_cast<double>((up - down) / (hi - lo));
        const double a = param.grad.data[i];
        const double rel =
            std::abs(a - cd) / std::max({std::abs(a), std::abs(cd), 1e-8});
        if (rel > r.report.max_rel_error) {
          r.report.max_rel_error = rel;
          r.report.worst_param = param.name;
          r.report.worst_index = i;
          r.report.worst_analytic = a;
          r.report.worst_numeric = cd;
        }
      }
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace eadgen
