#include "eadgen/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "eadgen/errors.hpp"

namespace eadgen {

namespace {

constexpr int kMaxOrder = 4;

// n-gram key with an unprintable separator so token boundaries never blur
std::string ngram_key(const std::vector<std::string>& tokens, std::size_t at,
                      int n) {
  std::string key;
  for (int j = 0; j < n; ++j) {
    if (j) key += '\x1f';
    key += tokens[at + static_cast<std::size_t>(j)];
  }
  return key;
}

void count_ngrams(const std::vector<std::string>& tokens, int n,
                  std::unordered_map<std::string, long>& counts) {
  if (tokens.size() < static_cast<std::size_t>(n)) return;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    ++counts[ngram_key(tokens, i, n)];
  }
}

}  // namespace

double corpus_bleu(
    const std::vector<std::vector<std::string>>& hypotheses,
    const std::vector<std::vector<std::vector<std::string>>>& references) {
  if (hypotheses.empty()) {
    throw std::invalid_argument("corpus_bleu: empty corpus");
  }
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument("corpus_bleu: segment count mismatch");
  }

  long numerator[kMaxOrder] = {0, 0, 0, 0};
  long denominator[kMaxOrder] = {0, 0, 0, 0};
  long hyp_len = 0;
  long ref_len = 0;

  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& refs = references[s];
    if (refs.empty()) {
      throw std::invalid_argument("corpus_bleu: segment " + std::to_string(s) +
                                  " has no references");
    }

    hyp_len += static_cast<long>(hyp.size());
    long closest = static_cast<long>(refs[0].size());
    for (const auto& ref : refs) {
      const long len = static_cast<long>(ref.size());
      const long d_new = std::labs(len - static_cast<long>(hyp.size()));
      const long d_old = std::labs(closest - static_cast<long>(hyp.size()));
      if (d_new < d_old || (d_new == d_old && len < closest)) closest = len;
    }
    ref_len += closest;

    for (int n = 1; n <= kMaxOrder; ++n) {
      if (hyp.size() < static_cast<std::size_t>(n)) continue;
      std::unordered_map<std::string, long> hyp_counts;
      count_ngrams(hyp, n, hyp_counts);
      std::unordered_map<std::string, long> max_ref_counts;
      for (const auto& ref : refs) {
        std::unordered_map<std::string, long> rc;
        count_ngrams(ref, n, rc);
        for (const auto& [k, v] : rc) {
          long& cur = max_ref_counts[k];
          if (v > cur) cur = v;
        }
      }
      denominator[n - 1] += static_cast<long>(hyp.size()) - n + 1;
      for (const auto& [k, v] : hyp_counts) {
        auto it = max_ref_counts.find(k);
        if (it != max_ref_counts.end()) {
          numerator[n - 1] += std::min(v, it->second);
        }
      }
    }
  }

  if (hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (denominator[n] == 0) continue;  // no hypothesis long enough
    ++orders;
    const double p =
        numerator[n] > 0
            ? static_cast<double>(numerator[n]) / static_cast<double>(denominator[n])
            : 1e-9;
    log_sum += std::log(p);
  }
  if (orders == 0) return 0.0;

  const double bp =
      hyp_len > ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return bp * std::exp(log_sum / orders);
}

double corpus_err_percent(const std::vector<SlotErrors>& per_da) {
  long bad = 0;
  long total = 0;
  for (const SlotErrors& se : per_da) {
    bad += se.missing + se.redundant;
    total += se.total;
  }
  return total > 0 ? 100.0 * static_cast<double>(bad) / static_cast<double>(total)
                   : 0.0;
}

EvalReport evaluate_corpus(const GeneratorModel& model, const Corpus& corpus,
                           const EvalOptions& opts) {
  EvalReport report;
  std::vector<std::vector<std::string>> hyps;
  std::vector<std::vector<std::vector<std::string>>> refs;
  std::vector<SlotErrors> errors;

  for (const Corpus::Group& group : corpus.grouped()) {
    Candidate top;
    if (opts.greedy) {
      top = greedy_decode(model, group.da, opts.beam.max_len, opts.beam.lambda);
    } else {
      std::vector<Candidate> picked =
          rerank(beam_search(model, group.da, opts.beam), opts.beam);
      if (!picked.empty()) top = std::move(picked.front());
    }

    std::vector<std::string> tokens =
        tokens_to_strings(top.tokens, model.vocabs.words);
    SlotErrors se = slot_error_rate(tokens, group.da);
    errors.push_back(se);

    if (opts.lexicalized) {
      std::vector<std::string> hyp_lex;
      try {
        hyp_lex = tokenize(
            lexicalize_text(join_tokens(tokens), canonical_order(group.da)));
      } catch (const DataError&) {
        hyp_lex = tokens;  // unresolvable slot token: score the raw form
      }
      hyps.push_back(std::move(hyp_lex));
      std::vector<std::vector<std::string>> ref_set;
      for (const std::string& raw : group.raw_references) {
        ref_set.push_back(tokenize(raw));
      }
      refs.push_back(std::move(ref_set));
    } else {
      hyps.push_back(tokens);
      refs.push_back(group.references);
    }

    DaResult row;
    row.da_string = group.da_string;
    row.tokens = std::move(tokens);
    row.errors = se;
    row.nll = top.nll;
    row.score = top.score;
    report.per_da.push_back(std::move(row));

    report.err.missing += se.missing;
    report.err.redundant += se.redundant;
    report.err.total_slots += se.total;
  }

  report.bleu = corpus_bleu(hyps, refs);
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << "segments: " << report.per_da.size() << "\n";
  out << "BLEU: " << report.bleu << "\n";
  out.precision(2);
  out << "ERR%: " << report.err.percent() << " (missing " << report.err.missing
      << ", redundant " << report.err.redundant << ", slots "
      << report.err.total_slots << ")\n";
  if (!report.config_echo.empty()) {
    out << "config: " << report.config_echo << "\n";
  }
  out << "\n";
  out.precision(3);
  for (const DaResult& row : report.per_da) {
    out << "DA: " << row.da_string << "\n";
    out << "  out: " << join_tokens(row.tokens) << "\n";
    out << "  nll: " << row.nll << "  slot errors: " << row.errors.missing
        << " missing, " << row.errors.redundant << " redundant of "
        << row.errors.total << "\n";
  }
  return out.str();
}

}  // namespace eadgen
