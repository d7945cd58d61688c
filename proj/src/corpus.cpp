#include "eadgen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eadgen/errors.hpp"
#include "eadgen/rng.hpp"

namespace eadgen {

namespace {

bool is_detached_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == '?' || c == '!';
}

void index_examples(std::vector<Example>& examples, const CorpusVocabs& v) {
  for (Example& ex : examples) {
    ex.delex.tokens.clear();
    for (const std::string& tok : ex.model_tokens) {
      ex.delex.tokens.push_back(v.words.id_or(tok, kUnkId));
    }
    ex.act_id = v.acts.id_or(ex.da.act_type, kAuxUnkId);
    ex.slot_ids.clear();
    ex.value_ids.clear();
    for (const SlotValue& sv : ex.da.pairs) {
      ex.slot_ids.push_back(v.slots.id_or(sv.slot, kAuxUnkId));
      ex.value_ids.push_back(v.values.id_or(sv.value, kAuxUnkId));
    }
  }
}

CorpusVocabs build_vocabs(const std::vector<Example>& examples) {
  CorpusVocabs v;
  v.words = make_word_vocab();
  v.slots = make_aux_vocab();
  v.values = make_aux_vocab();
  v.acts = make_aux_vocab();
  for (const Example& ex : examples) {
    for (const std::string& tok : ex.model_tokens) v.words.add(tok);
    v.acts.add(ex.da.act_type);
    for (const SlotValue& sv : ex.da.pairs) {
      v.slots.add(sv.slot);
      v.values.add(sv.value);
    }
  }
  return v;
}

}  // namespace

int Vocab::add(const std::string& token) {
  auto it = ids.find(token);
  if (it != ids.end()) return it->second;
  const int id = static_cast<int>(tokens.size());
  tokens.push_back(token);
  ids[token] = id;
  return id;
}

int Vocab::id_or(const std::string& token, int fallback) const {
  auto it = ids.find(token);
  return it == ids.end() ? fallback : it->second;
}

Vocab make_word_vocab() {
  Vocab v;
  v.add("<pad>");
  v.add("<bos>");
  v.add("<eos>");
  v.add("<unk>");
  return v;
}

Vocab make_aux_vocab() {
  Vocab v;
  v.add("<unk>");
  return v;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string word;
  while (is >> word) {
    std::string run;
    auto flush = [&]() {
      if (run.empty()) return;
      if (!parse_slot_token(run, nullptr)) {
        std::transform(run.begin(), run.end(), run.begin(),
                       [](unsigned char c) {
                         return static_cast<char>(std::tolower(c));
                       });
      }
      out.push_back(run);
      run.clear();
    };
    for (char c : word) {
      if (is_detached_punct(c)) {
        flush();
        out.push_back(std::string(1, c));
      } else {
        run += c;
      }
    }
    flush();
  }
  return out;
}

std::vector<Corpus::Group> Corpus::grouped() const {
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const Example& ex : examples) {
    auto it = index.find(ex.da_string);
    if (it == index.end()) {
      index[ex.da_string] = groups.size();
      groups.push_back({ex.da, ex.da_string, {ex.model_tokens}, {ex.reference}});
    } else {
      groups[it->second].references.push_back(ex.model_tokens);
      groups[it->second].raw_references.push_back(ex.reference);
    }
  }
  return groups;
}

Corpus load_dataset_text(const std::string& json_text,
                         const std::string& source_name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source_name + ": not valid JSON: " + e.what());
  }
  if (!doc.is_array()) {
    throw DataError(source_name + ": expected a top-level array of records");
  }
  Corpus corpus;
  corpus.record_count = doc.size();
  for (std::size_t r = 0; r < doc.size(); ++r) {
    const auto& rec = doc[r];
    if (!rec.is_array() || rec.size() < 2 || !rec[0].is_string()) {
      throw DataError(source_name + ": record " + std::to_string(r) +
                      " is not [da_string, reference, ...]");
    }
    DialogueAct da;
    try {
      da = canonical_order(parse_da(rec[0].get<std::string>()));
    } catch (const ParseError& e) {
      throw DataError(source_name + ": record " + std::to_string(r) +
                      ": bad dialogue act: " + e.what());
    }
    for (std::size_t j = 1; j < rec.size(); ++j) {
      if (!rec[j].is_string()) {
        throw DataError(source_name + ": record " + std::to_string(r) +
                        ": reference " + std::to_string(j) +
                        " is not a string");
      }
      Example ex;
      ex.record_index = r;
      ex.da = da;
      ex.da_string = da.to_string();
      ex.reference = rec[j].get<std::string>();
      ex.delex = delexicalize(ex.reference, ex.da);
      ex.model_tokens = tokenize(ex.delex.surface_text());
      corpus.examples.push_back(std::move(ex));
    }
  }
  corpus.vocabs = build_vocabs(corpus.examples);
  index_examples(corpus.examples, corpus.vocabs);
  return corpus;
}

Corpus load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_dataset_text(buf.str(), path);
}

DataSplits split_corpus(const Corpus& full, std::uint64_t seed) {
  std::vector<std::size_t> order(full.record_count);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n = order.size();
  const std::size_t n_train = (n * 3) / 5;
  const std::size_t n_valid = (n - n_train) / 2;
  std::vector<int> bucket(n, 2);  // 0 train, 1 valid, 2 test
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      bucket[order[i]] = 0;
    } else if (i < n_train + n_valid) {
      bucket[order[i]] = 1;
    }
  }

  DataSplits out;
  Corpus* parts[3] = {&out.train, &out.valid, &out.test};
  for (const Example& ex : full.examples) {
    parts[bucket[ex.record_index]]->examples.push_back(ex);
  }
  const CorpusVocabs vocabs = build_vocabs(out.train.examples);
  for (Corpus* part : parts) {
    part->vocabs = vocabs;
    part->record_count = 0;
    index_examples(part->examples, vocabs);
  }
  out.train.record_count = n_train;
  out.valid.record_count = n_valid;
  out.test.record_count = n - n_train - n_valid;
  return out;
}

std::string toy_dataset_json(std::size_t target_records, std::uint64_t seed) {
  static const std::vector<std::string> names = {
      "golden dragon", "blue fin",     "caffe roma",  "red lion",
      "green garden",  "silver spoon", "royal bengal", "little italy",
      "ocean pearl",   "spice hut",    "old mill",     "white lotus"};
  static const std::vector<std::string> foods = {
      "chinese", "italian", "thai",     "french",
      "indian",  "mexican", "japanese", "korean"};
  static const std::vector<std::string> areas = {
      "north", "south", "east", "west", "centre", "riverside"};
  static const std::vector<std::string> prices = {"cheap", "moderate",
                                                  "expensive"};
  static const std::vector<std::string> ratings = {"3", "4", "5"};

  Rng rng(seed);
  auto pick = [&rng](const std::vector<std::string>& pool) {
    return pool[rng.below(pool.size())];
  };

  nlohmann::json records = nlohmann::json::array();
  std::set<std::string> seen;
  std::size_t attempts = 0;
  while (seen.size() < target_records && attempts < 80 * target_records) {
    ++attempts;
    std::string da;
    std::string ref;
    switch (rng.below(8)) {
      case 0: {
        const auto n = pick(names), f = pick(foods);
        da = "inform(name='" + n + "';food='" + f + "')";
        ref = n + " serves " + f + " food .";
        break;
      }
      case 1: {
        const auto n = pick(names), f = pick(foods), a = pick(areas);
        da = "inform(name='" + n + "';food='" + f + "';area='" + a + "')";
        ref = n + " serves " + f + " food in the " + a + " area .";
        break;
      }
      case 2: {
        const auto n = pick(names), p = pick(prices), r = pick(ratings);
        da = "inform(name='" + n + "';pricerange='" + p + "';rating='" + r +
             "')";
        ref = n + " is a " + r + " star restaurant with " + p + " prices .";
        break;
      }
      case 3: {
        const auto n = pick(names), f = pick(foods);
        da = "inform(name='" + n + "';food='" + f + "';pricerange=dont_care)";
        ref = n + " serves " + f + " food at any price .";
        break;
      }
      case 4: {
        const auto n = pick(names), a = pick(areas);
        const bool kids = rng.bernoulli(0.5);
        da = "inform(name='" + n + "';area='" + a + "';kidsallowed=" +
             (kids ? "yes" : "no") + ")";
        ref = n + " is in the " + a + " area and children are " +
              (kids ? "welcome" : "not allowed") + " .";
        break;
      }
      case 5: {
        const auto n = pick(names), f = pick(foods), a = pick(areas);
        da = "recommend(name='" + n + "';food='" + f + "';area='" + a + "')";
        ref = "i would recommend " + n + " , a nice " + f +
              " restaurant in the " + a + " area .";
        break;
      }
      case 6: {
        const auto n = pick(names), a = pick(areas), r = pick(ratings);
        da = "recommend(name='" + n + "';area='" + a + "';rating='" + r +
             "')";
        ref = "i would recommend " + n + " in the " + a + " area , it has " +
              r + " stars .";
        break;
      }
      default: {
        auto n1 = pick(names), n2 = pick(names);
        auto f1 = pick(foods), f2 = pick(foods);
        while (n2 == n1) n2 = pick(names);
        while (f2 == f1) f2 = pick(foods);
        da = "compare(name='" + n1 + "';food='" + f1 + "';name='" + n2 +
             "';food='" + f2 + "')";
        ref = n1 + " serves " + f1 + " food while " + n2 + " serves " + f2 +
              " food .";
        break;
      }
    }
    if (seen.insert(da).second) {
      records.push_back(nlohmann::json::array({da, ref}));
    }
  }
  return records.dump(1);
}

}  // namespace eadgen
