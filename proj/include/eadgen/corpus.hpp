#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "eadgen/da.hpp"

namespace eadgen {

// word-vocab reserved ids
constexpr int kPadId = 0;
constexpr int kBosId = 1;
constexpr int kEosId = 2;
constexpr int kUnkId = 3;
// slot/value/act vocabs reserve only the unknown id
constexpr int kAuxUnkId = 0;

struct Vocab {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> ids;

  int add(const std::string& token);
  int id_or(const std::string& token, int fallback) const;
  const std::string& token(int id) const { return tokens.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens.size()); }
};

Vocab make_word_vocab();  // seeds <pad>, <bos>, <eos>, <unk>
Vocab make_aux_vocab();   // seeds <unk>

struct CorpusVocabs {
  Vocab words;
  Vocab slots;
  Vocab values;
  Vocab acts;
};

// Lowercases, splits on whitespace, detaches . , ; ? ! as standalone
// tokens. Slot tokens (SLOT_*) keep their casing.
std::vector<std::string> tokenize(const std::string& text);

struct Example {
  std::size_t record_index = 0;
  DialogueAct da;             // canonical order
  std::string da_string;      // canonical form, the grouping key
  std::string reference;      // original utterance
  DelexUtterance delex;
  std::vector<std::string> model_tokens;  // tokenized delexicalized text
  int act_id = kAuxUnkId;
  std::vector<int> slot_ids;   // one per DA pair
  std::vector<int> value_ids;  // one per DA pair
};

struct Corpus {
  std::vector<Example> examples;
  CorpusVocabs vocabs;
  std::size_t record_count = 0;

  // distinct DAs with all their delexicalized references, evaluation order
  struct Group {
    DialogueAct da;
    std::string da_string;
    std::vector<std::vector<std::string>> references;  // model tokens
    std::vector<std::string> raw_references;           // original utterances
  };
  std::vector<Group> grouped() const;
};

// Dataset file: a JSON array of records, each [da_string, reference, ...]
// with at least one reference; each (DA, reference) pair becomes one
// example. Throws DataError with the record index on malformed input.
Corpus load_dataset(const std::string& path);
Corpus load_dataset_text(const std::string& json_text,
                         const std::string& source_name);

struct DataSplits {
  Corpus train;
  Corpus valid;
  Corpus test;
};

// Deterministic 3:1:1 split over records. Vocabularies are rebuilt from
// the training partition only and shared by all three corpora.
DataSplits split_corpus(const Corpus& full, std::uint64_t seed);

// Templated restaurant-domain corpus over 6 slots and 3 act types;
// lets the whole pipeline run with no external data.
std::string toy_dataset_json(std::size_t target_records, std::uint64_t seed);

}  // namespace eadgen
