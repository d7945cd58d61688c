#pragma once

#include <string>
#include <vector>

namespace eadgen {

struct SlotValue {
  std::string slot;
  std::string value;
};

// An act type plus an ordered list of slot-value pairs, e.g.
// inform(name='Piperade'; food='Basque'). Slots may repeat (compare acts
// carry two `name` pairs); canonical order sorts by slot name and keeps
// duplicates in their original relative order.
struct DialogueAct {
  std::string act_type;
  std::vector<SlotValue> pairs;

  std::string to_string() const;
};

// Binary (yes/no) and dont_care values are never substituted into text and
// are excluded from slot-error counting.
bool is_delexicalizable_value(const std::string& value);

// Grammar: acttype(slot=value; ...) or acttype(). Values may be quoted
// with ' or ", or bare (yes, no, dont_care). A bare slot without `=value`
// is accepted as an empty-valued pair. Throws ParseError with the byte
// offset of the offending character.
DialogueAct parse_da(const std::string& text);

// Stable sort of the pairs by slot name.
DialogueAct canonical_order(const DialogueAct& da);
bool is_canonical(const DialogueAct& da);

// The k in SLOT_<NAME>_<k> for pair index `i`: 1-based occurrence count of
// that slot among the preceding pairs of the same DA.
std::string slot_token(const DialogueAct& da, std::size_t pair_index);

struct DelexUtterance {
  // whitespace-split surface with slot values replaced by indexed slot
  // tokens; original casing kept
  std::vector<std::string> surface;
  // model token ids; filled once a vocabulary exists
  std::vector<int> tokens;
  // DA values that never matched the utterance text
  std::vector<std::string> unmatched_values;

  std::string surface_text() const;
};

// Case-insensitive, longest-match-first replacement of DA values by
// indexed slot tokens. Matches only whole words (no match inside a longer
// alphanumeric run). Unmatched values are reported, not fatal.
DelexUtterance delexicalize(const std::string& utterance,
                            const DialogueAct& da);

// Restores slot tokens to their DA values. Throws DataError naming the
// first token that has no referent in the DA.
std::string lexicalize(const DelexUtterance& delex, const DialogueAct& da);
std::string lexicalize_text(const std::string& delex_text,
                            const DialogueAct& da);

// SLOT_<NAME>_<k> token introspection, shared with slot-error counting.
struct SlotTokenRef {
  std::string slot;  // lowercased
  int index = 0;     // 1-based
};
bool parse_slot_token(const std::string& token, SlotTokenRef* out);

}  // namespace eadgen
