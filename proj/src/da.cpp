#include "eadgen/da.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "eadgen/errors.hpp"

namespace eadgen {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) { return is_word_char(c) || c == '?' || c == '.'; }

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string upper(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return out;
}

void skip_space(const std::string& s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

bool is_delexicalizable_value(const std::string& value) {
  const std::string v = lower(value);
  return !v.empty() && v != "yes" && v != "no" && v != "dont_care" &&
         v != "don't_care";
}

std::string DialogueAct::to_string() const {
  std::ostringstream os;
  os << act_type << "(";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) os << ";";
    os << pairs[i].slot;
    if (!pairs[i].value.empty()) os << "='" << pairs[i].value << "'";
  }
  os << ")";
  return os.str();
}

DialogueAct parse_da(const std::string& text) {
  DialogueAct da;
  std::size_t i = 0;
  skip_space(text, i);
  const std::size_t act_start = i;
  while (i < text.size() && is_ident_char(text[i])) ++i;
  if (i == act_start) throw ParseError("expected act type", i);
  da.act_type = text.substr(act_start, i - act_start);
  skip_space(text, i);
  if (i >= text.size() || text[i] != '(') {
    throw ParseError("expected '(' after act type", i);
  }
  ++i;
  skip_space(text, i);
  if (i < text.size() && text[i] == ')') {
    ++i;
  } else {
    while (true) {
      skip_space(text, i);
      const std::size_t slot_start = i;
      while (i < text.size() && is_word_char(text[i])) ++i;
      if (i == slot_start) throw ParseError("expected slot name", i);
      SlotValue sv;
      sv.slot = lower(text.substr(slot_start, i - slot_start));
      skip_space(text, i);
      if (i < text.size() && text[i] == '=') {
        ++i;
        skip_space(text, i);
        if (i < text.size() && (text[i] == '\'' || text[i] == '"')) {
          const char quote = text[i];
          const std::size_t val_start = ++i;
          while (i < text.size() && text[i] != quote) ++i;
          if (i >= text.size()) {
            throw ParseError("unterminated quoted value", val_start - 1);
          }
          sv.value = text.substr(val_start, i - val_start);
          ++i;
        } else {
          const std::size_t val_start = i;
          while (i < text.size() && text[i] != ';' && text[i] != ')') ++i;
          sv.value = trim(text.substr(val_start, i - val_start));
          if (sv.value.empty()) {
            throw ParseError("empty slot value", val_start);
          }
        }
      }
      da.pairs.push_back(std::move(sv));
      skip_space(text, i);
      if (i >= text.size()) throw ParseError("expected ';' or ')'", i);
      if (text[i] == ';') {
        ++i;
        continue;
      }
      if (text[i] == ')') {
        ++i;
        break;
      }
      throw ParseError("expected ';' or ')'", i);
    }
  }
  skip_space(text, i);
  if (i != text.size()) throw ParseError("trailing characters after ')'", i);
  return da;
}

DialogueAct canonical_order(const DialogueAct& da) {
  DialogueAct out = da;
  std::stable_sort(out.pairs.begin(), out.pairs.end(),
                   [](const SlotValue& a, const SlotValue& b) {
                     return a.slot < b.slot;
                   });
  return out;
}

bool is_canonical(const DialogueAct& da) {
  for (std::size_t i = 1; i < da.pairs.size(); ++i) {
    if (da.pairs[i].slot < da.pairs[i - 1].slot) return false;
  }
  return true;
}

std::string slot_token(const DialogueAct& da, std::size_t pair_index) {
  int k = 0;
  for (std::size_t i = 0; i <= pair_index; ++i) {
    if (da.pairs[i].slot == da.pairs[pair_index].slot) ++k;
  }
  return "SLOT_" + upper(da.pairs[pair_index].slot) + "_" + std::to_string(k);
}

std::string DelexUtterance::surface_text() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (i) os << " ";
    os << surface[i];
  }
  return os.str();
}

DelexUtterance delexicalize(const std::string& utterance,
                            const DialogueAct& da) {
  struct Target {
    std::string value_lower;
    std::string token;
    bool matched = false;
  };
  std::vector<Target> targets;
  for (std::size_t i = 0; i < da.pairs.size(); ++i) {
    if (!is_delexicalizable_value(da.pairs[i].value)) continue;
    targets.push_back({lower(da.pairs[i].value), slot_token(da, i), false});
  }
  // longest value first so "L7" never matches inside "L70"
  std::stable_sort(targets.begin(), targets.end(),
                   [](const Target& a, const Target& b) {
                     return a.value_lower.size() > b.value_lower.size();
                   });

  const std::string low = lower(utterance);
  std::vector<bool> locked(utterance.size(), false);
  struct Span {
    std::size_t start, len;
    std::string token;
  };
  std::vector<Span> spans;
  for (Target& t : targets) {
    std::size_t pos = 0;
    while ((pos = low.find(t.value_lower, pos)) != std::string::npos) {
      const std::size_t end = pos + t.value_lower.size();
      const bool left_ok = pos == 0 || !is_word_char(low[pos - 1]);
      const bool right_ok = end == low.size() || !is_word_char(low[end]);
      bool free = true;
      for (std::size_t j = pos; j < end && free; ++j) free = !locked[j];
      if (left_ok && right_ok && free) {
        for (std::size_t j = pos; j < end; ++j) locked[j] = true;
        spans.push_back({pos, t.value_lower.size(), t.token});
        t.matched = true;
        pos = end;
      } else {
        ++pos;
      }
    }
  }
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });

  std::string rebuilt;
  std::size_t cursor = 0;
  for (const Span& s : spans) {
    rebuilt += utterance.substr(cursor, s.start - cursor);
    rebuilt += s.token;
    cursor = s.start + s.len;
  }
  rebuilt += utterance.substr(cursor);

  DelexUtterance out;
  std::istringstream is(rebuilt);
  std::string word;
  while (is >> word) out.surface.push_back(word);
  for (const Target& t : targets) {
    if (!t.matched) out.unmatched_values.push_back(t.value_lower);
  }
  return out;
}

std::string lexicalize_text(const std::string& delex_text,
                            const DialogueAct& da) {
  static const std::regex slot_re("SLOT_([A-Za-z0-9_]+)_([0-9]+)");
  std::string out;
  auto begin = std::sregex_iterator(delex_text.begin(), delex_text.end(),
                                    slot_re);
  auto end = std::sregex_iterator();
  std::size_t cursor = 0;
  for (auto it = begin; it != end; ++it) {
    const std::smatch& m = *it;
    const std::string slot = lower(m[1].str());
    const int want = std::stoi(m[2].str());
    int seen = 0;
    const SlotValue* found = nullptr;
    for (const SlotValue& sv : da.pairs) {
      if (sv.slot == slot && ++seen == want) {
        found = &sv;
        break;
      }
    }
    if (!found) {
      throw DataError("cannot lexicalize token '" + m[0].str() +
                      "': no matching pair in " + da.to_string());
    }
    out += delex_text.substr(cursor, static_cast<std::size_t>(m.position()) -
                                         cursor);
    out += found->value;
    cursor = static_cast<std::size_t>(m.position() + m.length());
  }
  out += delex_text.substr(cursor);
  return out;
}

std::string lexicalize(const DelexUtterance& delex, const DialogueAct& da) {
  return lexicalize_text(delex.surface_text(), da);
}

bool parse_slot_token(const std::string& token, SlotTokenRef* out) {
  static const std::regex slot_re("SLOT_([A-Za-z0-9_]+)_([0-9]+)");
  std::smatch m;
  if (!std::regex_match(token, m, slot_re)) return false;
  if (out) {
    out->slot = lower(m[1].str());
    out->index = std::stoi(m[2].str());
  }
  return true;
}

}  // namespace eadgen
