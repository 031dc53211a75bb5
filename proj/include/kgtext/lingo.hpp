#pragma once

#include <cctype>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgtext/common.hpp"
#include "kgtext/lingo_data.hpp"

namespace kgtext {

enum class PosTag { NOUN, VERB, ADJ, STOP, OTHER };

struct PosToken {
  std::string surface;
  PosTag tag = PosTag::OTHER;

  friend bool operator==(const PosToken&, const PosToken&) = default;
};

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_copula(std::string_view lowered) {
  return lowered == "is" || lowered == "are" || lowered == "was" || lowered == "were";
}

// Deterministic lexicon+suffix tagger. The interface is pluggable (pos_tag is
// a free function of the lexicon) so a statistical tagger could be swapped in;
// the rule system only needs coarse NOUN/VERB/ADJ distinctions.
class Lexicon {
public:
  Lexicon() = default;

  static Lexicon bundled() {
    Lexicon lex;
    for (auto sw : lingo_data::kStopwords) lex.stopwords_.emplace(sw);
    for (auto [w, t] : lingo_data::kLexicon) lex.words_.emplace(w, from_char(t));
    for (auto [s, t] : lingo_data::kSuffixRules) lex.suffixes_.emplace_back(s, from_char(t));
    return lex;
  }

  // one `word<TAB>tag` per line, tag in {NOUN, VERB, ADJ}
  void load_words(const std::string& path) { load_tsv(path, words_); }

  // one `suffix<TAB>tag` per line, checked in file order
  void load_suffixes(const std::string& path) {
    std::unordered_map<std::string, PosTag> tmp;
    suffixes_.clear();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open suffix file: " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw std::runtime_error("malformed suffix line: " + line);
      suffixes_.emplace_back(line.substr(0, tab), parse_tag(line.substr(tab + 1)));
    }
  }

  // one stopword per line
  void load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stopword file: " + path);
    stopwords_.clear();
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) stopwords_.insert(lower_ascii(line));
    }
  }

  bool is_stopword(std::string_view lowered) const {
    return stopwords_.count(std::string(lowered)) > 0;
  }

  // stopword check first, then exact lookup, then suffix fallback, else OTHER;
  // copulas always tag VERB regardless of any loaded stopword list
  PosTag tag(std::string_view surface) const {
    std::string lowered = lower_ascii(surface);
    if (is_copula(lowered)) return PosTag::VERB;
    if (is_stopword(lowered)) return PosTag::STOP;
    if (auto it = words_.find(lowered); it != words_.end()) return it->second;
    for (const auto& [suf, t] : suffixes_) {
      if (lowered.size() > suf.size() &&
          lowered.compare(lowered.size() - suf.size(), suf.size(), suf) == 0) {
        return t;
      }
    }
    return PosTag::OTHER;
  }

private:
  static PosTag from_char(char c) {
    switch (c) {
      case 'N': return PosTag::NOUN;
      case 'V': return PosTag::VERB;
      case 'A': return PosTag::ADJ;
      default: throw std::logic_error("bad tag char");
    }
  }

  static PosTag parse_tag(const std::string& s) {
    if (s == "NOUN") return PosTag::NOUN;
    if (s == "VERB") return PosTag::VERB;
    if (s == "ADJ") return PosTag::ADJ;
    throw std::runtime_error("unknown tag: " + s);
  }

  void load_tsv(const std::string& path, std::unordered_map<std::string, PosTag>& into) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw std::runtime_error("malformed lexicon line: " + line);
      into[lower_ascii(line.substr(0, tab))] = parse_tag(line.substr(tab + 1));
    }
  }

  std::unordered_map<std::string, PosTag> words_;
  std::vector<std::pair<std::string, PosTag>> suffixes_;
  std::unordered_set<std::string> stopwords_;
};

inline bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

// Whitespace split, then leading/trailing ASCII punctuation is peeled off
// into separate tokens. Inner hyphens and apostrophes stay put ("baby's").
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& raw : split_ws(text)) {
    std::size_t b = 0, e = raw.size();
    while (b < e && is_ascii_punct(raw[b])) ++b;
    while (e > b && is_ascii_punct(raw[e - 1])) --e;
    if (b == e) {  // all punctuation
      for (char c : raw) out.emplace_back(1, c);
      continue;
    }
    for (std::size_t i = 0; i < b; ++i) out.emplace_back(1, raw[i]);
    out.emplace_back(raw.substr(b, e - b));
    for (std::size_t i = e; i < raw.size(); ++i) out.emplace_back(1, raw[i]);
  }
  return out;
}

inline std::vector<PosToken> pos_tag(const std::vector<std::string>& tokens, const Lexicon& lex) {
  std::vector<PosToken> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back({t, lex.tag(t)});
  return out;
}

}  // namespace kgtext
