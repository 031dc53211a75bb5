#pragma once

#include <set>
#include <string>
#include <vector>

#include "kgtext/kg.hpp"
#include "kgtext/lingo.hpp"

namespace kgtext {

// Graph serialization -> text: drop SEP, EOF -> "and", "attr" in predicate
// position -> "is". Tolerates arbitrary (noisy) serializations.
inline TokenSeq rule_g2t(const TokenSeq& s) {
  TokenSeq out;
  out.modality = Modality::TEXT;
  // track SEP count within the current segment so only predicate-slot "attr"
  // maps to "is"; an entity literally named "attr" passes through
  std::size_t seps_seen = 0;
  for (const auto& tok : s.tokens) {
    if (tok == kSep) {
      ++seps_seen;
      continue;
    }
    if (tok == kEof) {
      seps_seen = 0;
      out.tokens.emplace_back("and");
      continue;
    }
    if (tok == kAttr && seps_seen == 1) {
      out.tokens.emplace_back("is");
    } else {
      out.tokens.push_back(tok);
    }
  }
  return out;
}

// Text -> graph via two heuristics over the stop-filtered token sequence:
//   1. each verb v at position i emits (word[i-1], v, word[i+1]) when both
//      neighbors exist; copulas emit predicate attr
//   2. each adjective a emits (n, attr, a) for the first noun n after a
// Heuristic-1 facts come first, both in text order; duplicates are removed.
inline KnowledgeGraph rule_t2g(const std::string& text, const Lexicon& lex) {
  auto tagged = pos_tag(tokenize(text), lex);

  std::vector<PosToken> content;
  for (auto& pt : tagged) {
    if (pt.tag != PosTag::STOP) content.push_back(pt);
  }

  KnowledgeGraph g;
  std::set<Fact> seen;
  auto emit = [&](Fact f) {
    if (seen.insert(f).second) g.facts.push_back(std::move(f));
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i].tag != PosTag::VERB) continue;
    if (i == 0 || i + 1 >= content.size()) continue;
    bool copula = is_copula(lower_ascii(content[i].surface));
    emit({content[i - 1].surface,
          copula ? std::string(kAttr) : content[i].surface,
          content[i + 1].surface});
  }
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i].tag != PosTag::ADJ) continue;
    for (std::size_t j = i + 1; j < content.size(); ++j) {
      if (content[j].tag == PosTag::NOUN) {
        emit({content[j].surface, std::string(kAttr), content[i].surface});
        break;
      }
    }
  }
  return g;
}

}  // namespace kgtext
