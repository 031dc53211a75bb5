#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "kgtext/common.hpp"

namespace kgtext {

enum class Modality { TEXT, GRAPH };

// One subject-predicate-object assertion. Labels may be multi-word; they are
// stored as whitespace-tokenizable strings.
struct Fact {
  std::string subject;
  std::string predicate;
  std::string object;

  friend bool operator==(const Fact&, const Fact&) = default;
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

// Ordered list of facts. Order is preserved because serializations keep the
// dataset's original triple order.
struct KnowledgeGraph {
  std::vector<Fact> facts;

  friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;
};

struct TokenSeq {
  Modality modality = Modality::TEXT;
  std::vector<std::string> tokens;

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

struct ReservedTokenInLabel : std::runtime_error {
  explicit ReservedTokenInLabel(const std::string& label)
      : std::runtime_error("reserved token in label: " + label) {}
};

namespace detail {
inline void emit_label(const std::string& label, std::vector<std::string>& out) {
  auto toks = split_ws(label);
  if (toks.empty()) throw ReservedTokenInLabel("<empty>");
  for (auto& t : toks) {
    if (is_reserved_token(t)) throw ReservedTokenInLabel(label);
    out.push_back(std::move(t));
  }
}
}  // namespace detail

// Linear encoding: fields joined by SEP, facts joined by EOF, no trailing EOF.
inline TokenSeq serialize(const KnowledgeGraph& g) {
  TokenSeq s;
  s.modality = Modality::GRAPH;
  for (std::size_t i = 0; i < g.facts.size(); ++i) {
    if (i) s.tokens.emplace_back(kEof);
    detail::emit_label(g.facts[i].subject, s.tokens);
    s.tokens.emplace_back(kSep);
    detail::emit_label(g.facts[i].predicate, s.tokens);
    s.tokens.emplace_back(kSep);
    detail::emit_label(g.facts[i].object, s.tokens);
  }
  return s;
}

struct DeserializeResult {
  KnowledgeGraph graph;
  std::size_t malformed = 0;
};

// Lenient inverse of serialize: segments that do not split into exactly three
// non-empty BLANKED-free parts are dropped and counted. Model output is noisy
// by nature, so this never fails.
inline DeserializeResult deserialize(const TokenSeq& s) {
  DeserializeResult res;
  std::vector<std::vector<std::string>> segments(1);
  for (const auto& tok : s.tokens) {
    if (tok == kEof) {
      segments.emplace_back();
    } else {
      segments.back().push_back(tok);
    }
  }
  if (segments.size() == 1 && segments[0].empty()) return res;
  for (const auto& seg : segments) {
    std::vector<std::vector<std::string>> parts(1);
    for (const auto& tok : seg) {
      if (tok == kSep) {
        parts.emplace_back();
      } else {
        parts.back().push_back(tok);
      }
    }
    bool ok = parts.size() == 3;
    if (ok) {
      for (const auto& p : parts) {
        if (p.empty()) { ok = false; break; }
        for (const auto& t : p) {
          if (t == kBlanked) { ok = false; break; }
        }
        if (!ok) break;
      }
    }
    if (ok) {
      res.graph.facts.push_back({join_ws(parts[0]), join_ws(parts[1]), join_ws(parts[2])});
    } else {
      ++res.malformed;
    }
  }
  return res;
}

inline bool fact_multiset_equal(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  if (a.facts.size() != b.facts.size()) return false;
  std::map<Fact, int> counts;
  for (const auto& f : a.facts) ++counts[f];
  for (const auto& f : b.facts) {
    if (--counts[f] < 0) return false;
  }
  return true;
}

}  // namespace kgtext
