#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <vector>

#include "kgtext/common.hpp"
#include "kgtext/kg.hpp"
#include "kgtext/rules.hpp"

namespace kgtext {

enum class NoiseFn { SWAP, DROP, BLANK, REPEAT, RULE };

inline constexpr std::array<NoiseFn, 5> kAllNoiseFns = {
    NoiseFn::SWAP, NoiseFn::DROP, NoiseFn::BLANK, NoiseFn::REPEAT, NoiseFn::RULE};

inline const char* noise_fn_name(NoiseFn f) {
  switch (f) {
    case NoiseFn::SWAP: return "swap";
    case NoiseFn::DROP: return "drop";
    case NoiseFn::BLANK: return "blank";
    case NoiseFn::REPEAT: return "repeat";
    case NoiseFn::RULE: return "rule";
  }
  return "?";
}

enum class Regime { SAMPLED, COMPOSED };

inline constexpr int kUnboundedSwap = -1;

struct NoiseConfig {
  double p_drop = 0.1;
  double p_blank = 0.2;
  double p_repeat = 0.2;
  int k_text = 3;
  int k_graph = kUnboundedSwap;
  std::uint64_t seed = 0;
  // ablation subset; empty means "all five"
  std::vector<NoiseFn> enabled;

  std::vector<NoiseFn> enabled_fns() const {
    if (enabled.empty()) return {kAllNoiseFns.begin(), kAllNoiseFns.end()};
    return enabled;
  }
};

// The unit of noise: a word for TEXT, a whole serialized fact for GRAPH.
using NoiseUnit = std::vector<std::string>;

inline std::vector<NoiseUnit> to_units(const TokenSeq& s) {
  std::vector<NoiseUnit> units;
  if (s.modality == Modality::TEXT) {
    units.reserve(s.tokens.size());
    for (const auto& t : s.tokens) units.push_back({t});
    return units;
  }
  if (s.tokens.empty()) return units;
  units.emplace_back();
  for (const auto& t : s.tokens) {
    if (t == kEof) {
      units.emplace_back();
    } else {
      units.back().push_back(t);
    }
  }
  return units;
}

inline TokenSeq from_units(const std::vector<NoiseUnit>& units, Modality m) {
  TokenSeq s;
  s.modality = m;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i && m == Modality::GRAPH) s.tokens.emplace_back(kEof);
    s.tokens.insert(s.tokens.end(), units[i].begin(), units[i].end());
  }
  return s;
}

// Bounded-locality permutation: add uniform(0, k+1) jitter to each index and
// stable-sort. Every unit moves at most k positions. k < 0 means unbounded
// and yields a uniform random permutation.
inline std::vector<NoiseUnit> noise_swap(std::vector<NoiseUnit> units, int k, Rng& rng) {
  const std::size_t n = units.size();
  if (n < 2 || k == 0) return units;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (k < 0) {
    rng.shuffle(order);
  } else {
    std::vector<double> key(n);
    for (std::size_t i = 0; i < n; ++i) key[i] = static_cast<double>(i) + rng.uniform(0.0, k + 1.0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  }
  std::vector<NoiseUnit> out;
  out.reserve(n);
  for (auto i : order) out.push_back(std::move(units[i]));
  return out;
}

// Independent removal with probability p; a fully emptied non-empty input
// retains one uniformly chosen unit so sources never collapse to nothing.
inline std::vector<NoiseUnit> noise_drop(const std::vector<NoiseUnit>& units, double p, Rng& rng) {
  std::vector<NoiseUnit> out;
  out.reserve(units.size());
  for (const auto& u : units) {
    if (!rng.bernoulli(p)) out.push_back(u);
  }
  if (out.empty() && !units.empty()) {
    out.push_back(units[rng.uniform_int(units.size())]);
  }
  return out;
}

inline std::vector<NoiseUnit> noise_blank(std::vector<NoiseUnit> units, double p, Rng& rng) {
  for (auto& u : units) {
    if (rng.bernoulli(p)) u = {std::string(kBlanked)};
  }
  return units;
}

// After each original unit, with probability p insert one adjacent copy.
// Inserted copies are not themselves repetition candidates.
inline std::vector<NoiseUnit> noise_repeat(const std::vector<NoiseUnit>& units, double p, Rng& rng) {
  std::vector<NoiseUnit> out;
  out.reserve(units.size() * 2);
  for (const auto& u : units) {
    out.push_back(u);
    if (rng.bernoulli(p)) out.push_back(u);
  }
  return out;
}

// Noisy backtranslation via the rule systems; output modality flips.
inline TokenSeq noise_rule(const TokenSeq& s, const Lexicon& lex) {
  if (s.modality == Modality::GRAPH) return rule_g2t(s);
  auto g = rule_t2g(join_ws(s.tokens), lex);
  return serialize(g);
}

namespace detail {

inline int swap_radius(const NoiseConfig& cfg, Modality m) {
  return m == Modality::TEXT ? cfg.k_text : cfg.k_graph;
}

inline TokenSeq apply_unit_fn(const TokenSeq& s, NoiseFn f, const NoiseConfig& cfg, Rng& rng) {
  auto units = to_units(s);
  switch (f) {
    case NoiseFn::SWAP:
      units = noise_swap(std::move(units), swap_radius(cfg, s.modality), rng);
      break;
    case NoiseFn::DROP:
      units = noise_drop(units, cfg.p_drop, rng);
      break;
    case NoiseFn::BLANK:
      units = noise_blank(std::move(units), cfg.p_blank, rng);
      break;
    case NoiseFn::REPEAT:
      units = noise_repeat(units, cfg.p_repeat, rng);
      break;
    case NoiseFn::RULE:
      break;  // handled by caller
  }
  return from_units(units, s.modality);
}

}  // namespace detail

struct CorruptPair {
  TokenSeq source;
  TokenSeq target;
};

// Apply one specific noise function to a clean instance.
inline CorruptPair corrupt_with(const TokenSeq& instance, NoiseFn f, const NoiseConfig& cfg,
                                const Lexicon& lex, Rng& rng) {
  CorruptPair pair;
  pair.target = instance;
  if (f == NoiseFn::RULE) {
    pair.source = noise_rule(instance, lex);
  } else {
    pair.source = detail::apply_unit_fn(instance, f, cfg, rng);
  }
  return pair;
}

// Fixed pipeline repeat . blank . drop . swap . rule, restricted to the
// enabled subset. rule runs first, so the unit-level steps operate in the
// flipped modality.
inline CorruptPair corrupt_composed(const TokenSeq& instance, const NoiseConfig& cfg,
                                    const Lexicon& lex, Rng& rng) {
  CorruptPair pair;
  pair.target = instance;
  auto fns = cfg.enabled_fns();
  auto has = [&](NoiseFn f) { return std::find(fns.begin(), fns.end(), f) != fns.end(); };
  TokenSeq cur = instance;
  if (has(NoiseFn::RULE)) cur = noise_rule(cur, lex);
  for (NoiseFn f : {NoiseFn::SWAP, NoiseFn::DROP, NoiseFn::BLANK, NoiseFn::REPEAT}) {
    if (has(f)) cur = detail::apply_unit_fn(cur, f, cfg, rng);
  }
  pair.source = std::move(cur);
  return pair;
}

// target = instance, source = C(instance). SAMPLED draws one enabled function
// uniformly; COMPOSED applies the pipeline. An empty enabled set is treated
// as "all five"; use corrupt_identity for the no-noise ablation cell.
inline CorruptPair corrupt(const TokenSeq& instance, Regime regime, const NoiseConfig& cfg,
                           const Lexicon& lex, Rng& rng) {
  if (regime == Regime::COMPOSED) return corrupt_composed(instance, cfg, lex, rng);
  auto fns = cfg.enabled_fns();
  NoiseFn f = fns[rng.uniform_int(fns.size())];
  return corrupt_with(instance, f, cfg, lex, rng);
}

inline CorruptPair corrupt_identity(const TokenSeq& instance) {
  return {instance, instance};
}

}  // namespace kgtext
