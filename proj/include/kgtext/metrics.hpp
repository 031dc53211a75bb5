#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgtext/kg.hpp"
#include "kgtext/lingo.hpp"
#include "kgtext/model.hpp"

namespace kgtext {

struct EmptyCorpus : std::runtime_error {
  EmptyCorpus() : std::runtime_error("empty evaluation corpus") {}
};

struct TextEvalInstance {
  std::vector<std::string> prediction;                // tokens
  std::vector<std::vector<std::string>> references;   // >= 1
};

struct GraphEvalInstance {
  KnowledgeGraph prediction;
  std::vector<KnowledgeGraph> references;  // >= 1
};

namespace detail {

inline std::vector<std::string> lowered(const std::vector<std::string>& toks) {
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(lower_ascii(t));
  return out;
}

using Ngram = std::vector<std::string>;

inline std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& toks,
                                                 std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[Ngram(toks.begin() + i, toks.begin() + i + n)];
  }
  return counts;
}

inline std::map<std::string, std::size_t> char_ngram_counts(const std::string& s, std::size_t n) {
  std::map<std::string, std::size_t> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
  return counts;
}

template <class K>
std::size_t clipped_overlap(const std::map<K, std::size_t>& hyp, const std::map<K, std::size_t>& ref) {
  std::size_t m = 0;
  for (const auto& [k, c] : hyp) {
    auto it = ref.find(k);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

}  // namespace detail

// Corpus-level BLEU-4, lowercased, multi-reference: clipped counts take the
// max clip over references; brevity penalty uses the closest-length reference
// (ties towards the shorter one). Zero counts in orders 2..4 are smoothed
// add-one: (m+1)/(t+1). A zero unigram precision yields 0.
inline double bleu(const std::vector<TextEvalInstance>& corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  constexpr std::size_t kMaxOrder = 4;
  std::size_t matches[kMaxOrder] = {0, 0, 0, 0};
  std::size_t totals[kMaxOrder] = {0, 0, 0, 0};
  std::size_t hyp_len = 0, ref_len = 0;

  for (const auto& inst : corpus) {
    if (inst.references.empty()) throw EmptyCorpus();
    auto hyp = detail::lowered(inst.prediction);
    hyp_len += hyp.size();
    std::size_t closest = 0;
    bool first = true;
    for (const auto& ref : inst.references) {
      std::size_t rl = ref.size();
      auto dist = [&](std::size_t l) {
        return l > hyp.size() ? l - hyp.size() : hyp.size() - l;
      };
      if (first || dist(rl) < dist(closest) || (dist(rl) == dist(closest) && rl < closest)) {
        closest = rl;
      }
      first = false;
    }
    ref_len += closest;

    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      auto hc = detail::ngram_counts(hyp, n);
      std::map<detail::Ngram, std::size_t> max_clip;
      for (const auto& ref : inst.references) {
        auto rc = detail::ngram_counts(detail::lowered(ref), n);
        for (const auto& [k, c] : rc) {
          auto& slot = max_clip[k];
          slot = std::max(slot, c);
        }
      }
      matches[n - 1] += detail::clipped_overlap(hc, max_clip);
      for (const auto& [k, c] : hc) totals[n - 1] += c;
    }
  }

  if (totals[0] == 0 || matches[0] == 0) return 0.0;
  double log_sum = 0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    double p;
    if (matches[n] == 0) {
      p = static_cast<double>(matches[n] + 1) / static_cast<double>(totals[n] + 1);
    } else {
      p = static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
    }
    log_sum += std::log(p);
  }
  double bp = 1.0;
  if (hyp_len < ref_len && hyp_len > 0) {
    bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  }
  return 100.0 * bp * std::exp(log_sum / kMaxOrder);
}

// Sentence-level chrF++: character n-grams 1..6 over the whitespace-stripped
// string plus word 1-2-grams, F-score with beta = 2, macro-averaged over the
// orders (orders with no n-grams on either side are skipped).
inline double chrf_pp_sentence(const std::string& hyp, const std::string& ref) {
  constexpr double kBeta2 = 4.0;  // beta = 2
  auto strip_ws = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out += c;
    }
    return out;
  };
  std::string h = strip_ws(lower_ascii(hyp)), r = strip_ws(lower_ascii(ref));
  auto hw = detail::lowered(split_ws(hyp)), rw = detail::lowered(split_ws(ref));

  double f_sum = 0;
  std::size_t used = 0;
  auto add_order = [&](std::size_t hyp_total, std::size_t ref_total, std::size_t match) {
    if (hyp_total == 0 && ref_total == 0) return;
    ++used;
    if (hyp_total == 0 || ref_total == 0 || match == 0) return;  // F = 0
    double p = static_cast<double>(match) / static_cast<double>(hyp_total);
    double rr = static_cast<double>(match) / static_cast<double>(ref_total);
    f_sum += (1.0 + kBeta2) * p * rr / (kBeta2 * p + rr);
  };

  for (std::size_t n = 1; n <= 6; ++n) {
    auto hc = detail::char_ngram_counts(h, n);
    auto rc = detail::char_ngram_counts(r, n);
    std::size_t ht = 0, rt = 0;
    for (const auto& [k, c] : hc) ht += c;
    for (const auto& [k, c] : rc) rt += c;
    add_order(ht, rt, detail::clipped_overlap(hc, rc));
  }
  for (std::size_t n = 1; n <= 2; ++n) {
    auto hc = detail::ngram_counts(hw, n);
    auto rc = detail::ngram_counts(rw, n);
    std::size_t ht = 0, rt = 0;
    for (const auto& [k, c] : hc) ht += c;
    for (const auto& [k, c] : rc) rt += c;
    add_order(ht, rt, detail::clipped_overlap(hc, rc));
  }
  if (used == 0) return 0.0;
  return 100.0 * f_sum / static_cast<double>(used);
}

// Corpus chrF++ = mean over instances of the best reference's sentence score.
inline double chrf_pp(const std::vector<TextEvalInstance>& corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  double sum = 0;
  for (const auto& inst : corpus) {
    if (inst.references.empty()) throw EmptyCorpus();
    std::string hyp = join_ws(inst.prediction);
    double best = 0;
    for (const auto& ref : inst.references) {
      best = std::max(best, chrf_pp_sentence(hyp, join_ws(ref)));
    }
    sum += best;
  }
  return sum / static_cast<double>(corpus.size());
}

struct F1Result {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Micro-averaged fact F1. Predicted facts use set semantics after lowercasing
// all three fields; a fact is correct if it occurs in at least one reference.
// Per-instance recall denominator is the largest reference's fact count.
inline F1Result fact_f1(const std::vector<GraphEvalInstance>& corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  auto lower_fact = [](const Fact& f) {
    return Fact{lower_ascii(f.subject), lower_ascii(f.predicate), lower_ascii(f.object)};
  };
  std::size_t tp = 0, fp = 0, denom = 0;
  for (const auto& inst : corpus) {
    if (inst.references.empty()) throw EmptyCorpus();
    std::set<Fact> pred;
    for (const auto& f : inst.prediction.facts) pred.insert(lower_fact(f));
    std::set<Fact> ref_union;
    std::size_t max_ref = 0;
    for (const auto& rg : inst.references) {
      std::set<Fact> rf;
      for (const auto& f : rg.facts) rf.insert(lower_fact(f));
      max_ref = std::max(max_ref, rf.size());
      ref_union.insert(rf.begin(), rf.end());
    }
    denom += max_ref;
    for (const auto& f : pred) {
      if (ref_union.count(f)) {
        ++tp;
      } else {
        ++fp;
      }
    }
  }
  F1Result res;
  res.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  res.recall = denom ? static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
  res.f1 = (res.precision + res.recall > 0)
               ? 2 * res.precision * res.recall / (res.precision + res.recall)
               : 0.0;
  return res;
}

struct UnsupScore {
  double text_bleu = 0;   // text -> graph -> text round trip
  double graph_f1 = 0;    // graph -> text -> graph round trip
};

// Fully unsupervised selection criterion: round-trip fidelity on the
// unlabeled pools. Texts are scored with BLEU against their back-and-forth
// translation; graphs with fact F1 of the round-trip graph.
template <class T>
UnsupScore m_unsup(const Seq2SeqModel<T>& model, const std::vector<TokenSeq>& texts,
                   const std::vector<TokenSeq>& graphs) {
  UnsupScore score;
  if (!texts.empty()) {
    std::vector<TextEvalInstance> insts;
    for (const auto& t : texts) {
      if (t.tokens.empty()) continue;
      auto g = model.decode_greedy(t, Modality::GRAPH);
      TextEvalInstance inst;
      inst.references.push_back(t.tokens);
      if (!g.tokens.tokens.empty()) {
        inst.prediction = model.decode_greedy(g.tokens, Modality::TEXT).tokens.tokens;
      }
      insts.push_back(std::move(inst));
    }
    if (!insts.empty()) score.text_bleu = bleu(insts);
  }
  if (!graphs.empty()) {
    std::vector<GraphEvalInstance> insts;
    for (const auto& g : graphs) {
      if (g.tokens.empty()) continue;
      auto t = model.decode_greedy(g, Modality::TEXT);
      GraphEvalInstance inst;
      inst.references.push_back(deserialize(g).graph);
      if (!t.tokens.tokens.empty()) {
        auto g2 = model.decode_greedy(t.tokens, Modality::GRAPH);
        inst.prediction = deserialize(g2.tokens).graph;
      }
      insts.push_back(std::move(inst));
    }
    if (!insts.empty()) score.graph_f1 = fact_f1(insts).f1;
  }
  return score;
}

enum class Task { G2T, T2G };

struct ValInstance {
  TokenSeq graph;                                    // serialized
  std::vector<std::vector<std::string>> text_refs;   // token sequences
  std::vector<KnowledgeGraph> graph_refs;
  std::vector<std::string> text_tokens;              // one source text
};

// Fixed-seed 100-instance validation sample; uses the whole set (with a
// warning flag) when val is smaller.
inline std::vector<std::size_t> m_val_sample(std::size_t val_size, std::uint64_t seed,
                                             bool* warned_small = nullptr,
                                             std::size_t sample_size = 100) {
  std::vector<std::size_t> idx(val_size);
  for (std::size_t i = 0; i < val_size; ++i) idx[i] = i;
  if (val_size <= sample_size) {
    if (warned_small) *warned_small = val_size < sample_size;
    return idx;
  }
  Rng rng = substream(seed, "mval");
  rng.shuffle(idx);
  idx.resize(sample_size);
  std::sort(idx.begin(), idx.end());
  if (warned_small) *warned_small = false;
  return idx;
}

template <class T>
double m_val(const Seq2SeqModel<T>& model, const std::vector<ValInstance>& val, Task task,
             std::uint64_t seed) {
  auto idx = m_val_sample(val.size(), seed);
  if (task == Task::G2T) {
    std::vector<TextEvalInstance> insts;
    for (auto i : idx) {
      TextEvalInstance inst;
      inst.references = val[i].text_refs;
      if (!val[i].graph.tokens.empty()) {
        inst.prediction = model.decode_greedy(val[i].graph, Modality::TEXT).tokens.tokens;
      }
      insts.push_back(std::move(inst));
    }
    return insts.empty() ? 0.0 : bleu(insts);
  }
  std::vector<GraphEvalInstance> insts;
  for (auto i : idx) {
    GraphEvalInstance inst;
    inst.references = val[i].graph_refs;
    if (!val[i].text_tokens.empty()) {
      TokenSeq src{Modality::TEXT, val[i].text_tokens};
      auto out = model.decode_greedy(src, Modality::GRAPH);
      inst.prediction = deserialize(out.tokens).graph;
    }
    insts.push_back(std::move(inst));
  }
  return insts.empty() ? 0.0 : fact_f1(insts).f1;
}

}  // namespace kgtext
