#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgtext/checkpoint.hpp"
#include "kgtext/metrics.hpp"
#include "kgtext/model.hpp"
#include "kgtext/noise.hpp"
#include "kgtext/optim.hpp"

namespace kgtext {

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch_train = 10;
  std::size_t batch_backtranslate = 64;
  std::size_t max_epochs = 30;
  std::size_t patience_supervised = 10;
  std::size_t max_unsup_iterations = 30;
  double grad_clip = 5.0;
  Regime regime = Regime::SAMPLED;
  std::uint64_t seed = 0;
};

struct EmptySupervisedPool : std::runtime_error {
  EmptySupervisedPool() : std::runtime_error("supervised pool is empty") {}
};

struct NoCheckpoints : std::runtime_error {
  NoCheckpoints() : std::runtime_error("no checkpoints to select from") {}
};

// Unlabeled pools D_G and D_T plus the optional supervised pool. Reads of the
// supervised pairs are counted so unsupervised runs can assert zero access.
class CorpusPools {
public:
  std::vector<TokenSeq> graphs;  // serialized, Modality::GRAPH
  std::vector<TokenSeq> texts;   // Modality::TEXT

  void set_pairs(std::vector<std::pair<TokenSeq, TokenSeq>> pairs) {  // (graph, text)
    pairs_ = std::move(pairs);
  }
  const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs() const {
    ++pair_reads_;
    return pairs_;
  }
  bool has_pairs() const { return !pairs_.empty(); }
  std::size_t pair_read_count() const { return pair_reads_; }

private:
  std::vector<std::pair<TokenSeq, TokenSeq>> pairs_;
  mutable std::size_t pair_reads_ = 0;
};

// One training example: reconstruct target (of its own modality) from source.
struct TrainPair {
  TokenSeq source;
  TokenSeq target;
};

namespace detail {

// Homogeneous batches: every batch has a single target modality.
inline std::vector<std::vector<TrainPair>> make_batches(std::vector<TrainPair> pairs,
                                                        std::size_t batch_size, Rng& rng) {
  std::vector<TrainPair> by_mod[2];
  for (auto& p : pairs) {
    by_mod[p.target.modality == Modality::TEXT ? 0 : 1].push_back(std::move(p));
  }
  std::vector<std::vector<TrainPair>> lists[2];
  for (int m = 0; m < 2; ++m) {
    rng.shuffle(by_mod[m]);
    for (std::size_t i = 0; i < by_mod[m].size(); i += batch_size) {
      std::vector<TrainPair> batch;
      for (std::size_t j = i; j < std::min(i + batch_size, by_mod[m].size()); ++j) {
        batch.push_back(std::move(by_mod[m][j]));
      }
      lists[m].push_back(std::move(batch));
    }
  }
  // alternate text/graph batches
  std::vector<std::vector<TrainPair>> out;
  std::size_t a = 0, b = 0;
  while (a < lists[0].size() || b < lists[1].size()) {
    if (a < lists[0].size()) out.push_back(std::move(lists[0][a++]));
    if (b < lists[1].size()) out.push_back(std::move(lists[1][b++]));
  }
  return out;
}

template <class T>
double train_batch(Seq2SeqModel<T>& model, Adam<T>& adam, const std::vector<TrainPair>& batch,
                   double grad_clip, Rng& dropout_rng) {
  double loss_sum = 0;
  for (const auto& pair : batch) {
    if (pair.source.tokens.empty() || pair.target.tokens.empty()) continue;
    Tape<T> tape;
    auto loss = model.nll_loss(tape, pair.source, pair.target, pair.target.modality, true,
                               &dropout_rng);
    auto scaled = tape.scale(loss, static_cast<T>(1.0 / batch.size()));
    tape.backward(scaled);
    loss_sum += static_cast<double>(tape.val(loss)(0, 0));
  }
  clip_global_norm(model, grad_clip);
  adam.step(model);
  return loss_sum / static_cast<double>(batch.size());
}

}  // namespace detail

struct EpochStats {
  double mean_loss = 0;
  double first_batch_loss = 0;
  std::size_t pairs_consumed = 0;
  std::size_t batches = 0;
};

// Denoising pretraining epoch. SAMPLED applies every enabled noise function
// individually to every instance (5x the pairs); COMPOSED applies the single
// pipeline. no_noise yields identity pairs.
template <class T>
EpochStats pretrain_denoise_epoch(Seq2SeqModel<T>& model, Adam<T>& adam, const CorpusPools& pools,
                                  Regime regime, const NoiseConfig& noise_cfg,
                                  const TrainConfig& cfg, const Lexicon& lex,
                                  bool no_noise = false) {
  std::vector<TrainPair> pairs;
  std::uint64_t idx = 0;
  auto add_instance = [&](const TokenSeq& inst) {
    Rng rng = substream(cfg.seed, "pretrain-noise", idx++);
    if (no_noise) {
      auto p = corrupt_identity(inst);
      pairs.push_back({p.source, p.target});
    } else if (regime == Regime::SAMPLED) {
      for (NoiseFn f : noise_cfg.enabled_fns()) {
        auto p = corrupt_with(inst, f, noise_cfg, lex, rng);
        pairs.push_back({std::move(p.source), std::move(p.target)});
      }
    } else {
      auto p = corrupt_composed(inst, noise_cfg, lex, rng);
      pairs.push_back({std::move(p.source), std::move(p.target)});
    }
  };
  for (const auto& g : pools.graphs) add_instance(g);
  for (const auto& t : pools.texts) add_instance(t);

  EpochStats stats;
  stats.pairs_consumed = pairs.size();
  Rng shuffle_rng = substream(cfg.seed, "pretrain-shuffle");
  Rng dropout_rng = substream(cfg.seed, "pretrain-dropout");
  auto batches = detail::make_batches(std::move(pairs), cfg.batch_train, shuffle_rng);
  for (const auto& batch : batches) {
    double l = detail::train_batch(model, adam, batch, cfg.grad_clip, dropout_rng);
    if (stats.batches == 0) stats.first_batch_loss = l;
    stats.mean_loss += l;
    ++stats.batches;
  }
  if (stats.batches) stats.mean_loss /= static_cast<double>(stats.batches);
  return stats;
}

struct BacktranslateResult {
  std::vector<TrainPair> pairs;  // source = model output, target = original
  std::size_t skipped = 0;
};

// Greedy-decode a pool into the opposite modality. batch_backtranslate only
// groups the work (decoding is per instance); empty decodes are skipped and
// counted.
template <class T>
BacktranslateResult backtranslate_corpus(const Seq2SeqModel<T>& model,
                                         const std::vector<TokenSeq>& pool,
                                         Modality decode_type) {
  BacktranslateResult res;
  for (const auto& inst : pool) {
    if (inst.tokens.empty()) {
      ++res.skipped;
      continue;
    }
    auto out = model.decode_greedy(inst, decode_type);
    if (out.tokens.tokens.empty()) {
      ++res.skipped;
      continue;
    }
    res.pairs.push_back({out.tokens, inst});
  }
  return res;
}

struct IterationStats {
  double mean_denoise_loss = 0;
  double mean_back_loss = 0;
  std::size_t back_pairs = 0;
  std::size_t back_skipped = 0;
};

// One backtranslation iteration: regenerate backtranslations from the current
// model, then one epoch over interleaved L_back and L_denoise batches (one
// noise draw per instance for the denoise side).
template <class T>
IterationStats unsupervised_iteration(Seq2SeqModel<T>& model, Adam<T>& adam,
                                      const CorpusPools& pools, Regime regime,
                                      const NoiseConfig& noise_cfg, const TrainConfig& cfg,
                                      const Lexicon& lex, std::uint64_t iteration,
                                      bool no_noise = false) {
  auto bt_g = backtranslate_corpus(model, pools.graphs, Modality::TEXT);
  auto bt_t = backtranslate_corpus(model, pools.texts, Modality::GRAPH);

  std::vector<TrainPair> back_pairs;
  for (auto& p : bt_g.pairs) back_pairs.push_back(std::move(p));   // target = graph
  for (auto& p : bt_t.pairs) back_pairs.push_back(std::move(p));   // target = text

  std::vector<TrainPair> denoise_pairs;
  std::uint64_t idx = 0;
  auto add_denoise = [&](const TokenSeq& inst) {
    Rng rng = substream(cfg.seed, "iter-noise", (iteration << 32) | idx++);
    CorruptPair p = no_noise ? corrupt_identity(inst) : corrupt(inst, regime, noise_cfg, lex, rng);
    denoise_pairs.push_back({std::move(p.source), std::move(p.target)});
  };
  for (const auto& g : pools.graphs) add_denoise(g);
  for (const auto& t : pools.texts) add_denoise(t);

  IterationStats stats;
  stats.back_pairs = back_pairs.size();
  stats.back_skipped = bt_g.skipped + bt_t.skipped;

  Rng shuffle_rng = substream(cfg.seed, "iter-shuffle", iteration);
  Rng dropout_rng = substream(cfg.seed, "iter-dropout", iteration);
  auto back_batches = detail::make_batches(std::move(back_pairs), cfg.batch_train, shuffle_rng);
  auto den_batches = detail::make_batches(std::move(denoise_pairs), cfg.batch_train, shuffle_rng);

  std::size_t nb = 0, nd = 0, a = 0, b = 0;
  double back_sum = 0, den_sum = 0;
  while (a < back_batches.size() || b < den_batches.size()) {
    if (a < back_batches.size()) {
      back_sum += detail::train_batch(model, adam, back_batches[a++], cfg.grad_clip, dropout_rng);
      ++nb;
    }
    if (b < den_batches.size()) {
      den_sum += detail::train_batch(model, adam, den_batches[b++], cfg.grad_clip, dropout_rng);
      ++nd;
    }
  }
  if (nb) stats.mean_back_loss = back_sum / static_cast<double>(nb);
  if (nd) stats.mean_denoise_loss = den_sum / static_cast<double>(nd);
  return stats;
}

// One supervised epoch: each (graph, text) pair trains both directions, in
// homogeneous batches. Returns the mean per-example loss.
template <class T>
double supervised_epoch(Seq2SeqModel<T>& model, Adam<T>& adam,
                        const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs,
                        const TrainConfig& cfg, std::uint64_t epoch) {
  if (pairs.empty()) throw EmptySupervisedPool();
  std::vector<TrainPair> examples;
  examples.reserve(pairs.size() * 2);
  for (const auto& [g, t] : pairs) {
    examples.push_back({t, g});  // t -> g
    examples.push_back({g, t});  // g -> t
  }
  Rng shuffle_rng = substream(cfg.seed, "sup-shuffle", epoch);
  Rng dropout_rng = substream(cfg.seed, "sup-dropout", epoch);
  auto batches = detail::make_batches(std::move(examples), cfg.batch_train, shuffle_rng);
  double sum = 0;
  for (const auto& batch : batches) {
    sum += detail::train_batch(model, adam, batch, cfg.grad_clip, dropout_rng);
  }
  return batches.empty() ? 0.0 : sum / static_cast<double>(batches.size());
}

// Validation L_sup (both directions, no dropout, no update).
template <class T>
double supervised_loss(Seq2SeqModel<T>& model,
                       const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs) {
  if (pairs.empty()) throw EmptySupervisedPool();
  double sum = 0;
  std::size_t n = 0;
  for (const auto& [g, t] : pairs) {
    if (g.tokens.empty() || t.tokens.empty()) continue;
    for (auto [src, tgt] : {std::pair{&t, &g}, std::pair{&g, &t}}) {
      Tape<T> tape;
      auto loss = model.nll_loss(tape, *src, *tgt, tgt->modality, false);
      sum += static_cast<double>(tape.val(loss)(0, 0));
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

// argmax under the criterion scores; ties broken by the later checkpoint.
inline std::size_t select_checkpoint(const std::vector<double>& scores) {
  if (scores.empty()) throw NoCheckpoints();
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] >= scores[best]) best = i;
  }
  return best;
}

}  // namespace kgtext
