#include <catch2/catch_amalgamated.hpp>

#include "kgtext/training.hpp"

using namespace kgtext;

namespace {

CorpusPools tiny_pools() {
  CorpusPools pools;
  pools.graphs.push_back(serialize(KnowledgeGraph{{{"ball", "attr", "red"}}}));
  pools.graphs.push_back(serialize(KnowledgeGraph{{{"dog", "attr", "small"}}}));
  pools.texts.push_back({Modality::TEXT, split_ws("the red ball")});
  pools.texts.push_back({Modality::TEXT, split_ws("a small dog")});
  return pools;
}

Seq2SeqModel<float> tiny_model(const CorpusPools& pools, std::uint64_t seed) {
  auto vocab = Vocabulary::build({&pools.graphs, &pools.texts});
  ModelDims dims;
  dims.embed = 8;
  dims.hidden = 6;
  dims.dropout = 0.2;
  return Seq2SeqModel<float>(vocab, dims, seed);
}

}  // namespace

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  auto pools = tiny_pools();
  auto m = tiny_model(pools, 1);
  auto before = m.param("emb").value;
  Adam<float> adam(m, 1e-2);
  m.zero_grads();
  adam.step(m);
  REQUIRE(m.param("emb").value.isApprox(before));
}

TEST_CASE("adam first step moves each coordinate by about lr") {
  auto pools = tiny_pools();
  auto m = tiny_model(pools, 2);
  auto before = m.param("emb").value;
  Adam<float> adam(m, 1e-3);
  m.param("emb").grad.setConstant(0.7f);
  adam.step(m);
  // with constant gradient, mhat/sqrt(vhat) is ~1 on step one
  auto delta = (before - m.param("emb").value).eval();
  REQUIRE(delta.minCoeff() == Catch::Approx(1e-3).epsilon(1e-4));
  REQUIRE(delta.maxCoeff() == Catch::Approx(1e-3).epsilon(1e-4));
  REQUIRE(m.param("emb").grad.isZero());
}

TEST_CASE("adam rejects non-finite gradients without touching the model") {
  auto pools = tiny_pools();
  auto m = tiny_model(pools, 3);
  auto before = m.param("emb").value;
  Adam<float> adam(m);
  m.param("emb").grad(0, 0) = std::numeric_limits<float>::quiet_NaN();
  REQUIRE_THROWS_AS(adam.step(m), NonFiniteGradient);
  REQUIRE(m.param("emb").value.isApprox(before));
  REQUIRE(adam.step_count() == 0);
}

TEST_CASE("global norm clip caps the gradient norm") {
  auto pools = tiny_pools();
  auto m = tiny_model(pools, 4);
  m.zero_grads();
  m.param("emb").grad.setConstant(1.0f);
  double pre = clip_global_norm(m, 5.0);
  REQUIRE(pre > 5.0);
  double post = 0;
  for (const auto& p : m.params()) post += p.grad.squaredNorm();
  REQUIRE(std::sqrt(post) == Catch::Approx(5.0).epsilon(1e-5));
  // below the cap, gradients are untouched
  m.zero_grads();
  m.param("gate_b").grad.setConstant(0.5f);
  REQUIRE(clip_global_norm(m, 5.0) == Catch::Approx(0.5));
  REQUIRE(m.param("gate_b").grad(0, 0) == 0.5f);
}

TEST_CASE("batches are homogeneous in target modality and alternate") {
  std::vector<TrainPair> pairs;
  for (int i = 0; i < 13; ++i) {
    pairs.push_back({{Modality::TEXT, {"x"}}, {Modality::TEXT, {"t" + std::to_string(i)}}});
  }
  for (int i = 0; i < 7; ++i) {
    pairs.push_back({{Modality::TEXT, {"x"}}, {Modality::GRAPH, {"g" + std::to_string(i)}}});
  }
  Rng rng(5);
  auto batches = detail::make_batches(std::move(pairs), 4, rng);
  std::size_t total = 0;
  for (const auto& b : batches) {
    REQUIRE_FALSE(b.empty());
    REQUIRE(b.size() <= 4);
    for (const auto& p : b) REQUIRE(p.target.modality == b[0].target.modality);
    total += b.size();
  }
  REQUIRE(total == 20);
  // first two batches cover both modalities
  REQUIRE(batches.size() >= 2);
  REQUIRE(batches[0][0].target.modality != batches[1][0].target.modality);
}

TEST_CASE("sampled pretraining consumes one pair per enabled noise function") {
  auto pools = tiny_pools();
  auto m = tiny_model(pools, 6);
  Adam<float> adam(m);
  TrainConfig cfg;
  cfg.seed = 6;
  NoiseConfig ncfg;
  auto lex = Lexicon::bundled();

  auto sampled = pretrain_denoise_epoch(m, adam, pools, Regime::SAMPLED, ncfg, cfg, lex);
  REQUIRE(sampled.pairs_consumed == 4 * 5);

  auto m2 = tiny_model(pools, 6);
  Adam<float> adam2(m2);
  auto composed = pretrain_denoise_epoch(m2, adam2, pools, Regime::COMPOSED, ncfg, cfg, lex);
  REQUIRE(composed.pairs_consumed == 4);

  NoiseConfig two;
  two.enabled = {NoiseFn::DROP, NoiseFn::RULE};
  auto m3 = tiny_model(pools, 6);
  Adam<float> adam3(m3);
  auto partial = pretrain_denoise_epoch(m3, adam3, pools, Regime::SAMPLED, two, cfg, lex);
  REQUIRE(partial.pairs_consumed == 4 * 2);
}

TEST_CASE("pretraining reduces the loss over a few epochs") {
  auto pools = tiny_pools();
  auto m = tiny_model(pools, 7);
  Adam<float> adam(m, 1e-2);
  TrainConfig cfg;
  cfg.seed = 7;
  NoiseConfig ncfg;
  auto lex = Lexicon::bundled();
  double first = 0, last = 0;
  for (int e = 0; e < 8; ++e) {
    auto st = pretrain_denoise_epoch(m, adam, pools, Regime::COMPOSED, ncfg, cfg, lex);
    if (e == 0) first = st.mean_loss;
    last = st.mean_loss;
  }
  REQUIRE(last < first);
}

TEST_CASE("unsupervised training never touches the supervised pool") {
  auto pools = tiny_pools();
  pools.set_pairs({{pools.graphs[0], pools.texts[0]}});
  auto m = tiny_model(pools, 8);
  Adam<float> adam(m);
  TrainConfig cfg;
  cfg.seed = 8;
  NoiseConfig ncfg;
  auto lex = Lexicon::bundled();
  pretrain_denoise_epoch(m, adam, pools, Regime::SAMPLED, ncfg, cfg, lex);
  auto st = unsupervised_iteration(m, adam, pools, Regime::SAMPLED, ncfg, cfg, lex, 0);
  REQUIRE(pools.pair_read_count() == 0);
  REQUIRE(st.back_pairs + st.back_skipped == pools.graphs.size() + pools.texts.size());
}

TEST_CASE("backtranslation pairs target the original modality") {
  auto pools = tiny_pools();
  auto m = tiny_model(pools, 9);
  auto bt = backtranslate_corpus(m, pools.graphs, Modality::TEXT);
  for (const auto& p : bt.pairs) {
    REQUIRE(p.source.modality == Modality::TEXT);
    REQUIRE(p.target.modality == Modality::GRAPH);
  }
  std::vector<TokenSeq> with_empty = pools.texts;
  with_empty.push_back({Modality::TEXT, {}});
  auto bt2 = backtranslate_corpus(m, with_empty, Modality::GRAPH);
  REQUIRE(bt2.pairs.size() + bt2.skipped == with_empty.size());
  REQUIRE(bt2.skipped >= 1);
}

TEST_CASE("supervised epoch trains both directions and reduces loss") {
  auto pools = tiny_pools();
  std::vector<std::pair<TokenSeq, TokenSeq>> pairs = {
      {pools.graphs[0], pools.texts[0]}, {pools.graphs[1], pools.texts[1]}};
  auto m = tiny_model(pools, 10);
  Adam<float> adam(m, 1e-2);
  TrainConfig cfg;
  cfg.seed = 10;
  double before = supervised_loss(m, pairs);
  for (std::uint64_t e = 0; e < 10; ++e) supervised_epoch(m, adam, pairs, cfg, e);
  REQUIRE(supervised_loss(m, pairs) < before);
  REQUIRE_THROWS_AS(supervised_epoch(m, adam, {}, cfg, 0), EmptySupervisedPool);
  REQUIRE_THROWS_AS(supervised_loss(m, {}), EmptySupervisedPool);
}

TEST_CASE("training is reproducible from the seed") {
  auto pools = tiny_pools();
  auto lex = Lexicon::bundled();
  NoiseConfig ncfg;
  TrainConfig cfg;
  cfg.seed = 11;
  auto run = [&]() {
    auto m = tiny_model(pools, 11);
    Adam<float> adam(m);
    pretrain_denoise_epoch(m, adam, pools, Regime::SAMPLED, ncfg, cfg, lex);
    unsupervised_iteration(m, adam, pools, Regime::SAMPLED, ncfg, cfg, lex, 0);
    return m.param("emb").value;
  };
  REQUIRE(run().isApprox(run()));
}

TEST_CASE("checkpoint selection is argmax with later tie break") {
  REQUIRE(select_checkpoint({0.1, 0.5, 0.3}) == 1);
  REQUIRE(select_checkpoint({0.5, 0.2, 0.5}) == 2);
  REQUIRE(select_checkpoint({0.4}) == 0);
  REQUIRE_THROWS_AS(select_checkpoint({}), NoCheckpoints);
}

TEST_CASE("validation sample is fixed by the seed and capped at 100") {
  bool warned = false;
  auto idx = m_val_sample(500, 42, &warned);
  REQUIRE(idx.size() == 100);
  REQUIRE_FALSE(warned);
  REQUIRE(idx == m_val_sample(500, 42));
  REQUIRE(idx != m_val_sample(500, 43));
  for (auto i : idx) REQUIRE(i < 500);

  auto small = m_val_sample(30, 42, &warned);
  REQUIRE(small.size() == 30);
  REQUIRE(warned);
}
