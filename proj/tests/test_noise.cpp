#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "kgtext/noise.hpp"

using namespace kgtext;

namespace {

std::vector<NoiseUnit> words(const std::string& s) {
  std::vector<NoiseUnit> out;
  for (auto& t : split_ws(s)) out.push_back({t});
  return out;
}

bool is_permutation_of(const std::vector<NoiseUnit>& a, const std::vector<NoiseUnit>& b) {
  auto x = a;
  auto y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

}  // namespace

TEST_CASE("swap with k=0 is the identity") {
  Rng rng(1);
  auto in = words("a b c d e");
  REQUIRE(noise_swap(in, 0, rng) == in);
}

TEST_CASE("swap respects the locality radius") {
  auto in = words("w0 w1 w2 w3 w4 w5 w6 w7 w8 w9");
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    auto out = noise_swap(in, 3, rng);
    REQUIRE(is_permutation_of(in, out));
    for (std::size_t j = 0; j < out.size(); ++j) {
      std::size_t i = std::stoul(out[j][0].substr(1));
      REQUIRE(std::llabs(static_cast<long long>(j) - static_cast<long long>(i)) <= 3);
    }
  }
}

TEST_CASE("unbounded swap is uniform over permutations") {
  auto in = words("f1 f2 f3");
  std::map<std::string, int> counts;
  Rng rng(99);
  const int N = 60000;
  for (int t = 0; t < N; ++t) {
    auto out = noise_swap(in, kUnboundedSwap, rng);
    std::string key;
    for (const auto& u : out) key += u[0];
    ++counts[key];
  }
  REQUIRE(counts.size() == 6);
  double p = 1.0 / 6.0;
  double sigma = std::sqrt(p * (1 - p) * N);
  for (const auto& [k, c] : counts) {
    REQUIRE(std::abs(c - N * p) <= 3 * sigma);
  }
}

TEST_CASE("drop rate concentrates around p") {
  Rng rng(5);
  auto in = words("a b c d e f g h i j");  // 10 units
  std::size_t total = 0, dropped = 0;
  for (int t = 0; t < 10000; ++t) {
    auto out = noise_drop(in, 0.1, rng);
    total += in.size();
    dropped += in.size() - out.size();
  }
  double rate = static_cast<double>(dropped) / static_cast<double>(total);
  REQUIRE(rate == Catch::Approx(0.1).margin(0.005));
}

TEST_CASE("drop with p=0 is identity; full wipe retains one unit") {
  Rng rng(8);
  auto in = words("a b c");
  REQUIRE(noise_drop(in, 0.0, rng) == in);
  for (int t = 0; t < 50; ++t) {
    auto out = noise_drop(in, 1.0, rng);
    REQUIRE(out.size() == 1);
  }
}

TEST_CASE("drop output is a subsequence") {
  Rng rng(12);
  auto in = words("a b c d e f");
  for (int t = 0; t < 200; ++t) {
    auto out = noise_drop(in, 0.4, rng);
    std::size_t at = 0;
    for (const auto& u : out) {
      while (at < in.size() && in[at] != u) ++at;
      REQUIRE(at < in.size());
      ++at;
    }
  }
}

TEST_CASE("blank preserves length and substitutes BLANKED") {
  Rng rng(4);
  auto in = words("a b");
  REQUIRE(noise_blank(in, 0.0, rng) == in);
  auto out = noise_blank(in, 1.0, rng);
  REQUIRE(out == std::vector<NoiseUnit>{{"BLANKED"}, {"BLANKED"}});
}

TEST_CASE("repeat inserts adjacent duplicates only") {
  Rng rng(6);
  auto in = words("a b");
  REQUIRE(noise_repeat(in, 0.0, rng) == in);
  REQUIRE(noise_repeat(in, 1.0, rng) ==
          std::vector<NoiseUnit>{{"a"}, {"a"}, {"b"}, {"b"}});
  auto longer = words("a b c d e");
  for (int t = 0; t < 200; ++t) {
    auto out = noise_repeat(longer, 0.3, rng);
    REQUIRE(out.size() >= longer.size());
    REQUIRE(out.size() <= 2 * longer.size());
    // dropping adjacent duplicates recovers the input
    std::vector<NoiseUnit> dedup;
    for (const auto& u : out) {
      if (dedup.empty() || dedup.back() != u) dedup.push_back(u);
    }
    // input had no adjacent duplicates, so dedup must equal it
    REQUIRE(dedup == longer);
  }
}

TEST_CASE("graph noise operates on whole facts") {
  auto lex = Lexicon::bundled();
  KnowledgeGraph g{{{"a", "r", "b"}, {"c", "r2", "d"}, {"e", "r3", "f"}}};
  auto ser = serialize(g);
  NoiseConfig cfg;
  cfg.p_blank = 0.5;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    auto pair = corrupt_with(ser, NoiseFn::BLANK, cfg, lex, rng);
    auto res = deserialize(pair.source);
    std::size_t blanked = 0;
    for (const auto& t : pair.source.tokens) {
      if (t == kBlanked) ++blanked;
    }
    REQUIRE(res.malformed == blanked);
    REQUIRE(res.graph.facts.size() + blanked == 3);
  }
}

TEST_CASE("rule noise flips modality") {
  auto lex = Lexicon::bundled();
  TokenSeq text{Modality::TEXT,
                split_ws("Man wearing a colorful shirt and white pants playing tennis")};
  auto g = noise_rule(text, lex);
  REQUIRE(g.modality == Modality::GRAPH);
  REQUIRE(deserialize(g).graph.facts.size() == 4);

  TokenSeq graph{Modality::GRAPH, split_ws("a SEP r SEP b")};
  auto t = noise_rule(graph, lex);
  REQUIRE(t.modality == Modality::TEXT);
  REQUIRE(join_ws(t.tokens) == "a r b");

  auto empty = noise_rule(TokenSeq{Modality::TEXT, {}}, lex);
  REQUIRE(empty.modality == Modality::GRAPH);
  REQUIRE(empty.tokens.empty());
}

TEST_CASE("corrupt: sampled keeps modality except for rule") {
  auto lex = Lexicon::bundled();
  NoiseConfig cfg;
  TokenSeq graph = serialize(KnowledgeGraph{{{"a", "r", "b"}, {"c", "r", "d"}}});
  cfg.enabled = {NoiseFn::SWAP};
  Rng rng(3);
  auto p = corrupt(graph, Regime::SAMPLED, cfg, lex, rng);
  REQUIRE(p.target == graph);
  REQUIRE(p.source.modality == Modality::GRAPH);
  REQUIRE(fact_multiset_equal(deserialize(p.source).graph, deserialize(graph).graph));

  cfg.enabled = {NoiseFn::RULE};
  auto p2 = corrupt(graph, Regime::SAMPLED, cfg, lex, rng);
  REQUIRE(p2.source.modality == Modality::TEXT);
  REQUIRE(p2.target == graph);
}

TEST_CASE("composed pipeline runs rule first") {
  auto lex = Lexicon::bundled();
  NoiseConfig cfg;
  TokenSeq text{Modality::TEXT, split_ws("the ball is red and the man holds the hat")};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto p = corrupt(text, Regime::COMPOSED, cfg, lex, rng);
    REQUIRE(p.target == text);
    REQUIRE(p.source.modality == Modality::GRAPH);
  }
}

TEST_CASE("noise is reproducible from the seed") {
  auto lex = Lexicon::bundled();
  NoiseConfig cfg;
  TokenSeq text{Modality::TEXT, split_ws("a small dog runs across the green field")};
  Rng r1(77), r2(77);
  auto a = corrupt(text, Regime::COMPOSED, cfg, lex, r1);
  auto b = corrupt(text, Regime::COMPOSED, cfg, lex, r2);
  REQUIRE(a.source == b.source);
}
