#include <catch2/catch_amalgamated.hpp>

#include "kgtext/kg.hpp"

using namespace kgtext;

TEST_CASE("serialize single attribute fact") {
  KnowledgeGraph g{{{"hat", "attr", "pink"}}};
  auto s = serialize(g);
  REQUIRE(s.modality == Modality::GRAPH);
  REQUIRE(join_ws(s.tokens) == "hat SEP attr SEP pink");
}

TEST_CASE("serialize preserves fact order and multi-word labels") {
  KnowledgeGraph g{{{"baby", "attr", "small"},
                    {"baby", "attr", "wrapped in blanket"},
                    {"hat", "attr", "pink"},
                    {"hat", "attr", "baseball hat"},
                    {"baby", "wearing", "hat"}}};
  REQUIRE(join_ws(serialize(g).tokens) ==
          "baby SEP attr SEP small EOF baby SEP attr SEP wrapped in blanket EOF "
          "hat SEP attr SEP pink EOF hat SEP attr SEP baseball hat EOF "
          "baby SEP wearing SEP hat");
}

TEST_CASE("serialize of empty graph is empty") {
  REQUIRE(serialize(KnowledgeGraph{}).tokens.empty());
}

TEST_CASE("serialize rejects reserved tokens in labels") {
  KnowledgeGraph g{{{"a SEP b", "r", "c"}}};
  REQUIRE_THROWS_AS(serialize(g), ReservedTokenInLabel);
  KnowledgeGraph g2{{{"a", "r", "EOF"}}};
  REQUIRE_THROWS_AS(serialize(g2), ReservedTokenInLabel);
  KnowledgeGraph g3{{{"a", "", "b"}}};
  REQUIRE_THROWS_AS(serialize(g3), ReservedTokenInLabel);
}

TEST_CASE("deserialize well-formed sequence") {
  TokenSeq s{Modality::GRAPH, split_ws("a SEP r SEP b EOF c SEP r2 SEP d")};
  auto res = deserialize(s);
  REQUIRE(res.malformed == 0);
  REQUIRE(res.graph.facts == std::vector<Fact>{{"a", "r", "b"}, {"c", "r2", "d"}});
}

TEST_CASE("deserialize drops blanked and short segments") {
  auto res = deserialize({Modality::GRAPH, split_ws("a SEP r SEP b EOF BLANKED")});
  REQUIRE(res.graph.facts.size() == 1);
  REQUIRE(res.malformed == 1);

  auto res2 = deserialize({Modality::GRAPH, split_ws("a SEP b")});
  REQUIRE(res2.graph.facts.empty());
  REQUIRE(res2.malformed == 1);
}

TEST_CASE("deserialize never aborts on arbitrary sequences") {
  Rng rng(7);
  std::vector<std::string> alphabet = {"SEP", "EOF", "BLANKED", "x", "y"};
  for (int t = 0; t < 500; ++t) {
    TokenSeq s;
    s.modality = Modality::GRAPH;
    std::size_t len = rng.uniform_int(20);
    for (std::size_t i = 0; i < len; ++i) {
      s.tokens.push_back(alphabet[rng.uniform_int(alphabet.size())]);
    }
    REQUIRE_NOTHROW(deserialize(s));
  }
}

TEST_CASE("round trip identity on random graphs") {
  Rng rng(42);
  std::vector<std::string> words = {"man", "ball", "wears", "red", "big dog", "park bench"};
  for (int t = 0; t < 200; ++t) {
    KnowledgeGraph g;
    std::size_t n = rng.uniform_int(6);
    for (std::size_t i = 0; i < n; ++i) {
      g.facts.push_back({words[rng.uniform_int(words.size())],
                         words[rng.uniform_int(words.size())],
                         words[rng.uniform_int(words.size())]});
    }
    auto res = deserialize(serialize(g));
    REQUIRE(res.malformed == 0);
    REQUIRE(res.graph == g);
  }
}

TEST_CASE("fact multiset equality") {
  KnowledgeGraph a{{{"a", "r", "b"}, {"c", "r", "d"}}};
  KnowledgeGraph b{{{"c", "r", "d"}, {"a", "r", "b"}}};
  REQUIRE(fact_multiset_equal(a, b));

  KnowledgeGraph c{{{"a", "r", "b"}}};
  KnowledgeGraph d{{{"a", "r", "b"}, {"a", "r", "b"}}};
  REQUIRE_FALSE(fact_multiset_equal(c, d));
  REQUIRE(fact_multiset_equal(KnowledgeGraph{}, KnowledgeGraph{}));
}
