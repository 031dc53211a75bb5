#include <catch2/catch_amalgamated.hpp>

#include "kgtext/metrics.hpp"

using namespace kgtext;

namespace {
std::vector<std::string> toks(const std::string& s) { return split_ws(s); }
}  // namespace

TEST_CASE("bleu is 100 on identity and 0 on disjoint output") {
  std::vector<TextEvalInstance> same = {
      {toks("the cat sat on the mat"), {toks("the cat sat on the mat")}}};
  REQUIRE(bleu(same) == Catch::Approx(100.0).margin(1e-9));

  std::vector<TextEvalInstance> disjoint = {{toks("x y z w"), {toks("a b c d")}}};
  REQUIRE(bleu(disjoint) == 0.0);

  REQUIRE_THROWS_AS(bleu({}), EmptyCorpus);
}

TEST_CASE("bleu matches a hand-computed value") {
  // p1 = 3/4, p2 = 2/3, p3 = 1/2, p4 smoothed to 1/2, BP = exp(1 - 6/4)
  std::vector<TextEvalInstance> corpus = {
      {toks("the cat sat down"), {toks("the cat sat on the mat")}}};
  double expect = 100.0 * std::exp(1.0 - 6.0 / 4.0) *
                  std::pow(0.75 * (2.0 / 3.0) * 0.5 * 0.5, 0.25);
  REQUIRE(bleu(corpus) == Catch::Approx(expect).margin(1e-9));
  REQUIRE(bleu(corpus) == Catch::Approx(36.0646).margin(0.005));
}

TEST_CASE("bleu is case-insensitive") {
  std::vector<TextEvalInstance> a = {{toks("The Cat Sat On The Mat"),
                                      {toks("the cat sat on the mat")}}};
  REQUIRE(bleu(a) == Catch::Approx(100.0).margin(1e-9));
}

TEST_CASE("bleu is invariant to corpus order and monotone in references") {
  TextEvalInstance x{toks("a small dog runs fast"), {toks("a small dog runs away")}};
  TextEvalInstance y{toks("the red ball bounces high"), {toks("the red ball bounces twice")}};
  REQUIRE(bleu({x, y}) == Catch::Approx(bleu({y, x})).margin(1e-12));

  // adding a reference can only help
  double before = bleu({x});
  x.references.push_back(toks("a small dog runs fast"));
  REQUIRE(bleu({x}) >= before);
}

TEST_CASE("bleu brevity penalty uses the closest reference, ties to shorter") {
  // hyp length 2; refs of length 1 and 3 tie, so ref_len = 1 and BP = 1
  std::vector<TextEvalInstance> corpus = {{toks("a a"), {toks("a"), toks("a a a")}}};
  double v = bleu(corpus);
  std::vector<TextEvalInstance> only_long = {{toks("a a"), {toks("a a a")}}};
  REQUIRE(v > bleu(only_long));  // the long-only variant pays BP
}

TEST_CASE("chrf++ hand-computed values") {
  REQUIRE(chrf_pp_sentence("ab", "ab") == Catch::Approx(100.0).margin(1e-9));
  // char 1-grams match, char 2-grams differ, word 1-grams differ: mean of
  // {1, 0, 0} over the three populated orders
  REQUIRE(chrf_pp_sentence("ab", "ba") == Catch::Approx(100.0 / 3.0).margin(1e-9));
  REQUIRE(chrf_pp_sentence("", "") == 0.0);
  REQUIRE(chrf_pp_sentence("abc", "") == 0.0);
}

TEST_CASE("chrf++ corpus score is the mean of best-reference sentence scores") {
  TextEvalInstance perfect{toks("the red ball"), {toks("nothing shared"), toks("the red ball")}};
  TextEvalInstance empty_pred{{}, {toks("the red ball")}};
  double v = chrf_pp({perfect, empty_pred});
  REQUIRE(v == Catch::Approx((100.0 + 0.0) / 2.0).margin(1e-9));
  REQUIRE_THROWS_AS(chrf_pp({}), EmptyCorpus);
}

TEST_CASE("chrf++ is case-insensitive and whitespace-robust on the char side") {
  REQUIRE(chrf_pp_sentence("The Red Ball", "the red ball") ==
          Catch::Approx(100.0).margin(1e-9));
}

TEST_CASE("fact f1 matches the documented example exactly") {
  GraphEvalInstance inst;
  inst.prediction.facts = {{"a", "r", "b"}};
  KnowledgeGraph ref;
  ref.facts = {{"a", "r", "b"}, {"c", "r", "d"}};
  inst.references.push_back(ref);
  auto res = fact_f1({inst});
  REQUIRE(res.precision == 1.0);
  REQUIRE(res.recall == 0.5);
  REQUIRE(res.f1 == Catch::Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("fact f1 uses lowercased set semantics") {
  GraphEvalInstance inst;
  inst.prediction.facts = {{"A", "R", "B"}, {"a", "r", "b"}, {"x", "y", "z"}};
  KnowledgeGraph ref;
  ref.facts = {{"a", "r", "b"}};
  inst.references.push_back(ref);
  auto res = fact_f1({inst});
  // duplicates collapse: 1 tp, 1 fp, denom 1
  REQUIRE(res.precision == 0.5);
  REQUIRE(res.recall == 1.0);
}

TEST_CASE("fact f1 multi-reference: union for correctness, max size for recall") {
  GraphEvalInstance inst;
  inst.prediction.facts = {{"a", "r", "b"}, {"c", "r", "d"}};
  KnowledgeGraph r1, r2;
  r1.facts = {{"a", "r", "b"}};
  r2.facts = {{"c", "r", "d"}, {"e", "r", "f"}, {"g", "r", "h"}};
  inst.references = {r1, r2};
  auto res = fact_f1({inst});
  REQUIRE(res.precision == 1.0);
  REQUIRE(res.recall == Catch::Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("fact f1 is invariant to fact order") {
  GraphEvalInstance a, b;
  a.prediction.facts = {{"a", "r", "b"}, {"c", "r", "d"}};
  b.prediction.facts = {{"c", "r", "d"}, {"a", "r", "b"}};
  KnowledgeGraph ref;
  ref.facts = {{"c", "r", "d"}, {"a", "r", "b"}};
  a.references.push_back(ref);
  b.references.push_back(ref);
  REQUIRE(fact_f1({a}).f1 == fact_f1({b}).f1);
  REQUIRE(fact_f1({a}).f1 == 1.0);
}

TEST_CASE("fact f1 degenerate cases") {
  GraphEvalInstance empty_pred;
  KnowledgeGraph ref;
  ref.facts = {{"a", "r", "b"}};
  empty_pred.references.push_back(ref);
  auto res = fact_f1({empty_pred});
  REQUIRE(res.precision == 0.0);
  REQUIRE(res.recall == 0.0);
  REQUIRE(res.f1 == 0.0);
  REQUIRE_THROWS_AS(fact_f1({}), EmptyCorpus);
}

TEST_CASE("unsupervised and validation scores are finite on an untrained model") {
  std::vector<TokenSeq> texts = {{Modality::TEXT, toks("the red ball")},
                                 {Modality::TEXT, toks("a small dog")}};
  std::vector<TokenSeq> graphs = {serialize(KnowledgeGraph{{{"ball", "attr", "red"}}})};
  auto vocab = Vocabulary::build({&texts, &graphs});
  ModelDims dims;
  dims.embed = 8;
  dims.hidden = 6;
  dims.dropout = 0.0;
  Seq2SeqModel<float> m(vocab, dims, 5);

  auto score = m_unsup(m, texts, graphs);
  REQUIRE(score.text_bleu >= 0.0);
  REQUIRE(score.text_bleu <= 100.0);
  REQUIRE(score.graph_f1 >= 0.0);
  REQUIRE(score.graph_f1 <= 1.0);

  std::vector<ValInstance> val(3);
  for (auto& v : val) {
    v.graph = graphs[0];
    v.text_refs = {toks("the red ball")};
    v.graph_refs = {KnowledgeGraph{{{"ball", "attr", "red"}}}};
    v.text_tokens = toks("the red ball");
  }
  double g2t = m_val(m, val, Task::G2T, 1);
  double t2g = m_val(m, val, Task::T2G, 1);
  REQUIRE(g2t >= 0.0);
  REQUIRE(g2t <= 100.0);
  REQUIRE(t2g >= 0.0);
  REQUIRE(t2g <= 1.0);
}
