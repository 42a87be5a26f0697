#include "support.hpp"

#include "scriptdet/zeroshot.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace scriptdet;
using support::error_of;

namespace {

EmbeddingVector vec(std::initializer_list<double> v) { return EmbeddingVector{std::vector<double>(v)}; }

ClassEmbeddingTable table_of(std::initializer_list<std::pair<const char*, EmbeddingVector>> rows) {
  ClassEmbeddingTable t;
  for (const auto& [name, v] : rows) {
    t.entries.emplace(ScriptClass(name), v);
    t.dim = v.dim();
  }
  return t;
}

ScriptSet all_of(const ClassEmbeddingTable& t) {
  ScriptSet s;
  for (const auto& [c, v] : t.entries) s.insert(c);
  return s;
}

}  // namespace

TEST_CASE("cosine_similarity") {
  CHECK(cosine_similarity(vec({1, 0}), vec({1, 0})) == 1.0);
  CHECK(cosine_similarity(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(cosine_similarity(vec({1, 1}), vec({1, 0})) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
  CHECK(cosine_similarity(vec({1, 2, 3}), vec({-2, -4, -6})) == doctest::Approx(-1.0));
  CHECK(error_of([] { cosine_similarity(vec({0, 0}), vec({1, 0})); }) == ErrorCode::ZeroNormVector);
  CHECK(error_of([] { cosine_similarity(vec({1, 0}), vec({1, 0, 0})); }) == ErrorCode::DimensionMismatch);
  // rounding never leaves [-1, 1]
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 1000; ++i) {
    EmbeddingVector v;
    for (int k = 0; k < 50; ++k) v.values.push_back(n01(rng));
    auto w = v;
    for (auto& x : w.values) x *= 3.7;
    const double s = cosine_similarity(v, w);
    CHECK(s <= 1.0);
    CHECK(s >= -1.0);
  }
}

TEST_CASE("classify_region: one-hot table") {
  const auto t = table_of({{"a", vec({1, 0, 0})}, {"b", vec({0, 1, 0})}, {"c", vec({0, 0, 1})}});
  const auto r = classify_region(vec({0, 1, 0}), t, all_of(t), "r1");
  CHECK(r.script.name() == "b");
  CHECK(r.similarity == 1.0);
  CHECK(r.region_id == "r1");
  CHECK(r.rank_score == 1.0);
}

TEST_CASE("classify_region: ties go to the smaller name") {
  const auto t = table_of({{"zeta", vec({1, 0, 0})}, {"alpha", vec({0, 1, 0})}, {"mid", vec({0, 0, 1})}});
  CHECK(classify_region(vec({1, 1, 0}), t, all_of(t)).script.name() == "alpha");
  CHECK(classify_region(vec({1, 0, 1}), t, all_of(t)).script.name() == "mid");
  CHECK(classify_region(vec({1, 1, 1}), t, all_of(t)).script.name() == "alpha");
}

TEST_CASE("classify_region: noisy hindi within the unseen set") {
  // Orthonormal unseen anchors plus seen anchors nearer to the query than any
  // wrong unseen class, so only the allowed-set restriction keeps hindi.
  const auto t = table_of({{"chinese", vec({1, 0, 0, 0})},
                           {"korean", vec({0, 1, 0, 0})},
                           {"hindi", vec({0, 0, 1, 0})},
                           {"bangla", vec({0, 0, 0.9, 0.1})},
                           {"latin", vec({0.1, 0.1, 0.1, 1})}});
  const auto unseen = make_script_set({"chinese", "korean", "hindi"});
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
  for (int i = 0; i < 100; ++i) {
    auto v = vec({0, 0, 1, 0});
    for (auto& x : v.values) x += noise(rng);
    // margin: cos to hindi >= (1-1e-3)/|v|, cos to others <= 1e-3/|v|
    CHECK(classify_region(v, t, unseen).script.name() == "hindi");
  }
}

TEST_CASE("classify_region: errors") {
  const auto t = table_of({{"a", vec({1, 0})}, {"b", vec({0, 1})}});
  CHECK(error_of([&] { classify_region(vec({1, 0}), t, {}); }) == ErrorCode::EmptyAllowedSet);
  CHECK(error_of([&] { classify_region(vec({1, 0}), t, make_script_set({"c"})); }) == ErrorCode::MissingClass);
  CHECK(error_of([&] { classify_region(vec({1, 0, 0}), t, all_of(t)); }) == ErrorCode::DimensionMismatch);
  CHECK(error_of([&] { classify_region(vec({0, 0}), t, all_of(t)); }) == ErrorCode::ZeroNormVector);
}

TEST_CASE("classify_region properties on random tables") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  const char* names[] = {"arabic", "bangla", "chinese", "hindi", "japanese", "korean", "latin"};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = 2 + static_cast<std::size_t>(trial % 6);
    ClassEmbeddingTable t;
    t.dim = dim;
    for (const char* n : names) {
      EmbeddingVector v;
      for (std::size_t k = 0; k < dim; ++k) v.values.push_back(n01(rng));
      t.entries.emplace(ScriptClass(n), v);
    }
    EmbeddingVector q;
    for (std::size_t k = 0; k < dim; ++k) q.values.push_back(n01(rng));
    const auto all = all_of(t);
    const auto best = classify_region(q, t, all);

    auto q_scaled = q;
    const double mu = scale(rng);
    for (auto& x : q_scaled.values) x *= mu;
    CHECK(classify_region(q_scaled, t, all).script == best.script);
    auto t_scaled = t;
    const double lambda = scale(rng);
    for (auto& [c, v] : t_scaled.entries) {
      for (auto& x : v.values) x *= lambda;
    }
    CHECK(classify_region(q, t_scaled, all).script == best.script);

    for (const char* n : names) {
      CHECK(classify_region(q, t, make_script_set({n})).script.name() == n);
    }
    // drop classes other than the winner
    ScriptSet restricted{best.script};
    for (const char* n : names) {
      if (n[0] < 'j') restricted.insert(ScriptClass(n));
    }
    CHECK(classify_region(q, t, restricted).script == best.script);
    CHECK(best.rank_score == doctest::Approx((1 + best.similarity) / 2));
  }
}

TEST_CASE("rank_score") {
  CHECK(rank_score(0.8, -0.3, ScoreMode::Detector) == 0.8);
  CHECK(rank_score(0.1, 1.0, ScoreMode::Similarity) == 1.0);
  CHECK(rank_score(0.1, -1.0, ScoreMode::Similarity) == 0.0);
  CHECK(rank_score(0.5, 0.0, ScoreMode::Product) == 0.25);
  CHECK(parse_score_mode("product") == ScoreMode::Product);
  CHECK_FALSE(parse_score_mode("max").has_value());
  CHECK(to_string(ScoreMode::Similarity) == "similarity");
}

TEST_CASE("assignment CSV round-trip") {
  std::vector<AssignmentRow> rows{{"img_1", {"img_1_0", ScriptClass("hindi"), 0.123456789012345, 0.5617283945}},
                                  {"img_2", {"r7", ScriptClass("korean"), -0.25, 0.375}}};
  std::stringstream ss;
  write_assignments_csv(ss, rows);
  CHECK(ss.str().rfind("image_id,region_id,script,similarity,rank_score\n", 0) == 0);
  const auto back = read_assignments_csv(ss);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].image_id == rows[i].image_id);
    CHECK(back[i].assignment.region_id == rows[i].assignment.region_id);
    CHECK(back[i].assignment.script == rows[i].assignment.script);
    CHECK(back[i].assignment.similarity == rows[i].assignment.similarity);
    CHECK(back[i].assignment.rank_score == rows[i].assignment.rank_score);
  }
}
