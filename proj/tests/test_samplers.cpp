#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "replay/rng.hpp"
#include "replay/samplers.hpp"
#include "replay/sum_tree.hpp"

using namespace replay;

namespace {

using Batch = std::vector<size_t>;

// Full-sort reference for top_indices: stable ranking by (score desc,
// index desc), then truncate.
std::vector<size_t> brute_top(const std::vector<double>& scores, size_t k) {
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a > b;
  });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

SamplerSpec make_spec(Strategy s, int b, int g, double p = 0.0) {
  SamplerSpec spec;
  spec.strategy = s;
  spec.batch_size = b;
  spec.grad_steps = g;
  spec.mixing_p = p;
  return spec;
}

bool ascending_consecutive(const Batch& batch) {
  for (size_t i = 1; i < batch.size(); ++i) {
    if (batch[i] != batch[i - 1] + 1) return false;
  }
  return !batch.empty();
}

}  // namespace

TEST_CASE("SamplerSpec::validate rejects out-of-range fields") {
  SamplerSpec ok;
  CHECK_NOTHROW(ok.validate());

  SamplerSpec s = ok;
  s.batch_size = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  s = ok;
  s.grad_steps = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  s = ok;
  s.mixing_p = -0.1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.mixing_p = 1.1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.mixing_p = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  s = ok;
  s.per_alpha = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  s = ok;
  s.per_beta = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  s = ok;
  s.per_epsilon = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("top_indices ranks by score with ties toward the larger index") {
  std::vector<double> scores{0.1, 0.9, 0.5, 0.7};
  CHECK(top_indices(scores, 2) == std::vector<size_t>{1, 3});
  CHECK(top_indices(scores, 4) == std::vector<size_t>{1, 3, 2, 0});

  std::vector<double> tied{2.0, 2.0, 2.0};
  CHECK(top_indices(tied, 3) == std::vector<size_t>{2, 1, 0});

  // k beyond the vector clamps to a full ranking.
  CHECK(top_indices(tied, 10).size() == 3);

  std::vector<double> bad{1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(top_indices(bad, 1), std::invalid_argument);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(top_indices(bad, 1), std::invalid_argument);
}

TEST_CASE("top_indices matches a full-sort oracle on random inputs") {
  Rng rng(401);
  for (int rep = 0; rep < 1000; ++rep) {
    size_t n = 1 + rng.uniform_below(40);
    std::vector<double> scores(n);
    for (double& s : scores) {
      // Coarse grid so ties happen constantly.
      s = static_cast<double>(rng.uniform_below(8)) * 0.5;
    }
    size_t k = 1 + rng.uniform_below(n);
    CHECK(top_indices(scores, k) == brute_top(scores, k));
  }
}

TEST_CASE("pivot_batch_count is ceil((1-p)*G) with exact binary fractions") {
  CHECK(pivot_batch_count(0.3, 10) == 7);  // naive ceil of 7.000000000000001 is 8
  CHECK(pivot_batch_count(0.0, 5) == 5);
  CHECK(pivot_batch_count(1.0, 5) == 0);
  CHECK(pivot_batch_count(0.5, 7) == 4);

  // Exact-rational oracle over a grid of exactly representable fractions.
  const std::pair<int, int> fracs[] = {{0, 10}, {3, 10}, {5, 10}, {10, 10}};
  for (auto [num, den] : fracs) {
    double p = static_cast<double>(num) / den;
    for (int g = 1; g <= 10; ++g) {
      auto expected = static_cast<size_t>(((den - num) * g + den - 1) / den);
      CAPTURE(p);
      CAPTURE(g);
      CHECK(pivot_batch_count(p, g) == expected);
    }
  }
}

TEST_CASE("plan_ier look_back worked example") {
  std::vector<double> scores{0.1, 0.9, 0.5, 0.7};
  auto spec = make_spec(Strategy::IER, 2, 2, 0.0);
  Rng rng(1);
  auto plan = plan_ier(scores, scores.size(), spec, rng);
  REQUIRE(plan.batches.size() == 2);
  CHECK(plan.pivot_indices == std::vector<size_t>{1, 3});
  CHECK(plan.batches[0] == Batch{0, 1});
  CHECK(plan.batches[1] == Batch{2, 3});
  CHECK(plan.weights.empty());
}

TEST_CASE("plan_ier look_forward truncates at the buffer end") {
  std::vector<double> scores{0.1, 0.9, 0.5, 0.7};
  auto spec = make_spec(Strategy::IER, 2, 2, 0.0);
  spec.fill_mode = FillMode::LookForward;
  Rng rng(1);
  auto plan = plan_ier(scores, scores.size(), spec, rng);
  REQUIRE(plan.batches.size() == 2);
  CHECK(plan.batches[0] == Batch{1, 2});
  CHECK(plan.batches[1] == Batch{3});
}

TEST_CASE("plan_ier with p=1 emits only uniform batches") {
  std::vector<double> scores{9.0, 1.0, 5.0, 3.0, 7.0};
  auto spec = make_spec(Strategy::IER, 3, 4, 1.0);
  Rng rng(7);
  auto plan = plan_ier(scores, scores.size(), spec, rng);
  CHECK(plan.pivot_indices.empty());
  REQUIRE(plan.batches.size() == 4);
  for (const auto& b : plan.batches) {
    REQUIRE(b.size() == 3);
    std::set<size_t> uniq(b.begin(), b.end());
    CHECK(uniq.size() == b.size());  // without replacement when buf >= B
    for (size_t i : b) CHECK(i < scores.size());
  }
}

TEST_CASE("plan_ier uniform fill keeps the pivot in slot zero") {
  std::vector<double> scores{0.0, 4.0, 2.0, 1.0, 3.0, 0.5};
  auto spec = make_spec(Strategy::IER, 4, 3, 0.0);
  spec.fill_mode = FillMode::Uniform;
  Rng rng(11);
  auto plan = plan_ier(scores, scores.size(), spec, rng);
  REQUIRE(plan.batches.size() == 3);
  CHECK(plan.pivot_indices == std::vector<size_t>{1, 4, 2});
  for (size_t g = 0; g < 3; ++g) {
    REQUIRE(plan.batches[g].size() == 4);
    CHECK(plan.batches[g][0] == plan.pivot_indices[g]);
    for (size_t i : plan.batches[g]) CHECK(i < scores.size());
  }
}

TEST_CASE("plan_ier cycles pivots when the ranking is shorter than G") {
  std::vector<double> scores{1.0, 2.0};
  auto spec = make_spec(Strategy::IER, 1, 5, 0.0);
  Rng rng(3);
  auto plan = plan_ier(scores, scores.size(), spec, rng);
  CHECK(plan.pivot_indices == std::vector<size_t>{1, 0, 1, 0, 1});
}

TEST_CASE("plan_ier input validation") {
  auto spec = make_spec(Strategy::IER, 2, 2);
  Rng rng(1);
  std::vector<double> none;
  CHECK_THROWS_AS(plan_ier(none, 0, spec, rng), std::invalid_argument);
  std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(plan_ier(two, 3, spec, rng), std::invalid_argument);
}

TEST_CASE("plan_ier properties against brute-force oracles") {
  Rng meta(402);
  const double p_grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int rep = 0; rep < 1000; ++rep) {
    size_t n = 1 + meta.uniform_below(50);
    std::vector<double> scores(n);
    for (double& s : scores) s = static_cast<double>(meta.uniform_below(12)) * 0.25;
    int b = 1 + static_cast<int>(meta.uniform_below(8));
    int g = 1 + static_cast<int>(meta.uniform_below(8));
    double p = p_grid[meta.uniform_below(5)];
    auto spec = make_spec(Strategy::IER, b, g, p);

    Rng rng(1000 + static_cast<uint64_t>(rep));
    auto plan = plan_ier(scores, n, spec, rng);

    CAPTURE(n);
    CAPTURE(b);
    CAPTURE(g);
    CAPTURE(p);
    REQUIRE(plan.batches.size() == static_cast<size_t>(g));

    size_t n_pivot = pivot_batch_count(p, g);
    REQUIRE(plan.pivot_indices.size() == n_pivot);

    // Pivots walk the brute-force ranking in order, cycling if short.
    auto ranking = brute_top(scores, std::min<size_t>(static_cast<size_t>(g), n));
    for (size_t i = 0; i < n_pivot; ++i) {
      CHECK(plan.pivot_indices[i] == ranking[i % ranking.size()]);
    }

    for (size_t gi = 0; gi < plan.batches.size(); ++gi) {
      const auto& batch = plan.batches[gi];
      for (size_t i : batch) CHECK(i < n);
      if (gi < n_pivot) {
        // look_back block: ascending, consecutive, ends at the pivot,
        // clipped to at most B entries.
        CHECK(ascending_consecutive(batch));
        CHECK(batch.back() == plan.pivot_indices[gi]);
        CHECK(batch.size() == std::min<size_t>(static_cast<size_t>(b),
                                               plan.pivot_indices[gi] + 1));
      } else {
        CHECK(batch.size() == static_cast<size_t>(b));
      }
    }
  }
}

TEST_CASE("plan_uer on a single-element buffer repeats index zero") {
  auto spec = make_spec(Strategy::UER, 1, 3);
  Rng rng(5);
  auto plan = plan_uer(1, spec, rng);
  REQUIRE(plan.batches.size() == 3);
  for (const auto& b : plan.batches) CHECK(b == Batch{0});
}

TEST_CASE("plan_uer is deterministic for a fixed rng seed") {
  auto spec = make_spec(Strategy::UER, 8, 5);
  Rng a(99);
  Rng b(99);
  CHECK(plan_uer(100, spec, a).batches == plan_uer(100, spec, b).batches);
}

TEST_CASE("plan_uer draws without replacement within a batch") {
  auto spec = make_spec(Strategy::UER, 16, 50);
  Rng rng(21);
  auto plan = plan_uer(20, spec, rng);
  for (const auto& b : plan.batches) {
    std::set<size_t> uniq(b.begin(), b.end());
    CHECK(uniq.size() == b.size());
    for (size_t i : b) CHECK(i < 20);
  }
}

TEST_CASE("plan_uer per-index frequency stays near uniform") {
  const size_t buf = 50;
  const int b = 5;
  const int batches = 20000;
  auto spec = make_spec(Strategy::UER, b, batches);
  Rng rng(31);
  auto plan = plan_uer(buf, spec, rng);
  std::vector<size_t> counts(buf, 0);
  for (const auto& batch : plan.batches) {
    for (size_t i : batch) ++counts[i];
  }
  // Binomial-tail bound; Floyd's draws are slightly negatively correlated
  // within a batch, so the i.i.d. sigma is conservative.
  const double n_draws = static_cast<double>(batches) * b;
  const double p_hit = 1.0 / buf;
  const double mean = n_draws * p_hit;
  const double sigma = std::sqrt(n_draws * p_hit * (1.0 - p_hit));
  for (size_t i = 0; i < buf; ++i) {
    CAPTURE(i);
    CHECK(std::abs(static_cast<double>(counts[i]) - mean) < 5.0 * sigma);
  }
}

TEST_CASE("plan_rer walks backward in blocks and resets at the front") {
  auto spec = make_spec(Strategy::RER, 3, 3);
  RerCursor cursor;
  auto plan = plan_rer(cursor, 10, spec);
  REQUIRE(plan.batches.size() == 3);
  CHECK(plan.batches[0] == Batch{7, 8, 9});
  CHECK(plan.batches[1] == Batch{4, 5, 6});
  CHECK(plan.batches[2] == Batch{1, 2, 3});

  // pos=1 cannot fit another block, so the next epoch resets to the top.
  spec.grad_steps = 1;
  auto next = plan_rer(cursor, 10, spec);
  CHECK(next.batches[0] == Batch{7, 8, 9});
}

TEST_CASE("plan_rer repeats the whole buffer when B equals the length") {
  auto spec = make_spec(Strategy::RER, 4, 2);
  RerCursor cursor;
  auto plan = plan_rer(cursor, 4, spec);
  REQUIRE(plan.batches.size() == 2);
  CHECK(plan.batches[0] == Batch{0, 1, 2, 3});
  CHECK(plan.batches[1] == Batch{0, 1, 2, 3});
}

TEST_CASE("plan_rer validation") {
  auto spec = make_spec(Strategy::RER, 5, 1);
  RerCursor cursor;
  CHECK_THROWS_AS(plan_rer(cursor, 4, spec), std::invalid_argument);
  cursor.pos = 30;
  CHECK_THROWS_AS(plan_rer(cursor, 20, spec), std::invalid_argument);
}

TEST_CASE("plan_rer sweep covers every index once when B divides the buffer") {
  Rng meta(403);
  for (int rep = 0; rep < 200; ++rep) {
    size_t b = 1 + meta.uniform_below(8);
    size_t blocks = 1 + meta.uniform_below(12);
    size_t buf = b * blocks;
    auto spec = make_spec(Strategy::RER, static_cast<int>(b), static_cast<int>(blocks));
    RerCursor cursor;
    auto plan = plan_rer(cursor, buf, spec);
    std::vector<size_t> seen(buf, 0);
    for (const auto& batch : plan.batches) {
      for (size_t i : batch) ++seen[i];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](size_t c) { return c == 1; }));
    CHECK(cursor.pos == 0);  // exhausted exactly at the front
  }
}

TEST_CASE("plan_oer worked example and tie handling") {
  std::vector<double> scores{5.0, 1.0, 4.0, 2.0, 3.0};
  auto spec = make_spec(Strategy::OER, 2, 2);
  auto plan = plan_oer(scores, scores.size(), spec);
  REQUIRE(plan.batches.size() == 2);
  CHECK(plan.batches[0] == Batch{0, 2});
  CHECK(plan.batches[1] == Batch{4, 3});

  // All-equal scores rank by recency alone.
  std::vector<double> flat(6, 1.0);
  auto plan2 = plan_oer(flat, flat.size(), make_spec(Strategy::OER, 2, 2));
  CHECK(plan2.batches[0] == Batch{5, 4});
  CHECK(plan2.batches[1] == Batch{3, 2});
}

TEST_CASE("plan_oer exhausts the buffer when B*G covers it") {
  std::vector<double> scores{3.0, 1.0, 2.0};
  auto spec = make_spec(Strategy::OER, 2, 3);
  auto plan = plan_oer(scores, scores.size(), spec);
  REQUIRE(plan.batches.size() == 3);
  std::vector<size_t> all;
  for (const auto& b : plan.batches) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<size_t>{0, 1, 2});
  CHECK(plan.batches[2].empty());  // score-exhausted tail batch
}

TEST_CASE("plan_oer validation") {
  auto spec = make_spec(Strategy::OER, 2, 2);
  std::vector<double> none;
  CHECK_THROWS_AS(plan_oer(none, 0, spec), std::invalid_argument);
  std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(plan_oer(two, 5, spec), std::invalid_argument);
}

TEST_CASE("plan_oer batches are disjoint and ranked, by brute-force oracle") {
  Rng meta(404);
  for (int rep = 0; rep < 1000; ++rep) {
    size_t n = 1 + meta.uniform_below(60);
    std::vector<double> scores(n);
    for (double& s : scores) s = static_cast<double>(meta.uniform_below(10));
    int b = 1 + static_cast<int>(meta.uniform_below(6));
    int g = 1 + static_cast<int>(meta.uniform_below(6));
    auto plan = plan_oer(scores, n, make_spec(Strategy::OER, b, g));

    size_t take = std::min(static_cast<size_t>(b) * static_cast<size_t>(g), n);
    auto expected = brute_top(scores, take);

    std::vector<size_t> flat;
    for (const auto& batch : plan.batches) {
      flat.insert(flat.end(), batch.begin(), batch.end());
    }
    CAPTURE(n);
    CAPTURE(b);
    CAPTURE(g);
    CHECK(flat == expected);

    std::set<size_t> uniq(flat.begin(), flat.end());
    CHECK(uniq.size() == flat.size());
    for (const auto& batch : plan.batches) {
      CHECK(batch.size() <= static_cast<size_t>(b));
    }
  }
}

TEST_CASE("per_update writes (td+eps)^alpha into the tree") {
  SamplerSpec spec = make_spec(Strategy::PER, 2, 1);
  spec.per_alpha = 0.4;
  spec.per_epsilon = 1e-6;
  SumTree tree(4);
  per_update(tree, 0, 0.0, spec);
  CHECK(tree.leaf(0) == doctest::Approx(std::pow(1e-6, 0.4)));
  CHECK(tree.leaf(0) > 0.0);

  spec.per_alpha = 1.0;
  spec.per_epsilon = 1e-12;
  per_update(tree, 0, 1.0, spec);
  per_update(tree, 1, 3.0, spec);
  CHECK(tree.leaf(0) / tree.total() == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(tree.leaf(1) / tree.total() == doctest::Approx(0.75).epsilon(1e-9));

  // alpha = 0 flattens every priority to 1.
  spec.per_alpha = 0.0;
  per_update(tree, 0, 0.5, spec);
  per_update(tree, 1, 100.0, spec);
  CHECK(tree.leaf(0) == doctest::Approx(1.0));
  CHECK(tree.leaf(1) == doctest::Approx(1.0));
}

TEST_CASE("plan_per rejects an empty or massless tree") {
  auto spec = make_spec(Strategy::PER, 2, 1);
  SumTree tree(8);
  Rng rng(1);
  CHECK_THROWS_AS(plan_per(tree, 8, spec, rng), std::invalid_argument);
  CHECK_THROWS_AS(plan_per(tree, 0, spec, rng), std::invalid_argument);
}

TEST_CASE("plan_per weights: equal priorities give all ones") {
  auto spec = make_spec(Strategy::PER, 4, 3);
  SumTree tree(8);
  tree.fill(std::vector<double>(8, 2.5));
  Rng rng(17);
  auto plan = plan_per(tree, 8, spec, rng);
  REQUIRE(plan.weights.size() == 3);
  for (const auto& w : plan.weights) {
    REQUIRE(w.size() == 4);
    for (double x : w) CHECK(x == doctest::Approx(1.0));
  }
}

TEST_CASE("plan_per weights match the direct formula on priorities {1,3}") {
  SamplerSpec spec = make_spec(Strategy::PER, 2, 200);
  spec.per_beta = 1.0;
  SumTree tree(2);
  const std::vector<double> pri{1.0, 3.0};
  tree.fill(pri);
  Rng rng(23);
  auto plan = plan_per(tree, 2, spec, rng);

  // Stratified draws make the second slot always land in leaf 1; whenever
  // slot one drew leaf 0 the normalized weights must be exactly {1, 1/3}.
  bool saw_mixed = false;
  for (size_t g = 0; g < plan.batches.size(); ++g) {
    const auto& batch = plan.batches[g];
    const auto& w = plan.weights[g];
    CHECK(batch[1] == 1);
    CHECK(*std::max_element(w.begin(), w.end()) == doctest::Approx(1.0));
    if (batch[0] == 0) {
      saw_mixed = true;
      CHECK(w[0] == doctest::Approx(1.0));
      CHECK(w[1] == doctest::Approx(1.0 / 3.0));
    } else {
      CHECK(w[0] == doctest::Approx(1.0));
      CHECK(w[1] == doctest::Approx(1.0));
    }
  }
  CHECK(saw_mixed);  // leaf 0 holds half the first segment's mass
}

TEST_CASE("plan_per stratified frequencies track priority proportions") {
  SamplerSpec spec = make_spec(Strategy::PER, 4, 25000);
  spec.per_beta = 0.6;
  SumTree tree(4);
  const std::vector<double> pri{1.0, 2.0, 3.0, 4.0};
  tree.fill(pri);
  Rng rng(29);
  auto plan = plan_per(tree, 4, spec, rng);

  std::vector<size_t> counts(4, 0);
  size_t draws = 0;
  for (const auto& batch : plan.batches) {
    for (size_t i : batch) {
      REQUIRE(i < 4);
      ++counts[i];
      ++draws;
    }
  }
  const double expected_p[] = {0.1, 0.2, 0.3, 0.4};
  for (size_t i = 0; i < 4; ++i) {
    double mean = static_cast<double>(draws) * expected_p[i];
    double sigma = std::sqrt(static_cast<double>(draws) * expected_p[i] * (1 - expected_p[i]));
    CAPTURE(i);
    // Stratification only shrinks the variance relative to i.i.d. draws.
    CHECK(std::abs(static_cast<double>(counts[i]) - mean) < 4.0 * sigma);
  }
}

TEST_CASE("plan_per indices never exceed the live buffer length") {
  // Tree capacity rounds up to a power of two; the plan must clamp into the
  // shorter live prefix.
  auto spec = make_spec(Strategy::PER, 8, 50);
  SumTree tree(8);
  const std::vector<double> pri{1.0, 1.0, 1.0, 1.0, 1.0};  // 5 live, 3 zero-padded
  tree.fill(pri);
  Rng rng(37);
  auto plan = plan_per(tree, 5, spec, rng);
  for (const auto& batch : plan.batches) {
    for (size_t i : batch) CHECK(i < 5);
  }
}
