#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "pickroute/parallel.hpp"
#include "pickroute/random.hpp"

namespace pickroute {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, UniformIndexInRange) {
  Rng rng(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_index(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, NormalMoments) {
  Rng rng(2);
  double sum = 0, sq = 0;
  constexpr int kN = 100000;
  for (int i = 0; i < kN; ++i) {
    const double x = rng.normal(3.0, 2.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / kN;
  EXPECT_NEAR(mean, 3.0, 0.05);
  EXPECT_NEAR(std::sqrt(sq / kN - mean * mean), 2.0, 0.05);
}

TEST(MixSeed, SpreadsNeighbouringInputs) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(5, 6), mix_seed(5, 6));
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; }, 4);
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsLowestFailingIndex) {
  try {
    parallel_for(
        100,
        [](std::size_t i) {
          if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
        },
        4);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}

TEST(Parallel, WorkerCountFromEnvironment) {
  ::setenv("PICKROUTE_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  ::setenv("PICKROUTE_THREADS", "junk", 1);
  EXPECT_GE(worker_count(), 1u);
  ::unsetenv("PICKROUTE_THREADS");
}

}  // namespace
}  // namespace pickroute
