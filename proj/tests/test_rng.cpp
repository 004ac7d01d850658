#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "cokfluct/rng.hpp"

using namespace cokfluct;

TEST_CASE("philox4x32-10 known answers") {
  // Random123 kat_vectors for philox4x32_10
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are deterministic and distinct") {
  TrialRng a(5, 17, Stream::kAEntries), b(5, 17, Stream::kAEntries);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {0ull, 1ull, 0xffffffffffffffffull})
    for (std::uint64_t trial : {0ull, 1ull, 1ull << 40})
      for (auto s : {Stream::kAEntries, Stream::kBEntries, Stream::kBootstrap, Stream::kAuxiliary}) {
        TrialRng r(seed, trial, s);
        firsts.insert(r.next_u64());
      }
  CHECK(firsts.size() == 36);
}

TEST_CASE("bounded draws are uniform") {
  // chi-square with 6 degrees of freedom; 30 is far beyond the 0.9999 quantile
  TrialRng rng(9, 0, Stream::kAuxiliary);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const auto x = rng.bounded(7);
    REQUIRE(x < 7);
    ++counts[x];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - draws / 7.0) * (c - draws / 7.0) / (draws / 7.0);
  CHECK(chi2 < 30.0);
  CHECK(rng.bounded(1) == 0);
}

TEST_CASE("uniform01 lies in [0, 1) with the right mean") {
  TrialRng rng(10, 0, Stream::kAuxiliary);
  double sum = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // standard error of the mean is sqrt(1/12 / n) ~ 0.0009
  CHECK(std::abs(sum / draws - 0.5) < 0.0037);
}
