#pragma once

// Counter-based Philox4x32-10 generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC'11). A trial's stream is a pure function
// of (master seed, trial index, stream id), so any trial can be regenerated
// in isolation and at any precision.

#include <array>
#include <cstdint>

namespace cokfluct {

inline constexpr const char* kGeneratorName = "philox4x32-10";

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 block: 10 rounds on (counter, key).
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Named substreams of a trial.
enum class Stream : std::uint32_t {
  kAEntries = 0,   ///< A-blocks / product factors
  kBEntries = 1,   ///< B-blocks
  kBootstrap = 2,  ///< resampling in the report aggregation
  kAuxiliary = 3,  ///< tests and diagnostics
};

class TrialRng {
 public:
  TrialRng(std::uint64_t master_seed, std::uint64_t trial, Stream stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform in [0, bound) by Lemire's multiply-and-reject; bound >= 1.
  std::uint64_t bounded(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter ctr_;
  PhiloxCounter out_{};
  unsigned used_ = 4;
};

}  // namespace cokfluct
