#pragma once

#include <cstdint>

namespace fairlens::rng {

// Stateless counter-based generator.  Every draw is a pure function of
// (seed, stream, counter), so sampling is bit-reproducible no matter how
// record ranges are split across workers.  Streams are keyed by node index
// and counters by record index (or sample index for Monte-Carlo loops).
//
// Construction: two rounds of the SplitMix64 finalizer over the key tuple.
// Not cryptographic; statistical quality is what matters here.

uint64_t mix64(uint64_t z) noexcept;

uint64_t draw(uint64_t seed, uint64_t stream, uint64_t counter) noexcept;

// Uniform on the open interval (0, 1); never returns an exact 0 or 1.
double uniform01(uint64_t seed, uint64_t stream, uint64_t counter) noexcept;

// Standard normal via the inverse CDF, one uniform per deviate.
double normal(uint64_t seed, uint64_t stream, uint64_t counter) noexcept;

// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
double inverse_normal_cdf(double p) noexcept;

// Derives an independent sub-seed; used when one operation needs several
// unrelated sampling passes under a single user-facing seed.
uint64_t sub_seed(uint64_t seed, uint64_t salt) noexcept;

}  // namespace fairlens::rng
