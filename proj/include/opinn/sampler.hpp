#pragma once

#include <cstdint>

#include "opinn/rng.hpp"
#include "opinn/types.hpp"

namespace opinn {

enum class SampleMode { fixed, resample_each_iter };

// Interior collocation points, columns of `points` in draw order.
struct CollocationSet {
  Mat points;  // dim x n
  uint64_t seed = 0;
  SampleMode mode = SampleMode::fixed;
};

// n i.i.d. uniform points strictly inside the domain. The stream is
// consumed coordinate-major per point (x, then y in 2D), so the full
// sequence is pinned by (domain, n, seed).
CollocationSet sample(const Domain& domain, Index n, uint64_t seed);

// Same, but continuing an existing stream (per-iteration resampling).
Mat sample_stream(const Domain& domain, Index n, Xoshiro256& rng);

// Uniform lattice with `resolution` points per axis, boundary included.
// 2D points are row-major: x varies fastest, index = iy*nx + ix.
Mat eval_grid(const Domain& domain, Index resolution);

}  // namespace opinn
