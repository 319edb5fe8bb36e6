#include "opinn/sampler.hpp"

#include <stdexcept>

namespace opinn {

Mat sample_stream(const Domain& domain, Index n, Xoshiro256& rng) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Mat pts(domain.dim, n);
  for (Index i = 0; i < n; ++i)
    for (int a = 0; a < domain.dim; ++a)
      pts(a, i) = rng.uniform(domain.lo[a], domain.hi[a]);
  return pts;
}

CollocationSet sample(const Domain& domain, Index n, uint64_t seed) {
  Xoshiro256 rng(seed);
  CollocationSet set;
  set.points = sample_stream(domain, n, rng);
  set.seed = seed;
  return set;
}

Mat eval_grid(const Domain& domain, Index resolution) {
  if (resolution < 2) throw std::invalid_argument("eval_grid: resolution must be >= 2");
  const Index n = resolution;
  auto coord = [&](int axis, Index i) {
    return domain.lo[axis] + (domain.hi[axis] - domain.lo[axis]) *
                                 static_cast<double>(i) / static_cast<double>(n - 1);
  };
  if (domain.dim == 1) {
    Mat pts(1, n);
    for (Index i = 0; i < n; ++i) pts(0, i) = coord(0, i);
    pts(0, n - 1) = domain.hi[0];  // exact endpoint
    return pts;
  }
  Mat pts(2, n * n);
  for (Index iy = 0; iy < n; ++iy) {
    const double y = (iy == n - 1) ? domain.hi[1] : coord(1, iy);
    for (Index ix = 0; ix < n; ++ix) {
      const double x = (ix == n - 1) ? domain.hi[0] : coord(0, ix);
      pts.col(iy * n + ix) << x, y;
    }
  }
  return pts;
}

}  // namespace opinn
