#pragma once

#include <functional>
#include <vector>

#include "opinn/types.hpp"

namespace opinn {

// Classical grid solution used as PINN-independent ground truth.
// `n` is the number of grid points per axis including the boundary,
// h = width / (n - 1). Contact points store the obstacle value exactly.
struct GridSolution {
  int dim = 1;
  Index n = 0;           // points per axis
  Mat points;            // dim x M
  Vec values;            // M
  Vec phi;               // M
  std::vector<char> contact;
  Mat free_boundary;     // dim x K, mask-transition midpoints
  long iterations = 0;
  double residual_norm = 0.0;  // discrete residual over non-contact nodes
};

using Scalar1D = std::function<double(double)>;
using Scalar2D = std::function<double(double, double)>;

// Projected SOR for -u'' = 0, u >= phi on (0,1) with u(0)=g0, u(1)=g1.
// Gauss-Seidel sweeps in index order with over-relaxation omega, projection
// after each update; stops when the max change per sweep < tol_iter.
GridSolution psor_1d(const Scalar1D& obstacle, double g0, double g1, Index n,
                     double omega = 1.8, double tol_iter = 1e-12);

// 5-point Laplacian analogue on an axis-aligned square, lexicographic sweeps.
GridSolution psor_2d(const Scalar2D& obstacle, const Scalar2D& boundary_data,
                     const Domain& domain, Index n_per_axis, double omega = 1.8,
                     double tol_iter = 1e-12);

// Obstacle-constrained minimizer of the discrete arc-length energy
//   sum_i h * sqrt(1 + ((u_{i+1}-u_i)/h)^2)
// on (0,1) by projected gradient descent (Barzilai-Borwein step lengths
// with Armijo backtracking); converges when the projected-gradient
// infinity norm drops below 1e-8.
GridSolution membrane_oracle(const Scalar1D& obstacle, double g0, double g1, Index n);

// Root of beta^2 * (1 - log(beta/2)) - 1 on (0.5, 1), |h| < 1e-14.
// (Defined in problems.cpp next to its consumer, declared in problems.hpp.)

}  // namespace opinn
