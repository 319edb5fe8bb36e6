#pragma once

#include <optional>
#include <vector>

#include "opinn/network.hpp"
#include "opinn/oracle.hpp"
#include "opinn/problems.hpp"
#include "opinn/types.hpp"

namespace opinn {

struct ErrorReport {
  double linf = 0.0;
  Eigen::Vector2d linf_location = Eigen::Vector2d::Zero();
  double feasibility_min = 0.0;    // min over the grid of u_hat - phi
  double boundary_max_err = 0.0;   // enforced boundary, 200 samples
  double y_edge_max_err = -1.0;    // phi6 diagnostic; -1 when not applicable
  double contact_delta = 0.0;
  // pointwise table, aligned with `grid` columns
  Mat grid;
  Vec u_hat, u_ref, phi, abs_err;
  std::vector<char> contact;
};

struct ContactSet {
  std::vector<char> mask;  // |u - phi| <= delta
  Mat free_boundary;       // dim x K transition midpoints
};

struct ComplementaritySummary {
  double median_abs_residual_offcontact = 0.0;
  double max_abs_residual_offcontact = 0.0;
  double min_residual = 0.0;  // superharmonicity: >= -tol for exact Laplace solutions
  Index offcontact_count = 0;
  Index feasibility_violations = 0;
};

// Default contact-detection threshold: 1e-3 times the problem's data range.
double default_contact_delta(const ProblemSpec& problem);

// |u_hat - u_ref| on the grid. u_ref comes from the problem's exact solution
// unless an override is supplied; without either, throws std::invalid_argument
// directing the caller to provide an oracle reference.
ErrorReport error_map(const NetworkParams& net, const ProblemSpec& problem, const Mat& grid,
                      const Vec* u_ref_override = nullptr, double contact_delta = -1.0);

// Same report computed from externally supplied values (oracle exports,
// exact-solution surrogates in tests).
ErrorReport error_map_from_values(const Vec& u_hat, const ProblemSpec& problem, const Mat& grid,
                                  const Vec& u_ref, double contact_delta = -1.0);

// mask + transition midpoints; `grid` must be an eval_grid with `resolution`
// points per axis.
ContactSet contact_set(const Vec& values, const Vec& obstacle_values, double delta,
                       const Mat& grid, Index resolution);

ComplementaritySummary complementarity_report(const NetworkParams& net,
                                              const ProblemSpec& problem, const Mat& grid,
                                              double delta);

// Interpolate a 1D/2D oracle solution onto an eval_grid of the same domain.
Vec interpolate_oracle(const GridSolution& sol, const Domain& domain, const Mat& grid);

}  // namespace opinn
