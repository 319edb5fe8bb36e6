#pragma once

#include <Eigen/Core>
#include <functional>

namespace opinn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Eigen::Index;

// Value, spatial gradient and Hessian of a scalar field at one point.
// Storage is fixed-size for dim <= 2; only the leading dim entries are used.
struct DiffBundle {
  int dim = 1;
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();

  double laplacian() const {
    return dim == 1 ? hess(0, 0) : hess(0, 0) + hess(1, 1);
  }
};

// Closed-form scalar field with analytic derivatives (boundary data g,
// boundary-vanishing factor eta, obstacles, exact solutions).
using AnalyticField = std::function<DiffBundle(double, double)>;

inline int hess_channels(int dim) { return dim * (dim + 1) / 2; }

// Channel layout for packed symmetric second derivatives:
// dim==1 -> [xx], dim==2 -> [xx, xy, yy].
inline void hess_pair(int dim, int ch, int& j, int& k) {
  if (dim == 1) {
    j = 0; k = 0;
  } else {
    static const int jj[3] = {0, 0, 1};
    static const int kk[3] = {0, 1, 1};
    j = jj[ch]; k = kk[ch];
  }
}

// Jets for a batch of points. grad has one row per input dimension,
// hess one row per packed channel (see hess_pair).
struct JetBatch {
  Vec value;  // N
  Mat grad;   // dim x N
  Mat hess;   // hess_channels(dim) x N
};

// Axis-aligned box domain, dim 1 or 2.
struct Domain {
  int dim = 1;
  Eigen::Vector2d lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d hi = Eigen::Vector2d::Ones();

  bool contains_closure(double x, double y) const {
    if (x < lo[0] || x > hi[0]) return false;
    if (dim == 2 && (y < lo[1] || y > hi[1])) return false;
    return true;
  }
  bool strictly_inside(double x, double y) const {
    if (x <= lo[0] || x >= hi[0]) return false;
    if (dim == 2 && (y <= lo[1] || y >= hi[1])) return false;
    return true;
  }
};

inline Domain interval(double a, double b) {
  Domain d;
  d.dim = 1;
  d.lo[0] = a;
  d.hi[0] = b;
  return d;
}

inline Domain square(double ax, double bx, double ay, double by) {
  Domain d;
  d.dim = 2;
  d.lo << ax, ay;
  d.hi << bx, by;
  return d;
}

}  // namespace opinn
