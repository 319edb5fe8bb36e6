#include "opinn/residuals.hpp"

#include <cmath>
#include <stdexcept>

namespace opinn {

static void check_p(OperatorTag tag, int p) {
  if (tag == OperatorTag::plaplace2d && p < 2)
    throw std::invalid_argument("p-Laplacian residual requires p >= 2");
}

double residual(OperatorTag tag, int p_exponent, const DiffBundle& b) {
  check_p(tag, p_exponent);
  switch (tag) {
    case OperatorTag::laplace1d: {
      const double r = -b.hess(0, 0);
      if (std::isnan(r)) throw std::runtime_error("residual: NaN detected in bundle");
      return r;
    }
    case OperatorTag::membrane1d: {
      const double q2 = 1.0 + b.grad[0] * b.grad[0];
      const double r = -b.hess(0, 0) / (q2 * std::sqrt(q2));
      if (std::isnan(r)) throw std::runtime_error("residual: NaN detected in bundle");
      return r;
    }
    case OperatorTag::laplace2d: {
      const double r = -(b.hess(0, 0) + b.hess(1, 1));
      if (std::isnan(r)) throw std::runtime_error("residual: NaN detected in bundle");
      return r;
    }
    case OperatorTag::plaplace2d: {
      const double ux = b.grad[0], uy = b.grad[1];
      const double hxx = b.hess(0, 0), hxy = b.hess(0, 1), hyy = b.hess(1, 1);
      const double G = ux * ux + uy * uy;
      const double lap = hxx + hyy;
      const double quad = ux * (ux * hxx + uy * hxy) + uy * (ux * hxy + uy * hyy);
      double div;
      if (p_exponent == 4) {
        div = G * lap + 2.0 * quad;
      } else if (p_exponent == 2) {
        div = lap;
      } else {
        div = G > 0.0 ? std::pow(G, 0.5 * (p_exponent - 2)) * lap +
                            (p_exponent - 2) * std::pow(G, 0.5 * (p_exponent - 4)) * quad
                      : 0.0;
      }
      const double r = -div + 1.0;
      if (std::isnan(r)) throw std::runtime_error("residual: NaN detected in bundle");
      return r;
    }
  }
  throw std::logic_error("residual: unknown operator tag");
}

ResidualBatch residual_batch(OperatorTag tag, int p_exponent, const JetBatch& jets) {
  check_p(tag, p_exponent);
  const Index N = jets.value.size();
  ResidualBatch out;
  switch (tag) {
    case OperatorTag::laplace1d: {
      out.R = -jets.hess.row(0).transpose();
      out.dR_dgrad = Mat::Zero(1, N);
      out.dR_dhess = Mat::Constant(1, N, -1.0);
      return out;
    }
    case OperatorTag::membrane1d: {
      const auto gx = jets.grad.row(0).array();
      const auto hxx = jets.hess.row(0).array();
      const auto q2 = (1.0 + gx.square()).eval();
      const auto q3 = (q2 * q2.sqrt()).eval();  // (1+gx^2)^(3/2)
      out.R = (-hxx / q3).matrix().transpose();
      out.dR_dgrad.resize(1, N);
      out.dR_dgrad.row(0).array() = 3.0 * hxx * gx / (q3 * q2);
      out.dR_dhess.resize(1, N);
      out.dR_dhess.row(0).array() = -1.0 / q3;
      return out;
    }
    case OperatorTag::laplace2d: {
      out.R = -(jets.hess.row(0) + jets.hess.row(2)).transpose();
      out.dR_dgrad = Mat::Zero(2, N);
      out.dR_dhess.resize(3, N);
      out.dR_dhess.row(0).setConstant(-1.0);
      out.dR_dhess.row(1).setZero();
      out.dR_dhess.row(2).setConstant(-1.0);
      return out;
    }
    case OperatorTag::plaplace2d: {
      if (p_exponent != 4)
        throw std::invalid_argument("residual_batch: p-Laplacian gradients implemented for p=4");
      const auto ux = jets.grad.row(0).array();
      const auto uy = jets.grad.row(1).array();
      const auto hxx = jets.hess.row(0).array();
      const auto hxy = jets.hess.row(1).array();
      const auto hyy = jets.hess.row(2).array();
      const auto G = (ux.square() + uy.square()).eval();
      const auto lap = (hxx + hyy).eval();
      out.R = (-(G * lap + 2.0 * (ux * (ux * hxx + uy * hxy) + uy * (ux * hxy + uy * hyy))) + 1.0)
                  .matrix()
                  .transpose();
      out.dR_dgrad.resize(2, N);
      out.dR_dgrad.row(0).array() = -(2.0 * ux * lap + 4.0 * ux * hxx + 4.0 * uy * hxy);
      out.dR_dgrad.row(1).array() = -(2.0 * uy * lap + 4.0 * uy * hyy + 4.0 * ux * hxy);
      out.dR_dhess.resize(3, N);
      out.dR_dhess.row(0).array() = -(G + 2.0 * ux.square());
      out.dR_dhess.row(1).array() = -4.0 * ux * uy;
      out.dR_dhess.row(2).array() = -(G + 2.0 * uy.square());
      return out;
    }
  }
  throw std::logic_error("residual_batch: unknown operator tag");
}

}  // namespace opinn
