#pragma once

#include <string>
#include <vector>

#include "gridcast/s2s.hpp"

namespace gridcast {

// Analytic-vs-central-difference comparison, one entry per parameter
// tensor. The per-tensor error is max|a - f| / max(1, max|a|, max|f|).
struct GradCheckReport {
  struct TensorReport {
    std::string name;
    double max_rel_err = 0.0;
  };
  std::vector<TensorReport> tensors;
  double worst = 0.0;

  bool pass(double tol = 1e-5) const { return worst < tol; }
};

// Checks BPTT gradients of the window SSE for a randomly initialized stack
// on a random window. Dropout is disabled (stochastic masks break the
// differentiability of a fixed loss). `corrupt_backward` deliberately
// perturbs one analytic gradient so the checker itself can be tested.
GradCheckReport gradcheck_stack(std::size_t layers, std::size_t units, std::size_t steps,
                                CellVariant variant, std::uint64_t seed, double fd_step = 1e-5,
                                bool corrupt_backward = false);

// Checks the joint-training gradients of the horizon SSE through the
// encoder -> decoder state handoff, for every encoder and decoder tensor.
GradCheckReport gradcheck_s2s(std::size_t layers, std::size_t units, std::size_t window,
                              std::size_t horizon, CellVariant variant, std::uint64_t seed,
                              double fd_step = 1e-5);

}  // namespace gridcast
