#pragma once

#include <cstdint>

namespace sbg {

struct GradCheckResult {
  double max_rel_err = 0.0;        // elements with |analytic| >= 1e-4
  double max_abs_err_small = 0.0;  // elements with |analytic| < 1e-4
  std::size_t elements_checked = 0;
  double seconds = 0.0;

  bool passed(double rel_tol = 1e-4, double abs_tol = 1e-7) const {
    return max_rel_err < rel_tol && max_abs_err_small < abs_tol;
  }
};

// Central-finite-difference verification (h = 1e-5) of every parameter
// gradient at toy sizes: the generator loss is checked against all
// parameters (the adversarial term reaches the discriminator weights), the
// discriminator loss against the discriminator's, with the generated
// futures held fixed as data.
GradCheckResult run_gradcheck(std::uint64_t seed);

}  // namespace sbg
