#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rtnet/substrate/tensor.hpp"

namespace rtnet {

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_analytic = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool pass = true;
};

struct GradCheckOptions {
  double eps = 1e-5;
  double tolerance = 1e-4;
  // Entries per parameter to perturb; 0 checks every entry. When limited,
  // entries are taken at an even stride so every region of a tensor is hit.
  std::size_t max_entries_per_param = 0;
};

// |a - n| / max(|a| + |n|, 1e-6): relative where gradients are meaningful,
// absolute (scaled) where both sides vanish.
double relative_error(double analytic, double numeric);

// `loss_with_grad` must zero and then fill the parameter gradients and return
// the loss; `loss_only` must return the loss without touching gradients.
// Compares analytic gradients against central differences in double precision.
GradCheckReport gradient_check(const ParamList<double>& params,
                               const std::function<double()>& loss_with_grad,
                               const std::function<double()>& loss_only,
                               const GradCheckOptions& options = {});

}  // namespace rtnet
