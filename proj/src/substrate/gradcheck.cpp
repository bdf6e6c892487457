#include "rtnet/substrate/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace rtnet {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
}

GradCheckReport gradient_check(const ParamList<double>& params,
                               const std::function<double()>& loss_with_grad,
                               const std::function<double()>& loss_only,
                               const GradCheckOptions& options) {
  loss_with_grad();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto* p : params) analytic.push_back(p->grad.values());

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto* p = params[k];
    GradCheckEntry entry;
    entry.name = p->name;
    const std::size_t n = p->size();
    std::size_t stride = 1;
    if (options.max_entries_per_param > 0 && n > options.max_entries_per_param) {
      stride = (n + options.max_entries_per_param - 1) / options.max_entries_per_param;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      double& v = p->value[i];
      const double saved = v;
      v = saved + options.eps;
      const double plus = loss_only();
      v = saved - options.eps;
      const double minus = loss_only();
      v = saved;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double err = relative_error(analytic[k][i], numeric);
      entry.max_rel_error = std::max(entry.max_rel_error, err);
      entry.max_abs_analytic = std::max(entry.max_abs_analytic, std::abs(analytic[k][i]));
      ++entry.checked;
    }
    entry.pass = entry.max_rel_error < options.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace rtnet
