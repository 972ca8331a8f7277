#include "pba/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pba/errors.hpp"

namespace pba {
namespace {

std::vector<double> fd_at(const Snippet& snippet, std::vector<double> work,
                          const ParamLayout& layout, const LossWeights& weights,
                          const ObjectiveOptions& opts,
                          const std::vector<std::size_t>& indices, double step) {
  if (!(step > 0.0)) throw InvalidInputError("finite differences: step must be positive");
  FrozenClip fz = freeze_clip(snippet, work, layout, weights, opts);
  ObjectiveOptions frozen_opts = opts;
  frozen_opts.frozen = &fz;
  std::vector<double> out(indices.size(), 0.0);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    std::size_t i = indices[k];
    if (i >= work.size()) throw InvalidInputError("finite differences: index out of range");
    double x0 = work[i];
    work[i] = x0 + step;
    double fp = evaluate_objective(snippet, work, layout, weights, frozen_opts).total;
    work[i] = x0 - step;
    double fm = evaluate_objective(snippet, work, layout, weights, frozen_opts).total;
    work[i] = x0;
    out[k] = (fp - fm) / (2.0 * step);
  }
  return out;
}

}  // namespace

std::vector<double> finite_difference_gradient(const Snippet& snippet,
                                               const std::vector<double>& params,
                                               const ParamLayout& layout,
                                               const LossWeights& weights,
                                               const ObjectiveOptions& opts, double step) {
  std::vector<std::size_t> all(params.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fd_at(snippet, params, layout, weights, opts, all, step);
}

std::vector<double> finite_difference_gradient_at(const Snippet& snippet,
                                                  const std::vector<double>& params,
                                                  const ParamLayout& layout,
                                                  const LossWeights& weights,
                                                  const ObjectiveOptions& opts,
                                                  const std::vector<std::size_t>& indices,
                                                  double step) {
  return fd_at(snippet, params, layout, weights, opts, indices, step);
}

GradientCheckReport gradient_check(const Snippet& snippet, const std::vector<double>& params,
                                   const ParamLayout& layout, const LossWeights& weights,
                                   const ObjectiveOptions& opts, double step,
                                   std::size_t max_coords, std::uint32_t seed) {
  auto [report, analytic] =
      evaluate_objective_with_gradient(snippet, params, layout, weights, opts);
  (void)report;

  std::vector<std::size_t> indices;
  std::size_t n_pose = 6 * static_cast<std::size_t>(layout.n_frames - 1);
  for (std::size_t i = 0; i < n_pose; ++i) indices.push_back(layout.disp_count() + i);
  std::size_t disp_budget = max_coords > indices.size() ? max_coords - indices.size() : 0;
  if (layout.disp_count() <= disp_budget) {
    for (std::size_t i = 0; i < layout.disp_count(); ++i) indices.push_back(i);
  } else if (disp_budget > 0) {
    std::vector<std::size_t> all_disp(layout.disp_count());
    std::iota(all_disp.begin(), all_disp.end(), std::size_t{0});
    std::mt19937 rng(seed);
    std::shuffle(all_disp.begin(), all_disp.end(), rng);
    all_disp.resize(disp_budget);
    std::sort(all_disp.begin(), all_disp.end());
    indices.insert(indices.end(), all_disp.begin(), all_disp.end());
  }

  std::vector<double> numeric =
      fd_at(snippet, params, layout, weights, opts, indices, step);

  GradientCheckReport out;
  out.checked = indices.size();
  out.seed = seed;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    double a = analytic[indices[k]];
    double n = numeric[k];
    double rel = std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), 1.0});
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst_index = indices[k];
      out.analytic_at_worst = a;
      out.numeric_at_worst = n;
    }
  }
  return out;
}

}  // namespace pba
