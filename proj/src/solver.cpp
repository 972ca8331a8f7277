#include "pba/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "pba/adam.hpp"
#include "pba/errors.hpp"

namespace pba {
namespace {

std::vector<double> map_raw(const std::vector<double>& raw, const ParamLayout& layout,
                            double d_min, double d_max, std::vector<double>* chain) {
  std::vector<double> params = raw;
  double range = d_max - d_min;
  for (std::size_t i = 0; i < layout.disp_count(); ++i) {
    double s = 1.0 / (1.0 + std::exp(-raw[i]));
    params[i] = d_min + range * s;
    if (chain != nullptr) (*chain)[i] = range * s * (1.0 - s);
  }
  return params;
}

std::string trace_tail(const std::vector<double>& trace) {
  std::string s = "; objective tail:";
  std::size_t from = trace.size() > 5 ? trace.size() - 5 : 0;
  for (std::size_t i = from; i < trace.size(); ++i) s += " " + std::to_string(trace[i]);
  return s;
}

}  // namespace

void OptimizeConfig::validate() const {
  if (iterations <= 0) throw InvalidInputError("optimize: iterations must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw InvalidInputError("optimize: lr must be positive");
  if (!(lr_drop_factor > 0.0)) throw InvalidInputError("optimize: bad lr drop factor");
  if (lr_drop_point < 0.0 || lr_drop_point > 1.0)
    throw InvalidInputError("optimize: lr drop point must be in [0,1]");
  if (tolerance < 0.0) throw InvalidInputError("optimize: tolerance must be nonnegative");
  if (stage_iterations < 0)
    throw InvalidInputError("optimize: stage iterations must be nonnegative");
  if (scales < 1 || scales > kMaxScales)
    throw InvalidInputError("optimize: scales must be in [1,4]");
  if (!(d_min > 0.0) || !(d_min < d_max) || !std::isfinite(d_max))
    throw InvalidInputError("optimize: need 0 < d_min < d_max");
}

SolveResult solve_snippet(const Snippet& snippet, const OptimizeConfig& config,
                          const LossWeights& weights) {
  config.validate();
  snippet.validate();
  weights.validate();
  ParamLayout layout{snippet.size(), snippet.width(), snippet.height()};

  std::vector<double> raw(layout.size(), 0.0);
  std::vector<double> chain(layout.disp_count(), 0.0);

  ObjectiveOptions full_opts;
  full_opts.scales = config.scales;
  std::vector<double> params = map_raw(raw, layout, config.d_min, config.d_max, nullptr);
  LossReport best_report = evaluate_objective(snippet, params, layout, weights, full_opts);
  double best_value = best_report.total;
  std::vector<double> best_raw = raw;

  SolveResult out;
  out.trace.push_back(best_report.total);

  AdamState state(layout.size(), config.lr);
  int warm = config.scales - 1;
  int drop_iter = static_cast<int>(config.lr_drop_point * config.iterations);
  double prev_total = std::numeric_limits<double>::quiet_NaN();

  int iter = 0;
  for (; iter < config.iterations; ++iter) {
    int stage = config.stage_iterations > 0
                    ? std::min(iter / config.stage_iterations, warm)
                    : warm;
    bool final_stage = stage == warm;
    ObjectiveOptions opts;
    opts.scales = config.scales;
    for (int j = 0; j < config.scales; ++j)
      opts.scale_enabled[j] = final_stage || j >= config.scales - 1 - stage;

    params = map_raw(raw, layout, config.d_min, config.d_max, &chain);
    LossReport rep;
    std::vector<double> grad;
    try {
      std::tie(rep, grad) =
          evaluate_objective_with_gradient(snippet, params, layout, weights, opts);
    } catch (const NumericalError& e) {
      throw NumericalError("solve diverged at iteration " + std::to_string(iter) + ": " +
                           e.what() + trace_tail(out.trace));
    }
    out.trace.push_back(rep.total);
    for (std::size_t i = 0; i < layout.disp_count(); ++i) grad[i] *= chain[i];

    if (iter == 0) {
      double gmax = 0.0;
      for (double g : grad) gmax = std::max(gmax, std::fabs(g));
      if (gmax < 1e-12) {
        out.degenerate = true;
        out.converged = true;
        out.warning = "near-zero gradient at initialization; inputs may lack texture";
        break;
      }
    }
    if (final_stage) {
      if (rep.total < best_value) {
        best_value = rep.total;
        best_report = rep;
        best_raw = raw;
      }
      if (config.tolerance > 0.0 && std::isfinite(prev_total)) {
        double rel = std::fabs(prev_total - rep.total) / std::max(std::fabs(prev_total), 1.0);
        if (rel < config.tolerance) {
          out.converged = true;
          break;
        }
      }
      prev_total = rep.total;
    }

    state.lr = config.lr * (iter >= drop_iter ? config.lr_drop_factor : 1.0);
    adam_step(raw, grad, state);
  }

  out.iterations = iter;
  out.final_report = best_report;
  params = map_raw(best_raw, layout, config.d_min, config.d_max, nullptr);
  out.depths.reserve(snippet.size());
  for (int f = 0; f < snippet.size(); ++f) {
    DepthMap dm(snippet.width(), snippet.height());
    for (std::size_t i = 0; i < layout.plane(); ++i) {
      dm.data[i] = 1.0 / params[f * layout.plane() + i];
    }
    out.depths.push_back(std::move(dm));
  }
  out.poses.reserve(snippet.size() - 1);
  for (int k = 0; k + 1 < snippet.size(); ++k) {
    std::size_t off = layout.pose_offset(k);
    RigidPose p;
    p.rotation = Eigen::Vector3d(params[off], params[off + 1], params[off + 2]);
    p.translation = Eigen::Vector3d(params[off + 3], params[off + 4], params[off + 5]);
    out.poses.push_back(p);
  }
  return out;
}

}  // namespace pba
