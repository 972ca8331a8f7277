#include "pba/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pba/errors.hpp"
#include "pba/gradcheck.hpp"
#include "pba/gradient.hpp"
#include "pba/io.hpp"
#include "pba/metrics.hpp"
#include "pba/objective.hpp"
#include "pba/solver.hpp"
#include "pba/synthetic.hpp"
#include "pba/upsample.hpp"

namespace pba {
namespace {

namespace fs = std::filesystem;

std::string frame_name(const std::string& stem, int i, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d%s", stem.c_str(), i, ext.c_str());
  return buf;
}

Eigen::Vector3d get_vec3(const Config& cfg, const std::string& key,
                         const Eigen::Vector3d& def) {
  if (!cfg.has(key)) return def;
  std::vector<double> v = cfg.get_doubles(key);
  if (v.size() != 3)
    throw InvalidInputError("config: key '" + key + "' needs exactly 3 numbers");
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

SceneSpec scene_from_config(const Config& cfg) {
  SceneSpec scene;
  scene.width = cfg.get_int("width", 64);
  scene.height = cfg.get_int("height", 64);
  scene.channels = cfg.get_int("channels", 1);
  double fx = cfg.get_double("fx", static_cast<double>(scene.width));
  scene.K = Intrinsics(fx, cfg.get_double("fy", fx),
                       cfg.get_double("cx", (scene.width - 1) / 2.0),
                       cfg.get_double("cy", (scene.height - 1) / 2.0));
  int n = cfg.get_int("surfaces", 1);
  if (n < 1) throw InvalidInputError("config: surfaces must be at least 1");
  for (int i = 0; i < n; ++i) {
    std::string p = "surface" + std::to_string(i) + ".";
    SurfaceSpec s;
    std::string kind = cfg.get_string(p + "kind", "plane");
    if (kind == "plane") {
      s.kind = SurfaceSpec::Kind::kPlane;
    } else if (kind == "box") {
      s.kind = SurfaceSpec::Kind::kBox;
    } else {
      throw InvalidInputError("config: " + p + "kind must be plane or box");
    }
    s.point = get_vec3(cfg, p + "point", s.point);
    s.normal = get_vec3(cfg, p + "normal", s.normal);
    s.box_min = get_vec3(cfg, p + "box_min", s.box_min);
    s.box_max = get_vec3(cfg, p + "box_max", s.box_max);
    s.frequency = cfg.get_double(p + "frequency", 1.0);
    s.contrast = cfg.get_double(p + "contrast", 0.8);
    s.base = cfg.get_double(p + "base", 0.5);
    s.seed = cfg.get_uint(p + "seed", static_cast<unsigned>(i + 1));
    scene.surfaces.push_back(s);
  }
  return scene;
}

MotionSpec motion_from_config(const Config& cfg) {
  MotionSpec motion;
  motion.n_frames = cfg.get_int("frames", 3);
  for (int k = 0; k + 1 < motion.n_frames; ++k) {
    std::string key = "step" + std::to_string(k);
    std::vector<double> v = cfg.get_doubles(key);
    if (v.empty()) v.assign(6, 0.0);  // missing step = static camera
    if (v.size() != 6)
      throw InvalidInputError("config: key '" + key + "' needs 6 numbers");
    RigidPose p;
    p.rotation = Eigen::Vector3d(v[0], v[1], v[2]);
    p.translation = Eigen::Vector3d(v[3], v[4], v[5]);
    motion.steps.push_back(p);
  }
  return motion;
}

Corruption corruption_from_config(const Config& cfg) {
  Corruption c;
  std::vector<double> patch = cfg.get_doubles("patch");
  if (!patch.empty()) {
    if (patch.size() != 4)
      throw InvalidInputError("config: key 'patch' needs 'x y w h'");
    c.patch_x = static_cast<int>(patch[0]);
    c.patch_y = static_cast<int>(patch[1]);
    c.patch_w = static_cast<int>(patch[2]);
    c.patch_h = static_cast<int>(patch[3]);
  }
  c.dx = cfg.get_double("patch_dx", 0.0);
  c.dy = cfg.get_double("patch_dy", 0.0);
  c.texture_lo = cfg.get_double("patch_lo", c.texture_lo);
  c.texture_hi = cfg.get_double("patch_hi", c.texture_hi);
  c.seed = cfg.get_uint("patch_seed", c.seed);
  c.max_area_fraction = cfg.get_double("max_area_fraction", c.max_area_fraction);
  c.brightness = cfg.get_doubles("brightness");
  return c;
}

// Flag values override config keys of the same name.
struct CommonFlags {
  double clip_q = -1.0, ssim_mix = -1.0, dc_weight = -1.0, smooth_weight = -1.0;
  int scales = 0;
  long long seed = -1;

  void add_weight_flags(CLI::App* cmd) {
    cmd->add_option("--clip-q", clip_q, "clip percentile q in (0,100]");
    cmd->add_option("--ssim-mix", ssim_mix, "SSIM vs L1 mixing factor in [0,1]");
    cmd->add_option("--dc-weight", dc_weight, "depth-consistency weight");
    cmd->add_option("--smooth-weight", smooth_weight, "smoothness weight");
    cmd->add_option("--scales", scales, "pyramid scales in [1,4]");
  }

  LossWeights weights(const Config& cfg) const {
    LossWeights w;
    w.clip_percentile = clip_q >= 0.0 ? clip_q : cfg.get_double("clip_q", w.clip_percentile);
    w.ssim_mix = ssim_mix >= 0.0 ? ssim_mix : cfg.get_double("ssim_mix", w.ssim_mix);
    w.dc_weight = dc_weight >= 0.0 ? dc_weight : cfg.get_double("dc_weight", w.dc_weight);
    w.smooth_weight =
        smooth_weight >= 0.0 ? smooth_weight : cfg.get_double("smooth_weight", w.smooth_weight);
    w.validate();
    return w;
  }

  int scale_count(const Config& cfg) const {
    return scales > 0 ? scales : cfg.get_int("scales", 4);
  }
};

OptimizeConfig optimize_from_config(const Config& cfg, const CommonFlags& flags) {
  OptimizeConfig oc;
  oc.iterations = cfg.get_int("iterations", oc.iterations);
  oc.lr = cfg.get_double("lr", oc.lr);
  oc.lr_drop_factor = cfg.get_double("lr_drop_factor", oc.lr_drop_factor);
  oc.lr_drop_point = cfg.get_double("lr_drop_point", oc.lr_drop_point);
  oc.tolerance = cfg.get_double("tolerance", oc.tolerance);
  oc.stage_iterations = cfg.get_int("stage_iterations", oc.stage_iterations);
  oc.scales = flags.scale_count(cfg);
  oc.d_min = cfg.get_double("d_min", oc.d_min);
  oc.d_max = cfg.get_double("d_max", oc.d_max);
  oc.seed = flags.seed >= 0 ? static_cast<std::uint32_t>(flags.seed)
                            : cfg.get_uint("seed", oc.seed);
  oc.validate();
  return oc;
}

void write_report(const std::string& path, const LossReport& rep, const SolveResult* solve) {
  std::string out;
  out += "total = " + std::to_string(rep.total) + "\n";
  for (std::size_t s = 0; s < rep.scales.size(); ++s) {
    const ScaleReport& sr = rep.scales[s];
    std::string p = "scale" + std::to_string(s + 1) + ".";
    out += p + "enabled = " + (sr.enabled ? "1" : "0") + "\n";
    if (!sr.enabled) continue;
    out += p + "weight = " + std::to_string(sr.weight) + "\n";
    out += p + "recon_fwd = " + std::to_string(sr.recon_fwd.sum) + "\n";
    out += p + "recon_bwd = " + std::to_string(sr.recon_bwd.sum) + "\n";
    out += p + "dc_fwd = " + std::to_string(sr.dc_fwd.sum) + "\n";
    out += p + "dc_bwd = " + std::to_string(sr.dc_bwd.sum) + "\n";
    out += p + "smooth = " + std::to_string(sr.smooth) + "\n";
    out += p + "level_total = " + std::to_string(sr.level_total) + "\n";
  }
  if (solve != nullptr) {
    out += "iterations = " + std::to_string(solve->iterations) + "\n";
    out += "converged = " + std::string(solve->converged ? "1" : "0") + "\n";
    out += "degenerate = " + std::string(solve->degenerate ? "1" : "0") + "\n";
    if (!solve->warning.empty()) out += "warning = " + solve->warning + "\n";
  }
  write_file(path, out);
}

void print_metrics(const std::string& prefix, const DepthMetrics& m, std::string* sink) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%sabs_rel = %.6f\n%ssq_rel = %.6f\n%srmse = %.6f\n%srmse_log = %.6f\n"
                "%sdelta1 = %.6f\n%sdelta2 = %.6f\n%sdelta3 = %.6f\n%spixels = %zu\n",
                prefix.c_str(), m.abs_rel, prefix.c_str(), m.sq_rel, prefix.c_str(), m.rmse,
                prefix.c_str(), m.rmse_log, prefix.c_str(), m.delta1, prefix.c_str(),
                m.delta2, prefix.c_str(), m.delta3, prefix.c_str(), m.n_pixels);
  std::cout << buf;
  if (sink != nullptr) *sink += buf;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir,
              const CommonFlags& flags) {
  Config cfg = load_config(config_path);
  SceneSpec scene = scene_from_config(cfg);
  MotionSpec motion = motion_from_config(cfg);
  if (flags.seed >= 0) {
    for (std::size_t i = 0; i < scene.surfaces.size(); ++i)
      scene.surfaces[i].seed = static_cast<std::uint32_t>(flags.seed) + static_cast<std::uint32_t>(i);
  }
  RenderResult r = render_snippet(scene, motion);
  Corruption corr = corruption_from_config(cfg);
  CorruptedSnippet cs = apply_corruption(r.snippet, corr);
  bool corrupted = corr.patch_w > 0 || !corr.brightness.empty();

  fs::create_directories(out_dir);
  std::string ext = scene.channels == 3 ? ".ppm" : ".pgm";
  for (int i = 0; i < cs.snippet.size(); ++i) {
    save_image(out_dir + "/" + frame_name("frame", i, ext), cs.snippet.frames[i]);
    save_depth(out_dir + "/" + frame_name("depth", i, ".pfm"), r.depths[i]);
    if (corrupted) {
      ImageGrid mask(scene.width, scene.height, 1);
      for (std::size_t p = 0; p < mask.data.size(); ++p)
        mask.data[p] = cs.corrupted[i].flags[p] ? 1.0 : 0.0;
      save_image(out_dir + "/" + frame_name("mask", i, ".pgm"), mask, 255);
    }
  }
  save_intrinsics(out_dir + "/intrinsics.txt", scene.K);
  save_poses(out_dir + "/poses.txt", r.poses);
  std::cout << "wrote " << cs.snippet.size() << " frames to " << out_dir << "\n";
  return 0;
}

int cmd_optimize(const std::string& config_path, const std::vector<std::string>& frame_paths,
                 const std::string& intrinsics_path, const std::string& out_dir,
                 const CommonFlags& flags) {
  Config cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  Snippet snippet;
  std::vector<std::string> paths = frame_paths;
  if (paths.empty()) {
    int n = cfg.get_int("frames", 0);
    for (int i = 0; i < n; ++i) {
      std::string key = "frame" + std::to_string(i);
      if (!cfg.has(key)) throw InvalidInputError("config: missing key '" + key + "'");
      paths.push_back(cfg.get_string(key));
    }
  }
  if (paths.size() < 2)
    throw UsageError("optimize: need at least 2 frames (--frame or config frameN keys)");
  for (const std::string& p : paths) snippet.frames.push_back(load_image(p));
  std::string kpath =
      !intrinsics_path.empty() ? intrinsics_path : cfg.get_string("intrinsics");
  if (kpath.empty()) throw UsageError("optimize: --intrinsics is required");
  snippet.K = load_intrinsics(kpath);

  LossWeights weights = flags.weights(cfg);
  OptimizeConfig oc = optimize_from_config(cfg, flags);
  SolveResult res = solve_snippet(snippet, oc, weights);

  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < res.depths.size(); ++i)
    save_depth(out_dir + "/" + frame_name("depth", static_cast<int>(i), ".pfm"),
               res.depths[i]);
  save_poses(out_dir + "/poses.txt", res.poses);
  write_report(out_dir + "/report.txt", res.final_report, &res);
  std::cout << "objective = " << res.final_report.total << " after " << res.iterations
            << " iterations\n";
  if (!res.warning.empty()) std::cout << "warning: " << res.warning << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, double cap,
             bool median, const std::string& out_path) {
  std::string warn;
  DepthMap pred = load_depth(pred_path, &warn);
  if (!warn.empty()) std::cerr << "warning: " << pred_path << ": " << warn << "\n";
  warn.clear();
  DepthMap gt = load_depth(gt_path, &warn);
  if (!warn.empty()) std::cerr << "warning: " << gt_path << ": " << warn << "\n";
  std::string sink;
  DepthMetrics m = compute_metrics(pred, gt, cap);
  print_metrics("", m, &sink);
  if (median) {
    DepthMetrics ms = compute_metrics(median_scale(pred, gt), gt, cap);
    print_metrics("scaled_", ms, &sink);
  }
  if (!out_path.empty()) write_file(out_path, sink);
  return 0;
}

int cmd_gradcheck(long long seed, int size, int frames, int channels, int snippets,
                  double step, double tol, std::size_t max_coords,
                  const std::string& config_path, const CommonFlags& flags) {
  Config cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  LossWeights weights = flags.weights(cfg);
  ObjectiveOptions opts;
  opts.scales = flags.scale_count(cfg);
  std::uint32_t base = seed >= 0 ? static_cast<std::uint32_t>(seed) : 7u;
  double worst = 0.0;
  for (int i = 0; i < snippets; ++i) {
    GradcheckCase c = make_gradcheck_case(base + static_cast<std::uint32_t>(i), size,
                                          frames, channels);
    GradientCheckReport r = gradient_check(c.snippet, c.params, c.layout, weights, opts,
                                           step, max_coords, base + static_cast<std::uint32_t>(i));
    std::printf("snippet %d: checked %zu coordinates, max relative error %.3e\n", i,
                r.checked, r.max_rel_error);
    worst = std::max(worst, r.max_rel_error);
  }
  std::printf("max relative error %.3e (tolerance %.1e)\n", worst, tol);
  if (!(worst < tol)) {
    std::cerr << "gradcheck failed: " << worst << " >= " << tol << "\n";
    return 2;
  }
  return 0;
}

int cmd_upsample(const std::string& depth_path, const std::string& guide_path, int factor,
                 const std::string& mode, double range_sigma, double spatial_sigma,
                 const std::string& out_path) {
  std::string warn;
  DepthMap low = load_depth(depth_path, &warn);
  if (!warn.empty()) std::cerr << "warning: " << depth_path << ": " << warn << "\n";
  DepthMap result;
  if (mode == "bilinear") {
    result = bilinear_upsample_depth(low, factor);
  } else if (mode == "guided") {
    if (guide_path.empty()) throw UsageError("upsample: guided mode requires --guide");
    ImageGrid guide = load_image(guide_path);
    GuidedUpsampleResult r =
        guided_upsample_depth(low, guide, factor, range_sigma, spatial_sigma);
    std::cout << "fallback pixels: " << r.fallback.count() << "\n";
    result = std::move(r.depth);
  } else {
    throw UsageError("upsample: mode must be bilinear or guided");
  }
  save_depth(out_path, result);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"photometric bundle adjustment for short monocular snippets"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* synth = app.add_subcommand("synth", "render a synthetic snippet to files");
  std::string synth_config, synth_out = "out";
  synth->add_option("--config", synth_config, "scene/motion/corruption config")->required();
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--seed", flags.seed, "override surface texture seeds");

  auto* opt = app.add_subcommand("optimize", "jointly solve depths and poses");
  std::string opt_config, opt_intrinsics, opt_out = "out";
  std::vector<std::string> opt_frames;
  opt->add_option("--config", opt_config, "solver/weights config");
  opt->add_option("--frame", opt_frames, "input frame (repeat in order)");
  opt->add_option("--intrinsics", opt_intrinsics, "intrinsics text file");
  opt->add_option("--out", opt_out, "output directory");
  opt->add_option("--seed", flags.seed, "solver seed");
  flags.add_weight_flags(opt);

  auto* ev = app.add_subcommand("eval", "depth metrics between prediction and GT");
  std::string ev_pred, ev_gt, ev_out;
  double ev_cap = 80.0;
  bool ev_no_median = false;
  ev->add_option("--pred", ev_pred, "predicted depth (PFM)")->required();
  ev->add_option("--gt", ev_gt, "ground-truth depth (PFM)")->required();
  ev->add_option("--cap", ev_cap, "depth cap");
  ev->add_flag("--no-median", ev_no_median, "skip median-scaled metrics");
  ev->add_option("--out", ev_out, "also write metrics to this file");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  std::string gc_config;
  int gc_size = 16, gc_frames = 3, gc_channels = 3, gc_snippets = 5;
  double gc_step = 1e-6, gc_tol = 1e-5;
  std::size_t gc_coords = 512;
  gc->add_option("--config", gc_config, "weights config");
  gc->add_option("--seed", flags.seed, "base seed");
  gc->add_option("--size", gc_size, "snippet side length");
  gc->add_option("--frames", gc_frames, "frames per snippet");
  gc->add_option("--channels", gc_channels, "image channels");
  gc->add_option("--snippets", gc_snippets, "number of snippets");
  gc->add_option("--step", gc_step, "finite-difference step");
  gc->add_option("--tol", gc_tol, "max relative error tolerance");
  gc->add_option("--max-coords", gc_coords, "coordinates checked per snippet");
  flags.add_weight_flags(gc);

  auto* up = app.add_subcommand("upsample", "bilinear or guided depth upsampling");
  std::string up_depth, up_guide, up_mode = "guided", up_out = "upsampled.pfm";
  int up_factor = 2;
  double up_rs = 0.1, up_ss = 0.0;
  up->add_option("--depth", up_depth, "low-resolution depth (PFM)")->required();
  up->add_option("--guide", up_guide, "high-resolution guide image");
  up->add_option("--factor", up_factor, "integer upsampling factor >= 2");
  up->add_option("--mode", up_mode, "bilinear or guided");
  up->add_option("--range-sigma", up_rs, "guide intensity sigma");
  up->add_option("--spatial-sigma", up_ss, "spatial sigma in high-res pixels");
  up->add_option("--out", up_out, "output PFM path");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(synth_config, synth_out, flags);
    if (opt->parsed())
      return cmd_optimize(opt_config, opt_frames, opt_intrinsics, opt_out, flags);
    if (ev->parsed()) return cmd_eval(ev_pred, ev_gt, ev_cap, !ev_no_median, ev_out);
    if (gc->parsed())
      return cmd_gradcheck(flags.seed, gc_size, gc_frames, gc_channels, gc_snippets,
                           gc_step, gc_tol, gc_coords, gc_config, flags);
    if (up->parsed())
      return cmd_upsample(up_depth, up_guide, up_factor, up_mode, up_rs, up_ss, up_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidInputError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace pba
