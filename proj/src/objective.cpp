#include "pba/objective.hpp"

#include <cmath>
#include <string>

#include "pba/errors.hpp"
#include "pba/kernels/kernels.hpp"
#include "pba/pyramid.hpp"
#include "pba/ssim.hpp"
#include "pba/threading.hpp"
#include "pba/warp.hpp"

namespace pba {
namespace {

struct LevelGeom {
  int w = 0, h = 0;
  Intrinsics K;
};

struct PairSpec {
  int k = 0, n = 1;  // source index and frame offset, in direction order
};

// Warp and cost records for one ordered frame pair at one level.
struct PairData {
  int src_f = 0, dst_f = 0;  // original frame indices
  bool identity = false;
  PoseMatrix T;
  std::vector<double> wu, wv, Yx, Yy, Yz;
  std::vector<std::uint8_t> wvalid;
  bool has_recon = false;
  ImageGrid synth;
  std::vector<std::uint8_t> mask;  // warp valid and sample cell in bounds
  SsimStats stats;
  std::vector<double> recon_cost;
  std::vector<double> dfwd, dsamp;
  std::vector<double> dc_cost;
  std::vector<std::uint8_t> dc_valid;
};

double bilerp(double v00, double v10, double v01, double v11, double a, double b) {
  return (1.0 - a) * (1.0 - b) * v00 + a * (1.0 - b) * v10 + (1.0 - a) * b * v01 +
         a * b * v11;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

class Evaluator {
 public:
  Evaluator(const Snippet& snippet, const std::vector<double>& params,
            const ParamLayout& layout, const LossWeights& weights,
            const ObjectiveOptions& opts, bool with_grad)
      : snip_(&snippet), params_(&params), layout_(layout), weights_(weights), opts_(opts),
        with_grad_(with_grad) {
    if (with_grad_ && opts_.frozen != nullptr)
      throw InvalidInputError("objective: frozen evaluation is value-only");
    validate_inputs();
    N_ = snippet.size();
    W_ = snippet.width();
    H_ = snippet.height();
    CH_ = snippet.channels();
    L_ = opts_.scales;
    build_geometry();
    build_pyramids();
    build_poses();
    if (with_grad_) {
      grad.assign(layout_.size(), 0.0);
      dgrad_.resize(N_);
      for (int f = 0; f < N_; ++f) {
        dgrad_[f].resize(L_);
        for (int l = 0; l < L_; ++l) {
          dgrad_[f][l].assign(disp_[f][l].size(), 0.0);
        }
      }
      Rbar_.assign(N_ - 1, Eigen::Matrix3d::Zero());
      tbar_.assign(N_ - 1, Eigen::Vector3d::Zero());
    }
  }

  void run() {
    report.scales.assign(L_, ScaleReport{});
    report.total = 0.0;
    for (int l = 0; l < L_; ++l) {
      ScaleReport& sr = report.scales[l];
      if (!opts_.scale_enabled[l]) continue;
      sr.enabled = true;
      sr.weight = 1.0 / static_cast<double>(1 << l);
      eval_direction(0, l, sr.recon_fwd, sr.dc_fwd, sr.weight);
      eval_direction(1, l, sr.recon_bwd, sr.dc_bwd, sr.weight);
      sr.smooth = smooth_level(l, with_grad_ ? sr.weight * weights_.smooth_weight : 0.0);
      sr.level_total = sr.recon_fwd.sum + sr.recon_bwd.sum +
                       weights_.dc_weight * (sr.dc_fwd.sum + sr.dc_bwd.sum) +
                       weights_.smooth_weight * sr.smooth;
      report.total += sr.weight * sr.level_total;
    }
    if (!std::isfinite(report.total)) {
      throw NumericalError("objective: non-finite total");
    }
    if (with_grad_) finish_gradient();
  }

  LossReport report;
  std::vector<double> grad;
  FrozenClip* capture = nullptr;

 private:
  void validate_inputs() {
    snip_->validate();
    weights_.validate();
    if (opts_.scales < 1 || opts_.scales > kMaxScales)
      throw InvalidInputError("objective: scales must be in [1,4]");
    if (layout_.n_frames != snip_->size() || layout_.width != snip_->width() ||
        layout_.height != snip_->height())
      throw InvalidInputError("objective: layout does not match snippet");
    if (params_->size() != layout_.size())
      throw InvalidInputError("objective: parameter vector has wrong length");
    int min_dim = std::min(snip_->width(), snip_->height());
    if (min_dim < (1 << (opts_.scales - 1)))
      throw InvalidInputError("objective: frames too small for requested scales");
    for (std::size_t i = 0; i < layout_.disp_count(); ++i) {
      double d = (*params_)[i];
      if (!(d > 0.0) || !std::isfinite(d))
        throw InvalidInputError("objective: disparities must be positive and finite");
    }
  }

  void build_geometry() {
    geom_.resize(L_);
    int w = W_, h = H_;
    for (int l = 0; l < L_; ++l) {
      geom_[l] = LevelGeom{w, h, intrinsics_for_level(snip_->K, l + 1)};
      w = half_dim(w);
      h = half_dim(h);
    }
  }

  void build_pyramids() {
    img_pyr_.resize(N_);
    disp_.resize(N_);
    for (int f = 0; f < N_; ++f) {
      img_pyr_[f] = build_pyramid(snip_->frames[f], L_).levels;
      std::vector<double> base(params_->begin() + layout_.disp_index(f, 0, 0),
                               params_->begin() + layout_.disp_index(f, 0, 0) +
                                   layout_.plane());
      disp_[f] = pool_chain(base, W_, H_, L_);
    }
  }

  void build_poses() {
    M_.resize(N_ - 1);
    Minv_.resize(N_ - 1);
    for (int i = 0; i < N_ - 1; ++i) {
      std::size_t off = layout_.pose_offset(i);
      RigidPose p;
      p.rotation = Eigen::Vector3d((*params_)[off], (*params_)[off + 1], (*params_)[off + 2]);
      p.translation =
          Eigen::Vector3d((*params_)[off + 3], (*params_)[off + 4], (*params_)[off + 5]);
      M_[i] = pose_matrix(p);
      Minv_[i] = inverse(M_[i]);
    }
  }

  int fidx(int dir, int k) const { return dir == 0 ? k : N_ - 1 - k; }
  const PoseMatrix& mdir(int dir, int j) const {
    return dir == 0 ? M_[j] : Minv_[N_ - 2 - j];
  }

  PoseMatrix chain_pose(int dir, int k, int n) const {
    PoseMatrix acc = mdir(dir, k);
    for (int j = k + 1; j < k + n; ++j) acc = compose(mdir(dir, j), acc);
    return acc;
  }

  std::vector<PairSpec> pair_list() const {
    std::vector<PairSpec> out;
    for (int k = 0; k < N_ - 1; ++k) {
      for (int n = 1; k + n <= N_ - 1; ++n) out.push_back({k, n});
    }
    return out;
  }

  void check_finite(const std::vector<double>& cost, const std::vector<std::uint8_t>& valid,
                    const char* term, int lvl, const PairData& pd, int w) {
    for (std::size_t i = 0; i < cost.size(); ++i) {
      if (valid[i] && !std::isfinite(cost[i])) {
        throw NumericalError(std::string(term) + " cost non-finite at scale " +
                             std::to_string(lvl + 1) + ", pair " + std::to_string(pd.src_f) +
                             "->" + std::to_string(pd.dst_f) + ", pixel (" +
                             std::to_string(i % w) + "," + std::to_string(i / w) + ")");
      }
    }
  }

  PairData pair_forward(int dir, int lvl, const PairSpec& ps, const FrozenPairStructure* fps) {
    const LevelGeom& g = geom_[lvl];
    std::size_t plane = static_cast<std::size_t>(g.w) * g.h;
    PairData pd;
    pd.src_f = fidx(dir, ps.k);
    pd.dst_f = fidx(dir, ps.k + ps.n);
    pd.T = chain_pose(dir, ps.k, ps.n);
    pd.identity = pd.T.is_identity();
    pd.has_recon = ps.n == 1;
    pd.wu.assign(plane, 0.0);
    pd.wv.assign(plane, 0.0);
    pd.Yx.assign(plane, 0.0);
    pd.Yy.assign(plane, 0.0);
    pd.Yz.assign(plane, 0.0);
    pd.wvalid.assign(plane, 0);
    pd.dfwd.assign(plane, 0.0);
    pd.dsamp.assign(plane, 0.0);
    pd.dc_cost.assign(plane, 0.0);
    pd.dc_valid.assign(plane, 0);
    if (pd.has_recon) {
      pd.synth = ImageGrid(g.w, g.h, CH_);
      pd.mask.assign(plane, 0);
    }
    const std::vector<double>& dsrc = disp_[pd.src_f][lvl];
    const std::vector<double>& ddst = disp_[pd.dst_f][lvl];
    const ImageGrid& target = img_pyr_[pd.dst_f][lvl];
    if (fps != nullptr && fps->wvalid.size() != plane)
      throw InvalidInputError("objective: frozen structure does not match geometry");

    parallel_row_tiles(g.h, [&](int, int rb, int re) {
      for (int y = rb; y < re; ++y) {
        for (int x = 0; x < g.w; ++x) {
          std::size_t i = static_cast<std::size_t>(y) * g.w + x;
          if (fps != nullptr && !fps->wvalid[i]) continue;
          double D = 1.0 / dsrc[i];
          double au = (x - g.K.cx) / g.K.fx;
          double av = (y - g.K.cy) / g.K.fy;
          double u, v, Yx, Yy, Yz;
          bool ok;
          if (pd.identity) {
            u = x;
            v = y;
            Yx = au * D;
            Yy = av * D;
            Yz = D;
            ok = D > kZMin;
          } else {
            Eigen::Vector3d Y = pd.T.R * Eigen::Vector3d(au * D, av * D, D) + pd.T.t;
            Yx = Y.x();
            Yy = Y.y();
            Yz = Y.z();
            ok = Yz > kZMin;
            if (ok || fps != nullptr) {
              u = g.K.fx * Yx / Yz + g.K.cx;
              v = g.K.fy * Yy / Yz + g.K.cy;
              ok = ok && std::isfinite(u) && std::isfinite(v);
            } else {
              u = v = 0.0;
            }
          }
          if (fps == nullptr && !ok) continue;
          pd.wu[i] = u;
          pd.wv[i] = v;
          pd.Yx[i] = Yx;
          pd.Yy[i] = Yy;
          pd.Yz[i] = Yz;
          pd.wvalid[i] = 1;
          int x0, y0, x1, y1;
          double a, b;
          if (fps != nullptr) {
            x0 = fps->cell_x0[i];
            if (x0 < 0) continue;
            y0 = fps->cell_y0[i];
            x1 = x0 + 1 < g.w ? x0 + 1 : g.w - 1;
            y1 = y0 + 1 < g.h ? y0 + 1 : g.h - 1;
            a = u - x0;
            b = v - y0;
          } else {
            BilinearCell c = bilinear_cell(u, v, g.w, g.h);
            if (!c.valid) continue;
            x0 = c.x0;
            y0 = c.y0;
            x1 = c.x1;
            y1 = c.y1;
            a = c.a;
            b = c.b;
          }
          if (pd.has_recon) {
            pd.mask[i] = 1;
            for (int ch = 0; ch < CH_; ++ch) {
              pd.synth.at(x, y, ch) =
                  bilerp(target.at(x0, y0, ch), target.at(x1, y0, ch), target.at(x0, y1, ch),
                         target.at(x1, y1, ch), a, b);
            }
          }
          double ds = bilerp(1.0 / ddst[static_cast<std::size_t>(y0) * g.w + x0],
                             1.0 / ddst[static_cast<std::size_t>(y0) * g.w + x1],
                             1.0 / ddst[static_cast<std::size_t>(y1) * g.w + x0],
                             1.0 / ddst[static_cast<std::size_t>(y1) * g.w + x1], a, b);
          pd.dfwd[i] = Yz;
          pd.dsamp[i] = ds;
          pd.dc_cost[i] = fps != nullptr ? fps->dc_sign[i] * (Yz - ds) : std::fabs(Yz - ds);
          pd.dc_valid[i] = 1;
        }
      }
    });

    if (pd.has_recon) {
      const ImageGrid& real = img_pyr_[pd.src_f][lvl];
      pd.stats = ssim_stats(pd.synth, real);
      pd.recon_cost.assign(plane, 0.0);
      double mix = weights_.ssim_mix;
      parallel_row_tiles(g.h, [&](int, int rb, int re) {
        for (int y = rb; y < re; ++y) {
          for (int x = 0; x < g.w; ++x) {
            std::size_t p = static_cast<std::size_t>(y) * g.w + x;
            if (!pd.mask[p]) continue;
            double acc = 0.0;
            for (int ch = 0; ch < CH_; ++ch) {
              std::size_t si = ch * plane + p;
              double s = ssim_value(pd.stats.mu_x[si], pd.stats.mu_y[si], pd.stats.var_x[si],
                                    pd.stats.var_y[si], pd.stats.cov[si]);
              double diff = pd.synth.data[p * CH_ + ch] - real.data[p * CH_ + ch];
              double l1 = fps != nullptr ? fps->l1_sign[p * CH_ + ch] * diff : std::fabs(diff);
              acc += mix * (1.0 - s) * 0.5 + (1.0 - mix) * l1;
            }
            pd.recon_cost[p] = acc / CH_;
          }
        }
      });
      check_finite(pd.recon_cost, pd.mask, "photometric", lvl, pd, g.w);
    }
    check_finite(pd.dc_cost, pd.dc_valid, "depth-consistency", lvl, pd, g.w);
    return pd;
  }

  // Pools one term over all pairs, producing the clipped sum. `which` is 0
  // for reconstruction, 1 for depth consistency.
  TermStat pool_term(const std::vector<PairData>& pairs, int which, int dir, int lvl) {
    std::vector<double> pooled;
    for (const PairData& pd : pairs) {
      const std::vector<double>& cost = which == 0 ? pd.recon_cost : pd.dc_cost;
      const std::vector<std::uint8_t>& val = which == 0 ? pd.mask : pd.dc_valid;
      if (which == 0 && !pd.has_recon) continue;
      for (std::size_t i = 0; i < val.size(); ++i) {
        if (val[i]) pooled.push_back(cost[i]);
      }
    }
    TermStat st;
    st.valid_count = pooled.size();
    st.empty = pooled.empty();
    const FrozenClip* fz = opts_.frozen;
    if (fz != nullptr) {
      double tau = which == 0 ? fz->recon[lvl][dir] : fz->dc[lvl][dir];
      const std::vector<std::uint8_t>& active =
          which == 0 ? fz->recon_active[lvl][dir] : fz->dc_active[lvl][dir];
      st.threshold = tau;
      double sum = 0.0;
      std::size_t abs_i = 0;
      for (const PairData& pd : pairs) {
        if (which == 0 && !pd.has_recon) continue;
        const std::vector<double>& cost = which == 0 ? pd.recon_cost : pd.dc_cost;
        const std::vector<std::uint8_t>& val = which == 0 ? pd.mask : pd.dc_valid;
        for (std::size_t i = 0; i < val.size(); ++i, ++abs_i) {
          if (!val[i]) continue;
          sum += (abs_i < active.size() && active[abs_i]) ? cost[i] : tau;
        }
      }
      st.sum = sum;
      return st;
    }
    if (st.empty) return st;
    st.threshold = percentile(pooled, weights_.clip_percentile);
    st.sum = kernels::active().sum_clipped(pooled.data(), pooled.size(), st.threshold);
    if (capture != nullptr) {
      std::vector<std::uint8_t>& active =
          which == 0 ? capture->recon_active[lvl][dir] : capture->dc_active[lvl][dir];
      (which == 0 ? capture->recon[lvl][dir] : capture->dc[lvl][dir]) = st.threshold;
      for (const PairData& pd : pairs) {
        if (which == 0 && !pd.has_recon) continue;
        const std::vector<double>& cost = which == 0 ? pd.recon_cost : pd.dc_cost;
        const std::vector<std::uint8_t>& val = which == 0 ? pd.mask : pd.dc_valid;
        for (std::size_t i = 0; i < val.size(); ++i) {
          active.push_back(val[i] && cost[i] <= st.threshold ? 1 : 0);
        }
      }
    }
    return st;
  }

  FrozenPairStructure capture_structure(const PairData& pd, int lvl) {
    const LevelGeom& g = geom_[lvl];
    std::size_t plane = static_cast<std::size_t>(g.w) * g.h;
    FrozenPairStructure fs;
    fs.wvalid = pd.wvalid;
    fs.cell_x0.assign(plane, -1);
    fs.cell_y0.assign(plane, -1);
    fs.dc_sign.assign(plane, 0);
    if (pd.has_recon) fs.l1_sign.assign(plane * CH_, 0);
    const ImageGrid* real = pd.has_recon ? &img_pyr_[pd.src_f][lvl] : nullptr;
    for (std::size_t i = 0; i < plane; ++i) {
      if (!pd.dc_valid[i]) continue;
      BilinearCell c = bilinear_cell(pd.wu[i], pd.wv[i], g.w, g.h);
      fs.cell_x0[i] = c.x0;
      fs.cell_y0[i] = c.y0;
      fs.dc_sign[i] = static_cast<std::int8_t>(sign_of(pd.dfwd[i] - pd.dsamp[i]));
      if (pd.has_recon) {
        for (int ch = 0; ch < CH_; ++ch) {
          fs.l1_sign[i * CH_ + ch] = static_cast<std::int8_t>(
              sign_of(pd.synth.data[i * CH_ + ch] - real->data[i * CH_ + ch]));
        }
      }
    }
    return fs;
  }

  void eval_direction(int dir, int lvl, TermStat& recon, TermStat& dc, double wscale) {
    std::vector<PairSpec> specs = pair_list();
    const std::vector<FrozenPairStructure>* fzp =
        opts_.frozen != nullptr ? &opts_.frozen->pairs[lvl][dir] : nullptr;
    if (fzp != nullptr && fzp->size() != specs.size())
      throw InvalidInputError("objective: frozen structure does not match pair layout");
    std::vector<PairData> pairs;
    for (std::size_t pi = 0; pi < specs.size(); ++pi) {
      pairs.push_back(pair_forward(dir, lvl, specs[pi], fzp != nullptr ? &(*fzp)[pi] : nullptr));
    }
    recon = pool_term(pairs, 0, dir, lvl);
    dc = pool_term(pairs, 1, dir, lvl);
    if (capture != nullptr) {
      for (const PairData& pd : pairs) {
        capture->pairs[lvl][dir].push_back(capture_structure(pd, lvl));
      }
    }
    if (!with_grad_) return;
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
      pair_backward(dir, lvl, specs[pi], pairs[pi], recon, dc, wscale);
    }
  }

  void pair_backward(int dir, int lvl, const PairSpec& ps, const PairData& pd,
                     const TermStat& recon, const TermStat& dc, double wscale) {
    const LevelGeom& g = geom_[lvl];
    std::size_t plane = static_cast<std::size_t>(g.w) * g.h;
    std::vector<double> ubar(plane, 0.0), vbar(plane, 0.0), zext(plane, 0.0);
    const std::vector<double>& dsrc = disp_[pd.src_f][lvl];
    const std::vector<double>& ddst = disp_[pd.dst_f][lvl];
    const ImageGrid& target = img_pyr_[pd.dst_f][lvl];

    if (pd.has_recon && !recon.empty) {
      const ImageGrid& real = img_pyr_[pd.src_f][lvl];
      std::vector<double> Ibar(plane * CH_, 0.0);
      double mix = weights_.ssim_mix;
      double l1w = (1.0 - mix) / CH_;
      double ssw = -mix / (2.0 * CH_);
      parallel_row_tiles(g.h, [&](int, int rb, int re) {
        for (int qy = rb; qy < re; ++qy) {
          for (int qx = 0; qx < g.w; ++qx) {
            std::size_t q = static_cast<std::size_t>(qy) * g.w + qx;
            if (!pd.mask[q]) continue;  // synthesized value is a constant 0
            for (int ch = 0; ch < CH_; ++ch) {
              double xq = pd.synth.data[q * CH_ + ch];
              double yq = real.data[q * CH_ + ch];
              double acc = 0.0;
              for (int py = qy - 1; py <= qy + 1; ++py) {
                if (py < 0 || py >= g.h) continue;
                for (int px = qx - 1; px <= qx + 1; ++px) {
                  if (px < 0 || px >= g.w) continue;
                  std::size_t p = static_cast<std::size_t>(py) * g.w + px;
                  if (!pd.mask[p] || pd.recon_cost[p] > recon.threshold) continue;
                  std::size_t si = ch * plane + p;
                  double np = ssim_window_count(px, py, g.w, g.h);
                  double A = 2.0 * pd.stats.mu_x[si] * pd.stats.mu_y[si] + kSsimC1;
                  double B = 2.0 * pd.stats.cov[si] + kSsimC2;
                  double C = pd.stats.mu_x[si] * pd.stats.mu_x[si] +
                             pd.stats.mu_y[si] * pd.stats.mu_y[si] + kSsimC1;
                  double Dd = pd.stats.var_x[si] + pd.stats.var_y[si] + kSsimC2;
                  double cd = C * Dd;
                  double t1 =
                      (B * 2.0 * pd.stats.mu_y[si] + A * 2.0 * (yq - pd.stats.mu_y[si])) /
                      (np * cd);
                  double t2 = (Dd * 2.0 * pd.stats.mu_x[si] +
                               C * 2.0 * (xq - pd.stats.mu_x[si])) *
                              A * B / (np * cd * cd);
                  acc += t1 - t2;
                }
              }
              double gq = (pd.recon_cost[q] <= recon.threshold) ? wscale : 0.0;
              Ibar[ch * plane + q] =
                  wscale * ssw * acc + gq * l1w * sign_of(xq - yq);
            }
          }
        }
      });
      parallel_row_tiles(g.h, [&](int, int rb, int re) {
        for (int qy = rb; qy < re; ++qy) {
          for (int qx = 0; qx < g.w; ++qx) {
            std::size_t q = static_cast<std::size_t>(qy) * g.w + qx;
            if (!pd.mask[q]) continue;
            BilinearCell c = bilinear_cell(pd.wu[q], pd.wv[q], g.w, g.h);
            double du = 0.0, dv = 0.0;
            for (int ch = 0; ch < CH_; ++ch) {
              double ib = Ibar[ch * plane + q];
              if (ib == 0.0) continue;
              double v00 = target.at(c.x0, c.y0, ch);
              double v10 = target.at(c.x1, c.y0, ch);
              double v01 = target.at(c.x0, c.y1, ch);
              double v11 = target.at(c.x1, c.y1, ch);
              du += ib * ((1.0 - c.b) * (v10 - v00) + c.b * (v11 - v01));
              dv += ib * ((1.0 - c.a) * (v01 - v00) + c.a * (v11 - v10));
            }
            ubar[q] += du;
            vbar[q] += dv;
          }
        }
      });
    }

    if (!dc.empty && weights_.dc_weight != 0.0) {
      double gdc = wscale * weights_.dc_weight;
      for (std::size_t p = 0; p < plane; ++p) {
        if (!pd.dc_valid[p] || pd.dc_cost[p] > dc.threshold) continue;
        int s = sign_of(pd.dfwd[p] - pd.dsamp[p]);
        if (s == 0) continue;
        double g_s = gdc * s;
        zext[p] += g_s;
        BilinearCell c = bilinear_cell(pd.wu[p], pd.wv[p], g.w, g.h);
        std::size_t i00 = static_cast<std::size_t>(c.y0) * g.w + c.x0;
        std::size_t i10 = static_cast<std::size_t>(c.y0) * g.w + c.x1;
        std::size_t i01 = static_cast<std::size_t>(c.y1) * g.w + c.x0;
        std::size_t i11 = static_cast<std::size_t>(c.y1) * g.w + c.x1;
        double D00 = 1.0 / ddst[i00], D10 = 1.0 / ddst[i10];
        double D01 = 1.0 / ddst[i01], D11 = 1.0 / ddst[i11];
        std::vector<double>& dg = dgrad_[pd.dst_f][lvl];
        // d(sampled)/d(corner depth) chained through depth = 1/disparity
        dg[i00] += g_s * (1.0 - c.a) * (1.0 - c.b) * D00 * D00;
        dg[i10] += g_s * c.a * (1.0 - c.b) * D10 * D10;
        dg[i01] += g_s * (1.0 - c.a) * c.b * D01 * D01;
        dg[i11] += g_s * c.a * c.b * D11 * D11;
        double du = (1.0 - c.b) * (D10 - D00) + c.b * (D11 - D01);
        double dv = (1.0 - c.a) * (D01 - D00) + c.a * (D11 - D10);
        ubar[p] -= g_s * du;
        vbar[p] -= g_s * dv;
      }
    }

    Eigen::Matrix3d RbT = Eigen::Matrix3d::Zero();
    Eigen::Vector3d tbT = Eigen::Vector3d::Zero();
    std::vector<double>& dgs = dgrad_[pd.src_f][lvl];
    for (std::size_t p = 0; p < plane; ++p) {
      if (!pd.wvalid[p]) continue;
      double ub = ubar[p], vb = vbar[p], ze = zext[p];
      if (ub == 0.0 && vb == 0.0 && ze == 0.0) continue;
      double Yz = pd.Yz[p];
      double ubfx = ub * g.K.fx;
      double vbfy = vb * g.K.fy;
      Eigen::Vector3d Yb(ubfx / Yz, vbfy / Yz,
                         -(ubfx * pd.Yx[p] + vbfy * pd.Yy[p]) / (Yz * Yz) + ze);
      int x = static_cast<int>(p % static_cast<std::size_t>(g.w));
      int y = static_cast<int>(p / static_cast<std::size_t>(g.w));
      double D = 1.0 / dsrc[p];
      double au = (x - g.K.cx) / g.K.fx;
      double av = (y - g.K.cy) / g.K.fy;
      Eigen::Vector3d X(au * D, av * D, D);
      tbT += Yb;
      RbT += Yb * X.transpose();
      Eigen::Vector3d Xb = pd.T.R.transpose() * Yb;
      double Db = Xb.x() * au + Xb.y() * av + Xb.z();
      dgs[p] += Db * (-D * D);
    }
    chain_backward(dir, ps.k, ps.n, RbT, tbT);
  }

  void chain_backward(int dir, int k, int n, Eigen::Matrix3d Rb, Eigen::Vector3d tb) {
    std::vector<PoseMatrix> pref(n);
    pref[0] = mdir(dir, k);
    for (int j = 1; j < n; ++j) pref[j] = compose(mdir(dir, k + j), pref[j - 1]);
    for (int j = n - 1; j >= 1; --j) {
      const PoseMatrix& L = mdir(dir, k + j);
      const PoseMatrix& P = pref[j - 1];
      Eigen::Matrix3d RbL = Rb * P.R.transpose() + tb * P.t.transpose();
      accum_pose(dir, k + j, RbL, tb);
      Eigen::Matrix3d Rb2 = L.R.transpose() * Rb;
      Eigen::Vector3d tb2 = L.R.transpose() * tb;
      Rb = Rb2;
      tb = tb2;
    }
    accum_pose(dir, k, Rb, tb);
  }

  void accum_pose(int dir, int j, const Eigen::Matrix3d& Rb, const Eigen::Vector3d& tb) {
    if (dir == 0) {
      Rbar_[j] += Rb;
      tbar_[j] += tb;
    } else {
      // direction pose j is the inverse of original pair N-2-j
      int oj = N_ - 2 - j;
      Rbar_[oj] += Rb.transpose() - M_[oj].t * tb.transpose();
      tbar_[oj] += -(M_[oj].R * tb);
    }
  }

  double smooth_level(int lvl, double gate) {
    const LevelGeom& g = geom_[lvl];
    std::size_t plane = static_cast<std::size_t>(g.w) * g.h;
    double total = 0.0;
    const std::int8_t* fz_sign = nullptr;
    std::int8_t* cap_sign = nullptr;
    if (opts_.frozen != nullptr) {
      if (opts_.frozen->smooth_sign[lvl].size() != static_cast<std::size_t>(N_) * plane * 2)
        throw InvalidInputError("objective: frozen structure does not match geometry");
      fz_sign = opts_.frozen->smooth_sign[lvl].data();
    }
    if (capture != nullptr) {
      capture->smooth_sign[lvl].assign(static_cast<std::size_t>(N_) * plane * 2, 0);
      cap_sign = capture->smooth_sign[lvl].data();
    }
    for (int f = 0; f < N_; ++f) {
      const std::vector<double>& dsp = disp_[f][lvl];
      const ImageGrid& img = img_pyr_[f][lvl];
      double mu = kernels::active().sum(dsp.data(), plane) / static_cast<double>(plane);
      std::vector<double> nrm(plane);
      for (std::size_t i = 0; i < plane; ++i) nrm[i] = dsp[i] / mu;
      auto mean_i = [&](int x, int y) {
        double s = 0.0;
        for (int c = 0; c < CH_; ++c) s += img.at(x, y, c);
        return s / CH_;
      };
      std::vector<double> nbar;
      if (gate != 0.0) nbar.assign(plane, 0.0);
      for (int y = 0; y < g.h; ++y) {
        for (int x = 0; x < g.w; ++x) {
          std::size_t p = static_cast<std::size_t>(y) * g.w + x;
          std::size_t e = (static_cast<std::size_t>(f) * plane + p) * 2;
          if (x + 1 < g.w) {
            double w = std::exp(-std::fabs(mean_i(x + 1, y) - mean_i(x, y)));
            double diff = nrm[p + 1] - nrm[p];
            int s = fz_sign != nullptr ? fz_sign[e] : sign_of(diff);
            if (cap_sign != nullptr) cap_sign[e] = static_cast<std::int8_t>(s);
            total += s * diff * w;
            if (gate != 0.0) {
              double gws = gate * w * s;
              nbar[p + 1] += gws;
              nbar[p] -= gws;
            }
          }
          if (y + 1 < g.h) {
            double w = std::exp(-std::fabs(mean_i(x, y + 1) - mean_i(x, y)));
            double diff = nrm[p + g.w] - nrm[p];
            int s = fz_sign != nullptr ? fz_sign[e + 1] : sign_of(diff);
            if (cap_sign != nullptr) cap_sign[e + 1] = static_cast<std::int8_t>(s);
            total += s * diff * w;
            if (gate != 0.0) {
              double gws = gate * w * s;
              nbar[p + g.w] += gws;
              nbar[p] -= gws;
            }
          }
        }
      }
      if (gate != 0.0) {
        std::vector<double> prod(plane);
        kernels::active().multiply(nbar.data(), nrm.data(), prod.data(), plane);
        double S = kernels::active().sum(prod.data(), plane);
        double s_over_n = S / static_cast<double>(plane);
        std::vector<double>& dg = dgrad_[f][lvl];
        for (std::size_t i = 0; i < plane; ++i) dg[i] += (nbar[i] - s_over_n) / mu;
      }
    }
    return total;
  }

  void finish_gradient() {
    for (int f = 0; f < N_; ++f) {
      for (int l = L_ - 1; l >= 1; --l) {
        avg_pool_half_backward(dgrad_[f][l].data(), geom_[l - 1].w, geom_[l - 1].h,
                               dgrad_[f][l - 1].data());
      }
      std::copy(dgrad_[f][0].begin(), dgrad_[f][0].end(),
                grad.begin() + layout_.disp_index(f, 0, 0));
    }
    for (int i = 0; i < N_ - 1; ++i) {
      std::size_t off = layout_.pose_offset(i);
      Eigen::Vector3d omega((*params_)[off], (*params_)[off + 1], (*params_)[off + 2]);
      std::array<Eigen::Matrix3d, 3> J = axis_angle_jacobian(omega);
      for (int k = 0; k < 3; ++k) {
        grad[off + k] = (Rbar_[i].array() * J[k].array()).sum();
      }
      grad[off + 3] = tbar_[i].x();
      grad[off + 4] = tbar_[i].y();
      grad[off + 5] = tbar_[i].z();
    }
    for (double g : grad) {
      if (!std::isfinite(g)) throw NumericalError("objective: non-finite gradient");
    }
  }

  const Snippet* snip_;
  const std::vector<double>* params_;
  ParamLayout layout_;
  LossWeights weights_;
  ObjectiveOptions opts_;
  bool with_grad_;
  int N_ = 0, W_ = 0, H_ = 0, CH_ = 1, L_ = 1;
  std::vector<LevelGeom> geom_;
  std::vector<std::vector<ImageGrid>> img_pyr_;
  std::vector<std::vector<std::vector<double>>> disp_;
  std::vector<PoseMatrix> M_, Minv_;
  std::vector<std::vector<std::vector<double>>> dgrad_;
  std::vector<Eigen::Matrix3d> Rbar_;
  std::vector<Eigen::Vector3d> tbar_;
};

}  // namespace

std::vector<double> pack_params(const std::vector<DepthMap>& depths,
                                const std::vector<RigidPose>& poses, ParamLayout* layout) {
  if (depths.empty()) throw InvalidInputError("pack_params: no depth maps");
  if (poses.size() + 1 != depths.size())
    throw InvalidInputError("pack_params: need one pose per consecutive pair");
  layout->n_frames = static_cast<int>(depths.size());
  layout->width = depths.front().width;
  layout->height = depths.front().height;
  std::vector<double> params(layout->size());
  for (std::size_t f = 0; f < depths.size(); ++f) {
    const DepthMap& d = depths[f];
    if (d.width != layout->width || d.height != layout->height)
      throw InvalidInputError("pack_params: depth maps must share dimensions");
    for (std::size_t i = 0; i < d.pixel_count(); ++i) {
      if (!d.valid[i] || !(d.data[i] > 0.0) || !std::isfinite(d.data[i]))
        throw InvalidInputError("pack_params: depths must be valid, positive, finite");
      params[f * layout->plane() + i] = 1.0 / d.data[i];
    }
  }
  for (std::size_t i = 0; i < poses.size(); ++i) {
    std::size_t off = layout->pose_offset(static_cast<int>(i));
    for (int k = 0; k < 3; ++k) params[off + k] = poses[i].rotation[k];
    for (int k = 0; k < 3; ++k) params[off + 3 + k] = poses[i].translation[k];
  }
  return params;
}

LossReport evaluate_objective(const Snippet& snippet, const std::vector<double>& params,
                              const ParamLayout& layout, const LossWeights& weights,
                              const ObjectiveOptions& opts) {
  Evaluator ev(snippet, params, layout, weights, opts, false);
  ev.run();
  return ev.report;
}

std::pair<LossReport, std::vector<double>> evaluate_objective_with_gradient(
    const Snippet& snippet, const std::vector<double>& params, const ParamLayout& layout,
    const LossWeights& weights, const ObjectiveOptions& opts) {
  Evaluator ev(snippet, params, layout, weights, opts, true);
  ev.run();
  return {ev.report, std::move(ev.grad)};
}

FrozenClip freeze_clip(const Snippet& snippet, const std::vector<double>& params,
                       const ParamLayout& layout, const LossWeights& weights,
                       const ObjectiveOptions& opts) {
  if (opts.frozen != nullptr)
    throw InvalidInputError("freeze_clip: options already carry a frozen clip");
  FrozenClip out;
  for (int l = 0; l < kMaxScales; ++l) {
    for (int d = 0; d < 2; ++d) {
      out.recon[l][d] = 0.0;
      out.dc[l][d] = 0.0;
    }
  }
  Evaluator ev(snippet, params, layout, weights, opts, false);
  ev.capture = &out;
  ev.run();
  return out;
}

LossReport snippet_objective(const Snippet& snippet, const std::vector<RigidPose>& poses,
                             const std::vector<DepthMap>& depths, const LossWeights& weights,
                             int scales) {
  ParamLayout layout;
  std::vector<double> params = pack_params(depths, poses, &layout);
  ObjectiveOptions opts;
  opts.scales = scales;
  return evaluate_objective(snippet, params, layout, weights, opts);
}

}  // namespace pba
