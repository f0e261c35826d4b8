#include "eegscreen/nn/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "eegscreen/error.hpp"
#include "eegscreen/parallel.hpp"

namespace eegscreen::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::ShapeMismatch, what);
}

struct ConvGeometry {
  std::size_t batch, in_c, h, w, out_c, kh, kw, stride, pad, out_h, out_w;

  std::size_t patch() const { return in_c * kh * kw; }
  std::size_t positions() const { return out_h * out_w; }
};

// Column block [patch x positions] for one sample, written at column offset
// `col0` of a row-major matrix with `ld` columns. Only output rows
// [oy0, oy1) are produced.
template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* cols, std::size_t ld, std::size_t col0, std::size_t oy0 = 0,
            std::size_t oy1 = std::numeric_limits<std::size_t>::max()) {
  oy1 = std::min(oy1, g.out_h);
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.in_c; ++c) {
    const T* plane = x + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx, ++row) {
        T* dst = cols + row * ld + col0;
        // Output columns [lo, hi) read inside the unpadded row.
        std::size_t lo = 0, hi = 0;
        while (lo < g.out_w && lo * g.stride + kx < g.pad) ++lo;
        hi = lo;
        while (hi < g.out_w && hi * g.stride + kx < g.pad + g.w) ++hi;
        for (std::size_t oy = oy0; oy < oy1; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          T* out_row = dst + (oy - oy0) * g.out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
            std::fill(out_row, out_row + g.out_w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * g.w;
          std::fill(out_row, out_row + lo, T(0));
          if (g.stride == 1) {
            std::copy(src + (lo + kx - g.pad), src + (hi + kx - g.pad), out_row + lo);
          } else {
            for (std::size_t ox = lo; ox < hi; ++ox) out_row[ox] = src[ox * g.stride + kx - g.pad];
          }
          std::fill(out_row + hi, out_row + g.out_w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, std::size_t ld, std::size_t col0, const ConvGeometry& g, T* dx) {
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.in_c; ++c) {
    T* plane = dx + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx, ++row) {
        const T* src = cols + row * ld + col0;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * g.w;
          const T* in_row = src + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.w)) dst[ix] += in_row[ox];
          }
        }
      }
    }
  }
}

// Samples are processed in chunks whose im2col buffer stays under this many
// elements. The chunking depends only on shapes, so results do not depend on
// the thread count.
constexpr std::size_t kColumnBudget = std::size_t{1} << 21;

// The forward pass tiles each sample over output rows so the column block
// stays cache resident.
constexpr std::size_t kTileBudget = std::size_t{1} << 20;

struct Chunk {
  std::size_t begin, end;
};

std::vector<Chunk> make_chunks(std::size_t batch, std::size_t per_sample) {
  const std::size_t size = std::max<std::size_t>(1, kColumnBudget / std::max<std::size_t>(1, per_sample));
  std::vector<Chunk> chunks;
  for (std::size_t b = 0; b < batch; b += size) chunks.push_back({b, std::min(batch, b + size)});
  return chunks;
}

template <typename T>
Tensor<T>& grad_of(const std::shared_ptr<Node<T>>& n) {
  return n->grad;
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, std::size_t stride, std::size_t pad) {
  require(x.defined() && weight.defined(), "conv2d: missing input or weight");
  const auto& xd = x.dims();
  const auto& wd = weight.dims();
  require(xd.size() == 4, "conv2d: input must be [B,C,H,W], got " + shape_string(xd));
  require(wd.size() == 4, "conv2d: weight must be [O,C,K,K], got " + shape_string(wd));
  require(wd[1] == xd[1], "conv2d: weight expects " + std::to_string(wd[1]) + " channels, input has " +
                              std::to_string(xd[1]));
  require(stride >= 1, "conv2d: stride must be >= 1");
  require(xd[2] + 2 * pad >= wd[2] && xd[3] + 2 * pad >= wd[3], "conv2d: kernel larger than padded input");
  if (bias.defined()) require(bias.value().size() == wd[0], "conv2d: bias size must equal output channels");

  ConvGeometry g{xd[0], xd[1], xd[2], xd[3], wd[0], wd[2], wd[3], stride, pad, 0, 0};
  g.out_h = (g.h + 2 * pad - g.kh) / stride + 1;
  g.out_w = (g.w + 2 * pad - g.kw) / stride + 1;
  const std::size_t patch = g.patch(), pos = g.positions();

  Tensor<T> out({g.batch, g.out_c, g.out_h, g.out_w});
  const auto chunks = make_chunks(g.batch, patch * pos);
  const T* xv = x.value().data();
  const CMapMat<T> wm(weight.value().data(), static_cast<Eigen::Index>(g.out_c), static_cast<Eigen::Index>(patch));
  const T* bv = bias.defined() ? bias.value().data() : nullptr;
  const std::size_t tile_rows = std::clamp<std::size_t>(kTileBudget / (patch * g.out_w), 1, g.out_h);

  parallel_for(g.batch, [&](std::size_t b) {
    thread_local std::vector<T> buf;
    buf.resize(patch * tile_rows * g.out_w);
    T* dst = out.data() + b * g.out_c * pos;
    for (std::size_t oy0 = 0; oy0 < g.out_h; oy0 += tile_rows) {
      const std::size_t oy1 = std::min(g.out_h, oy0 + tile_rows);
      const std::size_t np = (oy1 - oy0) * g.out_w;
      im2col(xv + b * g.in_c * g.h * g.w, g, buf.data(), np, 0, oy0, oy1);
      const CMapMat<T> cols(buf.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(np));
      Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>> y(dst + oy0 * g.out_w, static_cast<Eigen::Index>(g.out_c),
                                                       static_cast<Eigen::Index>(np),
                                                       Eigen::OuterStride<>(static_cast<Eigen::Index>(pos)));
      y.noalias() = wm * cols;
    }
    if (bv)
      for (std::size_t o = 0; o < g.out_c; ++o)
        for (std::size_t p = 0; p < pos; ++p) dst[o * pos + p] += bv[o];
  });

  std::vector<Var<T>> parents = {x, weight};
  if (bias.defined()) parents.push_back(bias);
  return make_op<T>(std::move(out), std::move(parents), [g, chunks](Node<T>& node) {
    const auto& xn = node.parents[0];
    const auto& wn = node.parents[1];
    const bool has_bias = node.parents.size() > 2;
    const std::size_t patch = g.patch(), pos = g.positions();
    const T* dy = node.grad.data();
    const CMapMat<T> wm(wn->value.data(), static_cast<Eigen::Index>(g.out_c), static_cast<Eigen::Index>(patch));
    std::vector<RowMat<T>> dw_parts(chunks.size());
    std::vector<std::vector<T>> db_parts(chunks.size());
    T* dx = xn->requires_grad ? grad_of(xn).data() : nullptr;

    parallel_for(chunks.size(), [&](std::size_t ci) {
      const auto [b0, b1] = chunks[ci];
      const std::size_t ld = (b1 - b0) * pos;
      RowMat<T> dym(static_cast<Eigen::Index>(g.out_c), static_cast<Eigen::Index>(ld));
      for (std::size_t b = b0; b < b1; ++b)
        for (std::size_t o = 0; o < g.out_c; ++o)
          std::copy_n(dy + (b * g.out_c + o) * pos, pos, dym.data() + o * ld + (b - b0) * pos);
      if (wn->requires_grad) {
        RowMat<T> cols(static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(ld));
        for (std::size_t b = b0; b < b1; ++b)
          im2col(xn->value.data() + b * g.in_c * g.h * g.w, g, cols.data(), ld, (b - b0) * pos);
        dw_parts[ci] = dym * cols.transpose();
      }
      if (has_bias && node.parents[2]->requires_grad) {
        db_parts[ci].assign(g.out_c, T(0));
        for (std::size_t o = 0; o < g.out_c; ++o) db_parts[ci][o] = dym.row(static_cast<Eigen::Index>(o)).sum();
      }
      if (dx) {
        RowMat<T> dcols = wm.transpose() * dym;
        for (std::size_t b = b0; b < b1; ++b)
          col2im_add(dcols.data(), ld, (b - b0) * pos, g, dx + b * g.in_c * g.h * g.w);
      }
    });

    if (wn->requires_grad) {
      MapMat<T> dw(grad_of(wn).data(), static_cast<Eigen::Index>(g.out_c), static_cast<Eigen::Index>(patch));
      for (const auto& part : dw_parts) dw += part;
    }
    if (has_bias && node.parents[2]->requires_grad) {
      auto& db = grad_of(node.parents[2]);
      for (const auto& part : db_parts)
        for (std::size_t o = 0; o < g.out_c; ++o) db[o] += part[o];
    }
  });
}

template <typename T>
Var<T> batch_norm2d(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, BatchNormStats<T>& stats,
                    bool training, double eps, double momentum) {
  const auto& xd = x.dims();
  require(xd.size() == 4, "batch_norm2d: input must be [B,C,H,W], got " + shape_string(xd));
  const std::size_t B = xd[0], C = xd[1], HW = xd[2] * xd[3];
  require(gamma.value().size() == C && beta.value().size() == C, "batch_norm2d: gamma/beta size must equal channels");
  require(stats.running_mean.size() == C && stats.running_var.size() == C,
          "batch_norm2d: running stats size must equal channels");

  const std::size_t n = B * HW;
  auto xhat = std::make_shared<std::vector<T>>(x.value().size());
  std::vector<T> inv_std(C);
  Tensor<T> out(xd);
  const T* xv = x.value().data();
  const T* gv = gamma.value().data();
  const T* bv = beta.value().data();

  for (std::size_t c = 0; c < C; ++c) {
    double mean, var;
    if (training) {
      double s = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const T* p = xv + (b * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) s += p[i];
      }
      mean = s / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const T* p = xv + (b * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) ss += (p[i] - mean) * (p[i] - mean);
      }
      var = ss / static_cast<double>(n);
      const double unbiased = n > 1 ? ss / static_cast<double>(n - 1) : var;
      stats.running_mean[c] = static_cast<T>((1.0 - momentum) * stats.running_mean[c] + momentum * mean);
      stats.running_var[c] = static_cast<T>((1.0 - momentum) * stats.running_var[c] + momentum * unbiased);
    } else {
      mean = stats.running_mean[c];
      var = stats.running_var[c];
    }
    const double istd = 1.0 / std::sqrt(var + eps);
    inv_std[c] = static_cast<T>(istd);
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t off = (b * C + c) * HW;
      for (std::size_t i = 0; i < HW; ++i) {
        const T xh = static_cast<T>((xv[off + i] - mean) * istd);
        (*xhat)[off + i] = xh;
        out[off + i] = gv[c] * xh + bv[c];
      }
    }
  }

  return make_op<T>(std::move(out), {x, gamma, beta}, [=](Node<T>& node) {
    const auto& xn = node.parents[0];
    const auto& gn = node.parents[1];
    const auto& bn = node.parents[2];
    const T* dy = node.grad.data();
    const T* gval = gn->value.data();
    for (std::size_t c = 0; c < C; ++c) {
      double sum_dy = 0.0, sum_dy_xh = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t off = (b * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) {
          sum_dy += dy[off + i];
          sum_dy_xh += static_cast<double>(dy[off + i]) * (*xhat)[off + i];
        }
      }
      if (gn->requires_grad) gn->grad[c] += static_cast<T>(sum_dy_xh);
      if (bn->requires_grad) bn->grad[c] += static_cast<T>(sum_dy);
      if (!xn->requires_grad) continue;
      T* dx = xn->grad.data();
      const double scale = static_cast<double>(gval[c]) * inv_std[c];
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t off = (b * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) {
          if (training) {
            const double nd = static_cast<double>(n);
            dx[off + i] += static_cast<T>(scale * (dy[off + i] - sum_dy / nd - (*xhat)[off + i] * sum_dy_xh / nd));
          } else {
            dx[off + i] += static_cast<T>(scale * dy[off + i]);
          }
        }
      }
    }
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out(x.dims());
  const T* xv = x.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  return make_op<T>(std::move(out), {x}, [](Node<T>& node) {
    const auto& xn = node.parents[0];
    const T* xv = xn->value.data();
    for (std::size_t i = 0; i < node.grad.size(); ++i)
      if (xv[i] > T(0)) xn->grad[i] += node.grad[i];
  });
}

template <typename T>
Var<T> max_pool2d(const Var<T>& x, std::size_t kernel, std::size_t stride, std::size_t pad) {
  const auto& xd = x.dims();
  require(xd.size() == 4, "max_pool2d: input must be [B,C,H,W], got " + shape_string(xd));
  require(kernel >= 1 && stride >= 1, "max_pool2d: kernel and stride must be >= 1");
  require(2 * pad <= kernel, "max_pool2d: pad must not exceed kernel / 2");
  require(xd[2] + 2 * pad >= kernel && xd[3] + 2 * pad >= kernel, "max_pool2d: kernel larger than padded input");
  const std::size_t B = xd[0], C = xd[1], H = xd[2], W = xd[3];
  const std::size_t oh = (H + 2 * pad - kernel) / stride + 1;
  const std::size_t ow = (W + 2 * pad - kernel) / stride + 1;
  Tensor<T> out({B, C, oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  const T* xv = x.value().data();
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    const T* plane = xv + bc * H * W;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        T best = -std::numeric_limits<T>::infinity();
        std::size_t best_idx = 0;
        bool found = false;
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
            const std::size_t idx = static_cast<std::size_t>(iy) * W + static_cast<std::size_t>(ix);
            if (!found || plane[idx] > best) {
              best = plane[idx];
              best_idx = idx;
              found = true;
            }
          }
        }
        const std::size_t o = (bc * oh + oy) * ow + ox;
        out[o] = best;
        (*argmax)[o] = bc * H * W + best_idx;
      }
    }
  }
  return make_op<T>(std::move(out), {x}, [argmax](Node<T>& node) {
    auto& dx = node.parents[0]->grad;
    for (std::size_t o = 0; o < node.grad.size(); ++o) dx[(*argmax)[o]] += node.grad[o];
  });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  const auto& xd = x.dims();
  require(xd.size() == 4, "global_avg_pool: input must be [B,C,H,W], got " + shape_string(xd));
  const std::size_t BC = xd[0] * xd[1], HW = xd[2] * xd[3];
  Tensor<T> out({xd[0], xd[1]});
  const T* xv = x.value().data();
  for (std::size_t i = 0; i < BC; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < HW; ++k) s += xv[i * HW + k];
    out[i] = static_cast<T>(s / static_cast<double>(HW));
  }
  return make_op<T>(std::move(out), {x}, [BC, HW](Node<T>& node) {
    auto& dx = node.parents[0]->grad;
    const T inv = T(1) / static_cast<T>(HW);
    for (std::size_t i = 0; i < BC; ++i) {
      const T g = node.grad[i] * inv;
      for (std::size_t k = 0; k < HW; ++k) dx[i * HW + k] += g;
    }
  });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  const auto& xd = x.dims();
  const auto& wd = weight.dims();
  require(xd.size() == 2, "linear: input must be [B,in], got " + shape_string(xd));
  require(wd.size() == 2 && wd[1] == xd[1], "linear: weight must be [out," + std::to_string(xd[1]) + "], got " +
                                                shape_string(wd));
  if (bias.defined()) require(bias.value().size() == wd[0], "linear: bias size must equal outputs");
  const auto B = static_cast<Eigen::Index>(xd[0]);
  const auto in = static_cast<Eigen::Index>(xd[1]);
  const auto outn = static_cast<Eigen::Index>(wd[0]);
  Tensor<T> out({xd[0], wd[0]});
  MapMat<T> y(out.data(), B, outn);
  y.noalias() = CMapMat<T>(x.value().data(), B, in) * CMapMat<T>(weight.value().data(), outn, in).transpose();
  if (bias.defined())
    for (Eigen::Index b = 0; b < B; ++b)
      for (Eigen::Index o = 0; o < outn; ++o) y(b, o) += bias.value()[static_cast<std::size_t>(o)];

  std::vector<Var<T>> parents = {x, weight};
  if (bias.defined()) parents.push_back(bias);
  return make_op<T>(std::move(out), std::move(parents), [B, in, outn](Node<T>& node) {
    const auto& xn = node.parents[0];
    const auto& wn = node.parents[1];
    const CMapMat<T> dy(node.grad.data(), B, outn);
    if (xn->requires_grad) {
      MapMat<T> dx(xn->grad.data(), B, in);
      dx += dy * CMapMat<T>(wn->value.data(), outn, in);
    }
    if (wn->requires_grad) {
      MapMat<T> dw(wn->grad.data(), outn, in);
      dw += dy.transpose() * CMapMat<T>(xn->value.data(), B, in);
    }
    if (node.parents.size() > 2 && node.parents[2]->requires_grad) {
      auto& db = node.parents[2]->grad;
      for (Eigen::Index o = 0; o < outn; ++o) db[static_cast<std::size_t>(o)] += dy.col(o).sum();
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require(a.dims() == b.dims(), "add: shapes differ " + shape_string(a.dims()) + " vs " + shape_string(b.dims()));
  Tensor<T> out(a.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return make_op<T>(std::move(out), {a, b}, [](Node<T>& node) {
    for (const auto& p : node.parents) {
      if (!p->requires_grad) continue;
      for (std::size_t i = 0; i < node.grad.size(); ++i) p->grad[i] += node.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require(a.dims() == b.dims(), "mul: shapes differ " + shape_string(a.dims()) + " vs " + shape_string(b.dims()));
  Tensor<T> out(a.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return make_op<T>(std::move(out), {a, b}, [](Node<T>& node) {
    const auto& pa = node.parents[0];
    const auto& pb = node.parents[1];
    for (std::size_t i = 0; i < node.grad.size(); ++i) {
      if (pa->requires_grad) pa->grad[i] += node.grad[i] * pb->value[i];
      if (pb->requires_grad) pb->grad[i] += node.grad[i] * pa->value[i];
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  double s = 0.0;
  for (T v : x.value().values()) s += v;
  return make_op<T>(Tensor<T>({1}, {static_cast<T>(s)}), {x}, [](Node<T>& node) {
    auto& dx = node.parents[0]->grad;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += node.grad[0];
  });
}

template <typename T>
Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& coeffs) {
  require(coeffs.size() == x.value().size(), "weighted_sum: coefficient count must match input");
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += static_cast<double>(x.value()[i]) * coeffs[i];
  return make_op<T>(Tensor<T>({1}, {static_cast<T>(s)}), {x}, [coeffs](Node<T>& node) {
    auto& dx = node.parents[0]->grad;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += node.grad[0] * coeffs[i];
  });
}

template <typename T>
Var<T> softmax(const Var<T>& x) {
  const auto& xd = x.dims();
  require(xd.size() == 2, "softmax: input must be [B,K], got " + shape_string(xd));
  const std::size_t B = xd[0], K = xd[1];
  Tensor<T> out(xd);
  for (std::size_t b = 0; b < B; ++b) {
    const T* row = x.value().data() + b * K;
    const double mx = *std::max_element(row, row + K);
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) z += std::exp(row[k] - mx);
    for (std::size_t k = 0; k < K; ++k) out[b * K + k] = static_cast<T>(std::exp(row[k] - mx) / z);
  }
  auto probs = std::make_shared<Tensor<T>>(out);
  return make_op<T>(std::move(out), {x}, [probs, B, K](Node<T>& node) {
    auto& dx = node.parents[0]->grad;
    for (std::size_t b = 0; b < B; ++b) {
      double dot = 0.0;
      for (std::size_t k = 0; k < K; ++k) dot += node.grad[b * K + k] * (*probs)[b * K + k];
      for (std::size_t k = 0; k < K; ++k)
        dx[b * K + k] += static_cast<T>((*probs)[b * K + k] * (node.grad[b * K + k] - dot));
    }
  });
}

template <typename T>
Var<T> cross_entropy(const Var<T>& logits, const std::vector<int>& labels) {
  const auto& ld = logits.dims();
  require(ld.size() == 2, "cross_entropy: logits must be [B,K], got " + shape_string(ld));
  const std::size_t B = ld[0], K = ld[1];
  if (labels.size() != B) throw Error(Errc::LengthMismatch, "cross_entropy: one label per row required");
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= K) throw Error(Errc::BadLabel, "label " + std::to_string(l));
  auto probs = std::make_shared<std::vector<double>>(B * K);
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const T* row = logits.value().data() + b * K;
    const double mx = *std::max_element(row, row + K);
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) z += std::exp(row[k] - mx);
    const double log_z = std::log(z) + mx;
    loss += log_z - row[static_cast<std::size_t>(labels[b])];
    for (std::size_t k = 0; k < K; ++k) (*probs)[b * K + k] = std::exp(row[k] - log_z);
  }
  loss /= static_cast<double>(B);
  return make_op<T>(Tensor<T>({1}, {static_cast<T>(loss)}), {logits}, [probs, labels, B, K](Node<T>& node) {
    auto& dx = node.parents[0]->grad;
    const double g = node.grad[0] / static_cast<double>(B);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t k = 0; k < K; ++k) {
        const double onehot = static_cast<std::size_t>(labels[b]) == k ? 1.0 : 0.0;
        dx[b * K + k] += static_cast<T>(g * ((*probs)[b * K + k] - onehot));
      }
  });
}

#define EEGSCREEN_INSTANTIATE_OPS(T)                                                                     \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t, std::size_t);        \
  template Var<T> batch_norm2d(const Var<T>&, const Var<T>&, const Var<T>&, BatchNormStats<T>&, bool,   \
                               double, double);                                                          \
  template Var<T> relu(const Var<T>&);                                                                   \
  template Var<T> max_pool2d(const Var<T>&, std::size_t, std::size_t, std::size_t);                     \
  template Var<T> global_avg_pool(const Var<T>&);                                                        \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                                   \
  template Var<T> add(const Var<T>&, const Var<T>&);                                                     \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                                     \
  template Var<T> sum(const Var<T>&);                                                                    \
  template Var<T> weighted_sum(const Var<T>&, const Tensor<T>&);                                         \
  template Var<T> softmax(const Var<T>&);                                                                \
  template Var<T> cross_entropy(const Var<T>&, const std::vector<int>&);

EEGSCREEN_INSTANTIATE_OPS(float)
EEGSCREEN_INSTANTIATE_OPS(double)

#undef EEGSCREEN_INSTANTIATE_OPS

}  // namespace eegscreen::nn
