#include <algorithm>
#include <cmath>
#include <random>

#include "radarsr/errors.hpp"
#include "radarsr/score_model.hpp"

namespace radarsr {

void DenoiserArch::validate() const {
  if (widths.empty()) throw ValidationError("denoiser: need at least one level");
  if (std::any_of(widths.begin(), widths.end(), [](int w) { return w <= 0; })) {
    throw ValidationError("denoiser: channel widths must be positive");
  }
  if (time_dim <= 0 || time_dim % 2 != 0) throw ValidationError("denoiser: time_dim must be positive and even");
  const int unit = 1 << depth();
  if (height <= 0 || width <= 0 || height % unit != 0 || width % unit != 0) {
    throw ValidationError("denoiser: spatial size must be a positive multiple of 2^depth");
  }
}

namespace {

constexpr int kInputChannels = 2;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double silu(double z) { return z * sigmoid(z); }
double silu_grad(double z) {
  const double s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

// 3x3 convolution, zero padding, stride 1.
void conv3x3(const FeatureMap& in, const double* weight, const double* bias, FeatureMap& out) {
  const int H = in.height, W = in.width;
  for (int o = 0; o < out.channels; ++o) {
    double* dst = out.channel(o);
    std::fill(dst, dst + out.plane(), bias[o]);
    for (int i = 0; i < in.channels; ++i) {
      const double* src = in.channel(i);
      const double* k = weight + (static_cast<std::size_t>(o) * in.channels + i) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
          const double w = k[ky * 3 + kx];
          for (int y = y0; y < y1; ++y) {
            double* drow = dst + static_cast<std::size_t>(y) * W;
            const double* srow = src + static_cast<std::size_t>(y + dy) * W + dx;
            for (int x = x0; x < x1; ++x) drow[x] += w * srow[x];
          }
        }
      }
    }
  }
}

// Accumulates weight/bias gradients and, when `grad_in` is non-null, the
// input gradient.
void conv3x3_backward(const FeatureMap& in, const double* weight, const FeatureMap& grad_out, double* grad_weight,
                      double* grad_bias, FeatureMap* grad_in) {
  const int H = in.height, W = in.width;
  for (int o = 0; o < grad_out.channels; ++o) {
    const double* g = grad_out.channel(o);
    double bsum = 0.0;
    for (std::size_t p = 0; p < grad_out.plane(); ++p) bsum += g[p];
    grad_bias[o] += bsum;
    for (int i = 0; i < in.channels; ++i) {
      const double* src = in.channel(i);
      const std::size_t kofs = (static_cast<std::size_t>(o) * in.channels + i) * 9;
      double* gsrc = grad_in ? grad_in->channel(i) : nullptr;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
          const double w = weight[kofs + ky * 3 + kx];
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* grow = g + static_cast<std::size_t>(y) * W;
            const double* srow = src + static_cast<std::size_t>(y + dy) * W + dx;
            for (int x = x0; x < x1; ++x) acc += grow[x] * srow[x];
            if (gsrc) {
              double* girow = gsrc + static_cast<std::size_t>(y + dy) * W + dx;
              for (int x = x0; x < x1; ++x) girow[x] += w * grow[x];
            }
          }
          grad_weight[kofs + ky * 3 + kx] += acc;
        }
      }
    }
  }
}

FeatureMap avg_pool2(const FeatureMap& in) {
  FeatureMap out(in.channels, in.height / 2, in.width / 2);
  for (int c = 0; c < in.channels; ++c) {
    const double* s = in.channel(c);
    double* d = out.channel(c);
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const std::size_t a = static_cast<std::size_t>(2 * y) * in.width + 2 * x;
        d[static_cast<std::size_t>(y) * out.width + x] = 0.25 * (s[a] + s[a + 1] + s[a + in.width] + s[a + in.width + 1]);
      }
    }
  }
  return out;
}

FeatureMap avg_pool2_backward(const FeatureMap& grad_out) {
  FeatureMap g(grad_out.channels, grad_out.height * 2, grad_out.width * 2);
  for (int c = 0; c < g.channels; ++c) {
    const double* s = grad_out.channel(c);
    double* d = g.channel(c);
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        d[static_cast<std::size_t>(y) * g.width + x] = 0.25 * s[static_cast<std::size_t>(y / 2) * grad_out.width + x / 2];
      }
    }
  }
  return g;
}

FeatureMap upsample2(const FeatureMap& in) {
  FeatureMap out(in.channels, in.height * 2, in.width * 2);
  for (int c = 0; c < in.channels; ++c) {
    const double* s = in.channel(c);
    double* d = out.channel(c);
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        d[static_cast<std::size_t>(y) * out.width + x] = s[static_cast<std::size_t>(y / 2) * in.width + x / 2];
      }
    }
  }
  return out;
}

// Backward of nearest upsampling restricted to the first `channels` channels
// of `grad`.
FeatureMap upsample2_backward(const FeatureMap& grad, int channels) {
  FeatureMap out(channels, grad.height / 2, grad.width / 2);
  for (int c = 0; c < channels; ++c) {
    const double* s = grad.channel(c);
    double* d = out.channel(c);
    for (int y = 0; y < grad.height; ++y) {
      for (int x = 0; x < grad.width; ++x) {
        d[static_cast<std::size_t>(y / 2) * out.width + x / 2] += s[static_cast<std::size_t>(y) * grad.width + x];
      }
    }
  }
  return out;
}

FeatureMap concat(const FeatureMap& a, const FeatureMap& b) {
  FeatureMap out(a.channels + b.channels, a.height, a.width);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

FeatureMap apply_silu(const FeatureMap& pre) {
  FeatureMap out = pre;
  for (double& v : out.data) v = silu(v);
  return out;
}

// grad_pre = grad_post .* silu'(pre), in place on grad.
void silu_backward(const FeatureMap& pre, FeatureMap& grad) {
  for (std::size_t i = 0; i < grad.data.size(); ++i) grad.data[i] *= silu_grad(pre.data[i]);
}

void add_channel_bias(FeatureMap& map, const Eigen::VectorXd& per_channel) {
  for (int c = 0; c < map.channels; ++c) {
    double* d = map.channel(c);
    const double b = per_channel[c];
    for (std::size_t p = 0; p < map.plane(); ++p) d[p] += b;
  }
}

Eigen::VectorXd channel_sums(const FeatureMap& map) {
  Eigen::VectorXd s(map.channels);
  for (int c = 0; c < map.channels; ++c) {
    const double* d = map.channel(c);
    double acc = 0.0;
    for (std::size_t p = 0; p < map.plane(); ++p) acc += d[p];
    s[c] = acc;
  }
  return s;
}

}  // namespace

DenoiserModel::DenoiserModel(DenoiserArch arch, std::uint64_t seed) : arch_(std::move(arch)) {
  arch_.validate();
  layout();
  std::mt19937_64 rng(seed);
  auto fill = [&](Eigen::Index offset, Eigen::Index count, double fan_in) {
    const double bound = std::sqrt(1.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < count; ++i) params_[offset + i] = dist(rng);
  };
  auto init_conv = [&](const Conv& c) {
    fill(c.weight, static_cast<Eigen::Index>(c.out) * c.in * 9, c.in * 9.0);
    fill(c.bias, c.out, c.in * 9.0);
  };
  for (const auto& c : enc_) init_conv(c);
  init_conv(mid_);
  for (const auto& c : dec_) init_conv(c);
  for (const auto& l : time_proj_) {
    fill(l.weight, static_cast<Eigen::Index>(l.out) * l.in, l.in);
    fill(l.bias, l.out, l.in);
  }
  // head_ stays zero.
}

DenoiserModel::DenoiserModel(DenoiserArch arch, Eigen::VectorXd params) : arch_(std::move(arch)) {
  arch_.validate();
  layout();
  if (params.size() != params_.size()) {
    throw ShapeMismatch("denoiser: expected " + std::to_string(params_.size()) + " parameters, got " +
                        std::to_string(params.size()));
  }
  params_ = std::move(params);
}

void DenoiserModel::layout() {
  Eigen::Index offset = 0;
  auto conv = [&](int in, int out) {
    Conv c{in, out, offset, 0};
    offset += static_cast<Eigen::Index>(in) * out * 9;
    c.bias = offset;
    offset += out;
    return c;
  };
  auto linear = [&](int in, int out) {
    Linear l{in, out, offset, 0};
    offset += static_cast<Eigen::Index>(in) * out;
    l.bias = offset;
    offset += out;
    return l;
  };
  const auto& w = arch_.widths;
  const int L = arch_.depth();
  enc_.clear();
  dec_.clear();
  time_proj_.clear();
  for (int k = 0; k < L; ++k) enc_.push_back(conv(k == 0 ? kInputChannels : w[k - 1], w[k]));
  mid_ = conv(w[L - 1], w[L - 1]);
  for (int k = 0; k < L; ++k) {
    const int up_channels = (k == L - 1) ? w[L - 1] : w[k + 1];
    dec_.push_back(conv(up_channels + w[k], w[k]));
  }
  head_ = conv(w[0], 1);
  for (int k = 0; k < L; ++k) time_proj_.push_back(linear(arch_.time_dim, w[k]));
  time_proj_.push_back(linear(arch_.time_dim, w[L - 1]));
  params_ = Eigen::VectorXd::Zero(offset);
}

Image DenoiserModel::predict(const Image& x_t, const Image& mu, int t) const { return forward(x_t, mu, t, nullptr); }

Image DenoiserModel::forward(const Image& x_t, const Image& mu, int t, ForwardContext* ctx) const {
  if (x_t.rows() != arch_.height || x_t.cols() != arch_.width || mu.rows() != arch_.height ||
      mu.cols() != arch_.width) {
    throw ShapeMismatch("denoiser: input must be " + std::to_string(arch_.height) + "x" + std::to_string(arch_.width));
  }
  const int L = arch_.depth();
  const double* p = params_.data();

  const Eigen::VectorXd emb = time_embedding(t, arch_.time_dim);
  auto project = [&](const Linear& l) {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(p + l.weight,
                                                                                                      l.out, l.in);
    const Eigen::Map<const Eigen::VectorXd> b(p + l.bias, l.out);
    return Eigen::VectorXd(W * emb + b);
  };

  FeatureMap input(kInputChannels, arch_.height, arch_.width);
  std::copy(x_t.data(), x_t.data() + x_t.size(), input.channel(0));
  std::copy(mu.data(), mu.data() + mu.size(), input.channel(1));

  std::vector<FeatureMap> enc_in(L), enc_pre(L), enc_out(L), dec_in(L), dec_pre(L);
  FeatureMap h = std::move(input);
  for (int k = 0; k < L; ++k) {
    enc_in[k] = (k == 0) ? h : avg_pool2(h);
    FeatureMap pre(enc_[k].out, enc_in[k].height, enc_in[k].width);
    conv3x3(enc_in[k], p + enc_[k].weight, p + enc_[k].bias, pre);
    add_channel_bias(pre, project(time_proj_[k]));
    enc_out[k] = apply_silu(pre);
    enc_pre[k] = std::move(pre);
    h = enc_out[k];
  }
  FeatureMap mid_in = avg_pool2(h);
  FeatureMap mid_pre(mid_.out, mid_in.height, mid_in.width);
  conv3x3(mid_in, p + mid_.weight, p + mid_.bias, mid_pre);
  add_channel_bias(mid_pre, project(time_proj_[L]));
  h = apply_silu(mid_pre);
  for (int k = L - 1; k >= 0; --k) {
    dec_in[k] = concat(upsample2(h), enc_out[k]);
    FeatureMap pre(dec_[k].out, dec_in[k].height, dec_in[k].width);
    conv3x3(dec_in[k], p + dec_[k].weight, p + dec_[k].bias, pre);
    h = apply_silu(pre);
    dec_pre[k] = std::move(pre);
  }
  FeatureMap out(1, arch_.height, arch_.width);
  conv3x3(h, p + head_.weight, p + head_.bias, out);

  if (ctx) {
    ctx->recorded = true;
    ctx->embedding = emb;
    ctx->enc_in = std::move(enc_in);
    ctx->enc_pre = std::move(enc_pre);
    ctx->enc_out = std::move(enc_out);
    ctx->mid_in = std::move(mid_in);
    ctx->mid_pre = std::move(mid_pre);
    ctx->dec_in = std::move(dec_in);
    ctx->dec_pre = std::move(dec_pre);
    ctx->head_in = std::move(h);
  }
  Image result(arch_.height, arch_.width);
  std::copy(out.data.begin(), out.data.end(), result.data());
  return result;
}

Eigen::VectorXd DenoiserModel::backward(const ForwardContext& ctx, const Image& upstream) const {
  if (!ctx.recorded) throw MissingForwardContext("denoiser: backward called without a recorded forward pass");
  if (upstream.rows() != arch_.height || upstream.cols() != arch_.width) {
    throw ShapeMismatch("denoiser: upstream gradient shape mismatch");
  }
  const int L = arch_.depth();
  const double* p = params_.data();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  double* g = grad.data();

  auto accumulate_projection = [&](const Linear& l, const Eigen::VectorXd& channel_grad) {
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dW(g + l.weight, l.out, l.in);
    Eigen::Map<Eigen::VectorXd> db(g + l.bias, l.out);
    dW += channel_grad * ctx.embedding.transpose();
    db += channel_grad;
  };

  FeatureMap g_out(1, arch_.height, arch_.width);
  std::copy(upstream.data(), upstream.data() + upstream.size(), g_out.data.begin());

  FeatureMap g_h(ctx.head_in.channels, ctx.head_in.height, ctx.head_in.width);
  conv3x3_backward(ctx.head_in, p + head_.weight, g_out, g + head_.weight, g + head_.bias, &g_h);

  std::vector<FeatureMap> g_skip(L);
  for (int k = 0; k < L; ++k) {
    silu_backward(ctx.dec_pre[k], g_h);
    FeatureMap g_in(ctx.dec_in[k].channels, ctx.dec_in[k].height, ctx.dec_in[k].width);
    conv3x3_backward(ctx.dec_in[k], p + dec_[k].weight, g_h, g + dec_[k].weight, g + dec_[k].bias, &g_in);
    const int up_channels = dec_[k].in - arch_.widths[k];
    g_skip[k] = FeatureMap(arch_.widths[k], g_in.height, g_in.width);
    std::copy(g_in.channel(up_channels), g_in.channel(up_channels) + g_skip[k].data.size(), g_skip[k].data.begin());
    g_h = upsample2_backward(g_in, up_channels);
  }

  silu_backward(ctx.mid_pre, g_h);
  accumulate_projection(time_proj_[L], channel_sums(g_h));
  FeatureMap g_mid_in(ctx.mid_in.channels, ctx.mid_in.height, ctx.mid_in.width);
  conv3x3_backward(ctx.mid_in, p + mid_.weight, g_h, g + mid_.weight, g + mid_.bias, &g_mid_in);
  g_h = avg_pool2_backward(g_mid_in);

  for (int k = L - 1; k >= 0; --k) {
    for (std::size_t i = 0; i < g_h.data.size(); ++i) g_h.data[i] += g_skip[k].data[i];
    silu_backward(ctx.enc_pre[k], g_h);
    accumulate_projection(time_proj_[k], channel_sums(g_h));
    if (k == 0) {
      conv3x3_backward(ctx.enc_in[k], p + enc_[k].weight, g_h, g + enc_[k].weight, g + enc_[k].bias, nullptr);
    } else {
      FeatureMap g_in(ctx.enc_in[k].channels, ctx.enc_in[k].height, ctx.enc_in[k].width);
      conv3x3_backward(ctx.enc_in[k], p + enc_[k].weight, g_h, g + enc_[k].weight, g + enc_[k].bias, &g_in);
      g_h = avg_pool2_backward(g_in);
    }
  }
  return grad;
}

}  // namespace radarsr
