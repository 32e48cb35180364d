#include "stiction/nn/layers.hpp"

#include <cmath>

#include "stiction/error.hpp"
#include "stiction/rng.hpp"

namespace stiction::nn {
namespace {

void check(bool ok, const char* what) {
  if (!ok) fail(ErrorKind::ShapeMismatch, what);
}

double activate(double z, Activation act) {
  switch (act) {
    case Activation::relu: return relu(z);
    case Activation::sigmoid: return sigmoid(z);
    case Activation::none: break;
  }
  return z;
}

// Derivative expressed through the activation output y.
double activation_grad(double y, Activation act) {
  switch (act) {
    case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::none: break;
  }
  return 1.0;
}

const char* activation_name(Activation act) {
  switch (act) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::none: break;
  }
  return "linear";
}

void glorot(Rng& rng, std::span<double> w, std::size_t fan_in, std::size_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& x : w) x = rng.uniform(-limit, limit);
}

// One LSTM step. `gates` receives i, f, g, o (4H) when non-null.
void lstm_step_into(const double* x, const double* h_prev, const double* c_prev, const LstmWeights& p, double* h,
                    double* c, double* tanh_c, double* gates) {
  const std::size_t H = p.hidden;
  const std::size_t C = p.input;
  std::vector<double> local;
  if (gates == nullptr) {
    local.resize(4 * H);
    gates = local.data();
  }
  for (std::size_t g = 0; g < 4 * H; ++g) {
    double z = p.b[g];
    const double* wr = p.w.data() + g * C;
    for (std::size_t k = 0; k < C; ++k) z += wr[k] * x[k];
    const double* ur = p.u.data() + g * H;
    for (std::size_t k = 0; k < H; ++k) z += ur[k] * h_prev[k];
    gates[g] = (g >= 2 * H && g < 3 * H) ? std::tanh(z) : sigmoid(z);
  }
  for (std::size_t k = 0; k < H; ++k) {
    const double ig = gates[k], fg = gates[H + k], cg = gates[2 * H + k], og = gates[3 * H + k];
    c[k] = fg * c_prev[k] + ig * cg;
    tanh_c[k] = std::tanh(c[k]);
    h[k] = og * tanh_c[k];
  }
}

}  // namespace

Tensor2 conv1d_apply(const Tensor2& input, std::span<const double> kernels, std::span<const double> bias,
                     std::size_t filters, std::size_t width, Activation act) {
  const std::size_t T = input.rows, C = input.cols;
  check(T >= 1, "conv1d: empty input");
  check(width % 2 == 1, "conv1d: kernel width must be odd");
  check(kernels.size() == filters * width * C, "conv1d: kernel shape");
  check(bias.size() == filters, "conv1d: bias shape");
  const auto pad = static_cast<std::ptrdiff_t>(width / 2);
  Tensor2 out(T, filters);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < filters; ++f) {
      double z = bias[f];
      for (std::size_t k = 0; k < width; ++k) {
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - pad;
        if (s < 0 || s >= static_cast<std::ptrdiff_t>(T)) continue;
        const double* w = kernels.data() + (f * width + k) * C;
        const double* x = input.data.data() + static_cast<std::size_t>(s) * C;
        for (std::size_t c = 0; c < C; ++c) z += w[c] * x[c];
      }
      out(t, f) = activate(z, act);
    }
  }
  return out;
}

std::vector<double> dense_apply(std::span<const double> x, std::span<const double> weights,
                                std::span<const double> bias, Activation act) {
  const std::size_t n = x.size(), m = bias.size();
  check(weights.size() == m * n, "dense: weight shape");
  std::vector<double> y(m);
  for (std::size_t j = 0; j < m; ++j) {
    double z = bias[j];
    const double* w = weights.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) z += w[i] * x[i];
    y[j] = activate(z, act);
  }
  return y;
}

LstmStep lstm_step(std::span<const double> x, std::span<const double> h_prev, std::span<const double> c_prev,
                   const LstmWeights& p) {
  check(x.size() == p.input, "lstm: input width");
  check(h_prev.size() == p.hidden && c_prev.size() == p.hidden, "lstm: state width");
  check(p.w.size() == 4 * p.hidden * p.input && p.u.size() == 4 * p.hidden * p.hidden && p.b.size() == 4 * p.hidden,
        "lstm: parameter shape");
  LstmStep r{std::vector<double>(p.hidden), std::vector<double>(p.hidden)};
  std::vector<double> tc(p.hidden);
  lstm_step_into(x.data(), h_prev.data(), c_prev.data(), p, r.h.data(), r.c.data(), tc.data(), nullptr);
  return r;
}

Tensor2 lstm_sequence(const Tensor2& inputs, const LstmWeights& p, bool return_sequence) {
  check(inputs.rows >= 1, "lstm: empty sequence");
  check(inputs.cols == p.input, "lstm: input width");
  const std::size_t H = p.hidden;
  std::vector<double> h(H, 0.0), c(H, 0.0), h_next(H), c_next(H), tc(H);
  Tensor2 out(return_sequence ? inputs.rows : 1, H);
  for (std::size_t t = 0; t < inputs.rows; ++t) {
    lstm_step_into(inputs.row(t).data(), h.data(), c.data(), p, h_next.data(), c_next.data(), tc.data(), nullptr);
    h.swap(h_next);
    c.swap(c_next);
    if (return_sequence) std::copy(h.begin(), h.end(), out.row(t).begin());
  }
  if (!return_sequence) std::copy(h.begin(), h.end(), out.row(0).begin());
  return out;
}

// Conv1D -----------------------------------------------------------------

Conv1D::Conv1D(Shape in, std::size_t filters, std::size_t width, Activation act)
    : Layer(in, filters * width * in.cols + filters), filters_(filters), width_(width), act_(act) {
  check(filters > 0 && width % 2 == 1 && in.rows >= 1 && in.cols >= 1, "conv1d: invalid configuration");
}

std::string Conv1D::describe() const {
  return "conv1d filters=" + std::to_string(filters_) + " width=" + std::to_string(width_) +
         " activation=" + activation_name(act_);
}

void Conv1D::initialize(Rng& rng) {
  const std::size_t nw = filters_ * width_ * in_.cols;
  glorot(rng, std::span(params_).first(nw), width_ * in_.cols, width_ * filters_);
  std::fill(params_.begin() + static_cast<std::ptrdiff_t>(nw), params_.end(), 0.0);
}

void Conv1D::forward(const Tensor2& in, Tensor2& out, std::vector<double>&) const {
  check(in.rows == in_.rows && in.cols == in_.cols, "conv1d: input shape");
  const std::size_t nw = filters_ * width_ * in_.cols;
  out = conv1d_apply(in, std::span(params_).first(nw), std::span(params_).subspan(nw), filters_, width_, act_);
}

void Conv1D::backward(const Tensor2& in, const Tensor2& out, const std::vector<double>&, const Tensor2& dout,
                      Tensor2& din, std::span<double> dparams) const {
  const std::size_t T = in_.rows, C = in_.cols, F = filters_, K = width_;
  const auto pad = static_cast<std::ptrdiff_t>(K / 2);
  const double* W = params_.data();
  double* dW = dparams.data();
  double* db = dparams.data() + F * K * C;
  din.reset(T, C);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      const double g = dout(t, f) * activation_grad(out(t, f), act_);
      if (g == 0.0) continue;
      db[f] += g;
      for (std::size_t k = 0; k < K; ++k) {
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - pad;
        if (s < 0 || s >= static_cast<std::ptrdiff_t>(T)) continue;
        const double* x = in.data.data() + static_cast<std::size_t>(s) * C;
        double* dx = din.data.data() + static_cast<std::size_t>(s) * C;
        const double* w = W + (f * K + k) * C;
        double* dw = dW + (f * K + k) * C;
        for (std::size_t c = 0; c < C; ++c) {
          dw[c] += g * x[c];
          dx[c] += g * w[c];
        }
      }
    }
  }
}

// Dense ------------------------------------------------------------------

Dense::Dense(Shape in, std::size_t units, Activation act)
    : Layer(in, units * in.size() + units), units_(units), act_(act) {
  check(units > 0 && in.size() > 0, "dense: invalid configuration");
}

std::string Dense::describe() const {
  return "dense " + std::to_string(in_.size()) + "->" + std::to_string(units_) + " activation=" +
         activation_name(act_);
}

void Dense::initialize(Rng& rng) {
  const std::size_t nw = units_ * in_.size();
  glorot(rng, std::span(params_).first(nw), in_.size(), units_);
  std::fill(params_.begin() + static_cast<std::ptrdiff_t>(nw), params_.end(), 0.0);
}

void Dense::forward(const Tensor2& in, Tensor2& out, std::vector<double>&) const {
  check(in.size() == in_.size(), "dense: input size");
  const std::size_t nw = units_ * in_.size();
  const auto y = dense_apply(in.data, std::span(params_).first(nw), std::span(params_).subspan(nw), act_);
  out.rows = 1;
  out.cols = units_;
  out.data = y;
}

void Dense::backward(const Tensor2& in, const Tensor2& out, const std::vector<double>&, const Tensor2& dout,
                     Tensor2& din, std::span<double> dparams) const {
  const std::size_t n = in_.size(), m = units_;
  const double* W = params_.data();
  double* dW = dparams.data();
  double* db = dparams.data() + m * n;
  din.reset(in_.rows, in_.cols);
  const double* x = in.data.data();
  double* dx = din.data.data();
  for (std::size_t j = 0; j < m; ++j) {
    const double g = dout.data[j] * activation_grad(out.data[j], act_);
    if (g == 0.0) continue;
    db[j] += g;
    const double* w = W + j * n;
    double* dw = dW + j * n;
    for (std::size_t i = 0; i < n; ++i) {
      dw[i] += g * x[i];
      dx[i] += g * w[i];
    }
  }
}

// LSTM -------------------------------------------------------------------

Lstm::Lstm(Shape in, std::size_t hidden, bool return_sequence)
    : Layer(in, 4 * hidden * in.cols + 4 * hidden * hidden + 4 * hidden),
      hidden_(hidden),
      return_sequence_(return_sequence) {
  check(hidden > 0 && in.rows >= 1 && in.cols >= 1, "lstm: invalid configuration");
}

std::string Lstm::describe() const {
  return "lstm units=" + std::to_string(hidden_) + (return_sequence_ ? " return_sequence" : "");
}

LstmWeights Lstm::weights() const {
  const std::size_t H = hidden_, C = in_.cols;
  const std::span<const double> p(params_);
  return {C, H, p.first(4 * H * C), p.subspan(4 * H * C, 4 * H * H), p.subspan(4 * H * C + 4 * H * H, 4 * H)};
}

void Lstm::initialize(Rng& rng) {
  const std::size_t H = hidden_, C = in_.cols;
  const double limit = std::sqrt(1.0 / static_cast<double>(H));
  const std::size_t nw = 4 * H * C + 4 * H * H;
  for (std::size_t i = 0; i < nw; ++i) params_[i] = rng.uniform(-limit, limit);
  for (std::size_t g = 0; g < 4 * H; ++g) params_[nw + g] = (g >= H && g < 2 * H) ? 1.0 : 0.0;
}

// Cache per step: i f g o (4H), c (H), tanh(c) (H), h (H).
void Lstm::forward(const Tensor2& in, Tensor2& out, std::vector<double>& cache) const {
  check(in.rows == in_.rows && in.cols == in_.cols, "lstm: input shape");
  const std::size_t T = in_.rows, H = hidden_;
  const std::size_t stride = 7 * H;
  cache.assign(T * stride, 0.0);
  const auto p = weights();
  const std::vector<double> zeros(H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double* cur = cache.data() + t * stride;
    const double* h_prev = t == 0 ? zeros.data() : cache.data() + (t - 1) * stride + 6 * H;
    const double* c_prev = t == 0 ? zeros.data() : cache.data() + (t - 1) * stride + 4 * H;
    lstm_step_into(in.row(t).data(), h_prev, c_prev, p, cur + 6 * H, cur + 4 * H, cur + 5 * H, cur);
  }
  out.reset(return_sequence_ ? T : 1, H);
  for (std::size_t t = return_sequence_ ? 0 : T - 1, r = 0; t < T; ++t, ++r)
    std::copy_n(cache.data() + t * stride + 6 * H, H, out.row(r).begin());
}

void Lstm::backward(const Tensor2& in, const Tensor2&, const std::vector<double>& cache, const Tensor2& dout,
                    Tensor2& din, std::span<double> dparams) const {
  const std::size_t T = in_.rows, H = hidden_, C = in_.cols;
  const std::size_t stride = 7 * H;
  const auto p = weights();
  double* dW = dparams.data();
  double* dU = dW + 4 * H * C;
  double* db = dU + 4 * H * H;
  din.reset(T, C);
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(4 * H), dh(H);
  const std::vector<double> zeros(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    const double* cur = cache.data() + t * stride;
    const double* gi = cur;
    const double* gf = cur + H;
    const double* gg = cur + 2 * H;
    const double* go = cur + 3 * H;
    const double* tc = cur + 5 * H;
    const double* c_prev = t == 0 ? zeros.data() : cache.data() + (t - 1) * stride + 4 * H;
    const double* h_prev = t == 0 ? zeros.data() : cache.data() + (t - 1) * stride + 6 * H;
    for (std::size_t k = 0; k < H; ++k) {
      double g = dh_next[k];
      if (return_sequence_) g += dout(t, k);
      else if (t == T - 1) g += dout(0, k);
      dh[k] = g;
    }
    for (std::size_t k = 0; k < H; ++k) {
      const double dc = dh[k] * go[k] * (1.0 - tc[k] * tc[k]) + dc_next[k];
      dz[k] = dc * gg[k] * gi[k] * (1.0 - gi[k]);
      dz[H + k] = dc * c_prev[k] * gf[k] * (1.0 - gf[k]);
      dz[2 * H + k] = dc * gi[k] * (1.0 - gg[k] * gg[k]);
      dz[3 * H + k] = dh[k] * tc[k] * go[k] * (1.0 - go[k]);
      dc_next[k] = dc * gf[k];
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    const double* x = in.row(t).data();
    double* dx = din.row(t).data();
    for (std::size_t g = 0; g < 4 * H; ++g) {
      const double d = dz[g];
      if (d == 0.0) continue;
      db[g] += d;
      const double* wr = p.w.data() + g * C;
      double* dwr = dW + g * C;
      for (std::size_t k = 0; k < C; ++k) {
        dwr[k] += d * x[k];
        dx[k] += d * wr[k];
      }
      const double* ur = p.u.data() + g * H;
      double* dur = dU + g * H;
      for (std::size_t k = 0; k < H; ++k) {
        dur[k] += d * h_prev[k];
        dh_next[k] += d * ur[k];
      }
    }
  }
}

// MaxPool1D / Flatten ------------------------------------------------------

MaxPool1D::MaxPool1D(Shape in) : Layer(in) { check(in.rows >= 2, "maxpool: need at least 2 rows"); }

std::string MaxPool1D::describe() const { return "maxpool1d size=2"; }

void MaxPool1D::forward(const Tensor2& in, Tensor2& out, std::vector<double>& cache) const {
  check(in.rows == in_.rows && in.cols == in_.cols, "maxpool: input shape");
  const std::size_t R = in_.rows / 2, C = in_.cols;
  out.reset(R, C);
  cache.assign(R * C, 0.0);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) {
      const double a = in(2 * r, c), b = in(2 * r + 1, c);
      const bool second = b > a;
      out(r, c) = second ? b : a;
      cache[r * C + c] = second ? 1.0 : 0.0;
    }
}

void MaxPool1D::backward(const Tensor2&, const Tensor2&, const std::vector<double>& cache, const Tensor2& dout,
                         Tensor2& din, std::span<double>) const {
  const std::size_t R = in_.rows / 2, C = in_.cols;
  din.reset(in_.rows, C);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) din(2 * r + (cache[r * C + c] != 0.0 ? 1 : 0), c) = dout(r, c);
}

std::string Flatten::describe() const { return "flatten " + std::to_string(in_.size()); }

void Flatten::forward(const Tensor2& in, Tensor2& out, std::vector<double>&) const {
  check(in.size() == in_.size(), "flatten: input size");
  out.rows = 1;
  out.cols = in.size();
  out.data = in.data;
}

void Flatten::backward(const Tensor2&, const Tensor2&, const std::vector<double>&, const Tensor2& dout,
                       Tensor2& din, std::span<double>) const {
  din.rows = in_.rows;
  din.cols = in_.cols;
  din.data = dout.data;
}

}  // namespace stiction::nn
