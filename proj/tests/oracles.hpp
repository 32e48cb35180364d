#pragma once

// Reference implementations used as test oracles. They are written
// independently of the library code and favour directness over speed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Least squares via the 2x2 normal equations on t = 0..n-1.
inline std::pair<double, double> normal_equations_fit(std::span<const double> y) {
  const auto n = static_cast<double>(y.size());
  long double st = 0, stt = 0, sy = 0, sty = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double t = static_cast<long double>(i);
    st += t;
    stt += t * t;
    sy += y[i];
    sty += t * y[i];
  }
  const long double det = n * stt - st * st;
  const long double m = (n * sty - st * sy) / det;
  const long double b = (stt * sy - st * sty) / det;
  return {static_cast<double>(m), static_cast<double>(b)};
}

// (x - mu)^T (S + lambda I)^{-1} (x - mu) via an LU solve per row.
inline std::vector<double> t2_by_solve(const std::vector<std::array<double, 6>>& rows, double lambda) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd X(n, 6);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < 6; ++j) X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  const Eigen::RowVectorXd mu = X.colwise().mean();
  const Eigen::MatrixXd C = X.rowwise() - mu;
  Eigen::MatrixXd S = (C.transpose() * C) / static_cast<double>(n - 1);
  S += lambda * Eigen::MatrixXd::Identity(6, 6);
  const auto lu = S.fullPivLu();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd d = C.row(i).transpose();
    const Eigen::VectorXd z = lu.solve(d);
    out.push_back(d.dot(z));
  }
  return out;
}

// Naive triple-loop "same" cross-correlation, T x C -> T x F.
inline std::vector<double> conv_same(const std::vector<double>& x, std::size_t T, std::size_t C,
                                     const std::vector<double>& w, const std::vector<double>& b, std::size_t F,
                                     std::size_t K) {
  std::vector<double> y(T * F);
  const long half = static_cast<long>(K / 2);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < F; ++f) {
      double acc = b[f];
      for (std::size_t k = 0; k < K; ++k) {
        const long src = static_cast<long>(t) + static_cast<long>(k) - half;
        if (src < 0 || src >= static_cast<long>(T)) continue;
        for (std::size_t c = 0; c < C; ++c) acc += w[(f * K + k) * C + c] * x[static_cast<std::size_t>(src) * C + c];
      }
      y[t * F + f] = acc;
    }
  return y;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// One LSTM step written scalar by scalar; gate rows (i, f, g, o).
inline void lstm_scalar_step(const std::vector<double>& x, std::vector<double>& h, std::vector<double>& c,
                             const std::vector<double>& W, const std::vector<double>& U, const std::vector<double>& b,
                             std::size_t C, std::size_t H) {
  std::vector<double> hn(H), cn(H);
  for (std::size_t j = 0; j < H; ++j) {
    double z[4];
    for (std::size_t g = 0; g < 4; ++g) {
      const std::size_t r = g * H + j;
      double a = b[r];
      for (std::size_t k = 0; k < C; ++k) a += W[r * C + k] * x[k];
      for (std::size_t k = 0; k < H; ++k) a += U[r * H + k] * h[k];
      z[g] = a;
    }
    const double ig = logistic(z[0]), fg = logistic(z[1]), gg = std::tanh(z[2]), og = logistic(z[3]);
    cn[j] = fg * c[j] + ig * gg;
    hn[j] = og * std::tanh(cn[j]);
  }
  h = hn;
  c = cn;
}

// Population mean/std and the independent least-squares slope.
inline std::array<double, 3> summary(std::span<const double> v) {
  long double s = 0;
  for (double x : v) s += x;
  const long double mean = s / v.size();
  long double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(ss / v.size())),
          normal_equations_fit(v).first};
}

// Percentile by linear interpolation between closest ranks.
inline double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double rank = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// label[p] = 1 iff any of windows p+D .. p+D+K-1 is labelled 1.
inline std::vector<int> any_of_next(const std::vector<int>& w, int D, int K) {
  std::vector<int> out;
  for (std::size_t p = 0; p + static_cast<std::size_t>(D + K) <= w.size(); ++p) {
    int any = 0;
    for (int k = 0; k < K; ++k) any |= w[p + static_cast<std::size_t>(D + k)];
    out.push_back(any);
  }
  return out;
}

}  // namespace oracle
