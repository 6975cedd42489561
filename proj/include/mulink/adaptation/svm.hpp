// SPDX-License-Identifier: Apache-2.0
//
// Soft-margin kernel SVM with the RBF kernel exp(-|x1 - x2|^2 / rho^2).
// The dual is solved by SMO with second-order working-set selection.
#pragma once

#include "mulink/rng.hpp"
#include "mulink/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

using Feature = std::vector<double>;

// Per-dimension zero mean / unit variance (population statistics).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(std::span<const Feature> x) {
    if (x.empty()) throw std::invalid_argument("cannot standardize an empty set");
    const std::size_t d = x.front().size();
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (const Feature& f : x) {
      if (f.size() != d) throw std::invalid_argument("feature dimension mismatch");
      for (std::size_t k = 0; k < d; ++k) s.mean[k] += f[k];
    }
    for (double& m : s.mean) m /= static_cast<double>(x.size());
    for (const Feature& f : x)
      for (std::size_t k = 0; k < d; ++k) s.scale[k] += (f[k] - s.mean[k]) * (f[k] - s.mean[k]);
    for (double& v : s.scale) {
      v = std::sqrt(v / static_cast<double>(x.size()));
      if (!(v > 1e-12)) v = 1.0;
    }
    return s;
  }

  Feature apply(std::span<const double> f) const {
    if (f.size() != mean.size()) throw std::invalid_argument("feature dimension mismatch");
    Feature out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = (f[k] - mean[k]) / scale[k];
    return out;
  }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("feature dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double rho) {
  return std::exp(-squared_distance(a, b) / (rho * rho));
}

struct SvmModel {
  std::vector<Feature> support;
  std::vector<double> coef;  // alpha_i * nu_i
  double bias = 0.0;
  double rho = 1.0;
  double c = 1.0;
  bool constant = false;  // degenerate single-class model
  int constant_label = 1;

  double decision(std::span<const double> x) const {
    if (constant) return constant_label;
    double s = bias;
    for (std::size_t i = 0; i < support.size(); ++i) s += coef[i] * rbf_kernel(support[i], x, rho);
    return s;
  }

  int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

struct SvmSolution {
  SvmModel model;
  std::vector<double> alpha;  // all training points, zeros included
  double kkt_gap = 0.0;       // max violating-pair gap at exit
  double objective = 0.0;     // dual objective sum(alpha) - 1/2 alpha^T Q alpha
  long iterations = 0;
  bool converged = false;
};

struct SmoOptions {
  double tolerance = 1e-6;
  long max_iterations = 10'000'000;
};

inline SvmModel constant_model(int label, double c, double rho) {
  SvmModel m;
  m.constant = true;
  m.constant_label = label >= 0 ? 1 : -1;
  m.c = c;
  m.rho = rho;
  return m;
}

// kernel: n x n Gram matrix of the training points (row-major, n*n entries).
inline SvmSolution smo_solve(std::span<const double> kernel, std::span<const int> y, double c,
                             const SmoOptions& opt = {}) {
  const std::size_t n = y.size();
  if (kernel.size() != n * n) throw std::invalid_argument("kernel size mismatch");
  if (!(c > 0.0)) throw std::invalid_argument("C must be positive");
  constexpr double kTau = 1e-12;
  auto k = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };

  SvmSolution sol;
  std::vector<double>& alpha = sol.alpha;
  alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  auto up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
  auto low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

  for (;;) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!up(t)) continue;
      const double v = -y[t] * grad[t];
      if (v >= gmax) {
        gmax = v;
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!low(t)) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i == n) continue;
      const double b = gmax - v;
      if (b > 0.0) {
        double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    sol.kkt_gap = (i == n || gmin == std::numeric_limits<double>::infinity()) ? 0.0 : gmax - gmin;
    if (i == n || j == n || sol.kkt_gap < opt.tolerance) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= opt.max_iterations) break;
    ++sol.iterations;

    const double qij = y[i] * y[j] * k(i, j);
    const double ai = alpha[i];
    const double aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - ai;
    const double daj = alpha[j] - aj;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * k(i, t) * dai + y[j] * k(j, t) * daj);
  }

  // Bias: average over free vectors, else midpoint of the feasible interval.
  double sum_free = 0.0;
  int free_count = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] > 0.0 && alpha[t] < c) {
      sum_free += yg;
      ++free_count;
    } else if ((alpha[t] >= c && y[t] < 0) || (alpha[t] <= 0.0 && y[t] > 0)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  double r;
  if (free_count > 0) {
    r = sum_free / free_count;
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    r = 0.5 * (ub + lb);
  } else {
    r = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  sol.model.bias = -r;
  sol.model.c = c;

  double lin = 0.0;
  double quad = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    lin += alpha[t];
    quad += alpha[t] * (grad[t] + 1.0);
  }
  sol.objective = lin - 0.5 * quad;
  return sol;
}

inline std::vector<double> rbf_gram(std::span<const Feature> x, double rho) {
  const std::size_t n = x.size();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) g[i * n + j] = g[j * n + i] = rbf_kernel(x[i], x[j], rho);
  }
  return g;
}

inline void validate_labels(std::span<const Feature> x, std::span<const int> y) {
  if (x.size() != y.size()) throw std::invalid_argument("one label per sample required");
  if (x.empty()) throw std::invalid_argument("no training samples");
  for (int v : y)
    if (v != 1 && v != -1) throw std::invalid_argument("labels must be +1 or -1");
}

// x must already be standardized. Single-class input yields a constant model.
inline SvmSolution svm_train(std::span<const Feature> x, std::span<const int> y, double c, double rho,
                             const SmoOptions& opt = {}) {
  validate_labels(x, y);
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) {
    SvmSolution s;
    s.model = constant_model(has_pos ? 1 : -1, c, rho);
    s.alpha.assign(x.size(), 0.0);
    s.converged = true;
    return s;
  }
  const std::vector<double> gram = rbf_gram(x, rho);
  SvmSolution s = smo_solve(gram, y, c, opt);
  s.model.rho = rho;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (s.alpha[t] <= 0.0) continue;
    s.model.support.push_back(x[t]);
    s.model.coef.push_back(s.alpha[t] * y[t]);
  }
  return s;
}

// Largest violation of box, equality and complementary-slackness conditions
// for a dual solution.
inline double kkt_residual(std::span<const double> kernel, std::span<const int> y, std::span<const double> alpha,
                           double c, double bias) {
  const std::size_t n = y.size();
  double res = 0.0;
  double eq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res = std::max(res, std::max(-alpha[i], alpha[i] - c));
    eq += alpha[i] * y[i];
    double f = bias;
    for (std::size_t j = 0; j < n; ++j) f += alpha[j] * y[j] * kernel[i * n + j];
    const double m = y[i] * f;
    if (alpha[i] <= 0.0) {
      res = std::max(res, 1.0 - m);
    } else if (alpha[i] >= c) {
      res = std::max(res, m - 1.0);
    } else {
      res = std::max(res, std::abs(m - 1.0));
    }
  }
  return std::max(res, std::abs(eq));
}

struct CvResult {
  double c = 1.0;
  double rho = 1.0;
  double error = 0.0;  // mean validation misclassification
  bool degenerate = false;
};

inline std::vector<double> default_c_grid() {
  std::vector<double> g;
  for (int e = -3; e <= 10; e += 2) g.push_back(std::ldexp(1.0, e));
  return g;
}

inline std::vector<double> default_rho_grid() {
  std::vector<double> g;
  for (int e = -4; e <= 6; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

// Stratified assignment: each class is shuffled and dealt round-robin.
inline std::vector<int> stratified_folds(std::span<const int> y, int k, Rng& rng) {
  std::vector<int> fold(y.size(), 0);
  for (int label : {-1, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == label) idx.push_back(i);
    for (std::size_t i = idx.size(); i > 1; --i) {
      const auto r = static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng));
      std::swap(idx[i - 1], idx[r]);
    }
    for (std::size_t p = 0; p < idx.size(); ++p) fold[idx[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
  }
  return fold;
}

// Grid search by K-fold cross validation on standardized features. Ties go to
// the smallest C, then the largest rho.
inline CvResult cross_validate(std::span<const Feature> x, std::span<const int> y, std::span<const double> c_grid,
                               std::span<const double> rho_grid, int k, std::uint64_t seed) {
  validate_labels(x, y);
  if (c_grid.empty() || rho_grid.empty()) throw std::invalid_argument("empty parameter grid");
  if (k < 2) throw std::invalid_argument("K must be at least 2");
  const auto pos = std::count(y.begin(), y.end(), 1);
  const auto neg = static_cast<long>(y.size()) - pos;
  if (pos < k || neg < k) throw std::invalid_argument("fewer than K samples in a class");

  Rng rng(seed);
  const std::vector<int> fold = stratified_folds(y, k, rng);

  std::vector<double> cs(c_grid.begin(), c_grid.end());
  std::vector<double> rhos(rho_grid.begin(), rho_grid.end());
  std::sort(cs.begin(), cs.end());
  std::sort(rhos.begin(), rhos.end(), std::greater<>());

  // errors[ci][ri]
  std::vector<std::vector<long>> errors(cs.size(), std::vector<long>(rhos.size(), 0));
  for (int f = 0; f < k; ++f) {
    std::vector<Feature> xt;
    std::vector<int> yt;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold[i] == f) {
        held.push_back(i);
      } else {
        xt.push_back(x[i]);
        yt.push_back(y[i]);
      }
    }
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
      const std::vector<double> gram = rbf_gram(xt, rhos[ri]);
      for (std::size_t ci = 0; ci < cs.size(); ++ci) {
        SvmSolution s = smo_solve(gram, yt, cs[ci]);
        s.model.rho = rhos[ri];
        for (std::size_t t = 0; t < xt.size(); ++t) {
          if (s.alpha[t] <= 0.0) continue;
          s.model.support.push_back(xt[t]);
          s.model.coef.push_back(s.alpha[t] * yt[t]);
        }
        for (std::size_t i : held)
          if (s.model.predict(x[i]) != y[i]) ++errors[ci][ri];
      }
    }
  }

  CvResult best;
  long best_err = std::numeric_limits<long>::max();
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
      if (errors[ci][ri] < best_err) {
        best_err = errors[ci][ri];
        best.c = cs[ci];
        best.rho = rhos[ri];
      }
    }
  }
  best.error = static_cast<double>(best_err) / static_cast<double>(y.size());
  return best;
}

}  // namespace mulink
