#include "mafem/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace mafem {

const TetRule& tet_rule_degree2() {
  static const TetRule rule = [] {
    const double a = 0.5854101966249685;
    const double b = 0.1381966011250105;
    TetRule r;
    r.points = {{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}};
    r.weights = {0.25, 0.25, 0.25, 0.25};
    return r;
  }();
  return rule;
}

const TetRule& tet_rule_degree4() {
  static const TetRule rule = [] {
    TetRule r;
    r.points.push_back({0.25, 0.25, 0.25, 0.25});
    r.weights.push_back(-74.0 / 5625.0 * 6.0);
    const double s = 1.0 / 14.0;
    const double l = 11.0 / 14.0;
    for (int i = 0; i < 4; ++i) {
      std::array<double, 4> p{s, s, s, s};
      p[i] = l;
      r.points.push_back(p);
      r.weights.push_back(343.0 / 45000.0 * 6.0);
    }
    const double a = (1.0 + std::sqrt(5.0 / 14.0)) / 4.0;
    const double b = (1.0 - std::sqrt(5.0 / 14.0)) / 4.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        std::array<double, 4> p{b, b, b, b};
        p[i] = a;
        p[j] = a;
        r.points.push_back(p);
        r.weights.push_back(56.0 / 2250.0 * 6.0);
      }
    }
    return r;
  }();
  return rule;
}

namespace {

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre01(int q, std::vector<double>& x, std::vector<double>& w) {
  x.resize(q);
  w.resize(q);
  for (int i = 0; i < q; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(q, t);
      const double pm = std::legendre(q - 1, t);
      dp = q * (t * p - pm) / (t * t - 1.0);
      const double dt = p / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    const double p = std::legendre(q, t);
    const double pm = std::legendre(q - 1, t);
    dp = q * (t * p - pm) / (t * t - 1.0);
    x[i] = 0.5 * (1.0 - t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

} // namespace

TetRule tet_rule_collapsed(int q) {
  if (q < 1) throw ArgumentError("collapsed rule needs q >= 1");
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre01(q, x, w);
  TetRule r;
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      for (int k = 0; k < q; ++k) {
        const double s = x[i];
        const double t = x[j] * (1.0 - s);
        const double u = x[k] * (1.0 - s) * (1.0 - x[j]);
        r.points.push_back({1.0 - s - t - u, s, t, u});
        r.weights.push_back(6.0 * w[i] * w[j] * w[k] * (1.0 - s) * (1.0 - s) * (1.0 - x[j]));
      }
    }
  }
  return r;
}

const TriangleRule& triangle_rule_degree2() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    r.points = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    r.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return r;
  }();
  return rule;
}

} // namespace mafem
