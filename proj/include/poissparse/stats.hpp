#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace psr {

inline double mean(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean: empty");
  double total = 0.0;
  for (double v : x) total += v;
  return total / double(x.size());
}

inline double stderr_of_mean(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / double(x.size() - 1) / double(x.size()));
}

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson: need matched series of length >= 2");
  double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need matched series");
  double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

// Through-origin least squares: y ~ c x.
inline double origin_fit_slope(const std::vector<double>& x,
                               const std::vector<double>& y) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += x[i] * y[i];
    den += x[i] * x[i];
  }
  if (den == 0.0) throw std::invalid_argument("origin_fit_slope: x all zero");
  return num / den;
}

// Trapezoidal area under a (pf, pd) curve anchored at (0,0) and (1,1).
inline double trapezoid_auc(std::vector<double> pf, std::vector<double> pd) {
  if (pf.size() != pd.size() || pf.empty())
    throw std::invalid_argument("trapezoid_auc: matched non-empty series");
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  for (std::size_t i = 0; i < pf.size(); ++i) pts.emplace_back(pf[i], pd[i]);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += 0.5 * (pts[i].first - pts[i - 1].first) *
            (pts[i].second + pts[i - 1].second);
  return area;
}

}  // namespace psr
