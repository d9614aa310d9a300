#include "clelab/stats.hpp"

#include <algorithm>
#include <cmath>

namespace clelab {

BinnedEstimate BinnedEstimate::from_series(const std::vector<double>& x) {
  if (x.empty())
    throw StatisticalResolutionError("blocking analysis on an empty series");
  BinnedEstimate est;
  est.n_samples = long(x.size());
  double sum = 0.0;
  for (const double v : x) sum += v;
  est.mean = sum / double(x.size());

  std::vector<double> level = x;
  long bin = 1;
  while (long(level.size()) >= 8) {
    const long nb = long(level.size());
    double m = 0.0;
    for (const double v : level) m += v;
    m /= double(nb);
    double var = 0.0;
    for (const double v : level) var += (v - m) * (v - m);
    var /= double(nb - 1);
    const double se = std::sqrt(var / double(nb));
    est.bin_sizes.push_back(bin);
    est.bin_stderrs.push_back(se);
    if (bin == 1) est.naive_stderr = se;
    // halve: average adjacent pairs
    std::vector<double> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2)
      next.push_back(0.5 * (level[i] + level[i + 1]));
    level = std::move(next);
    bin *= 2;
  }
  if (est.bin_stderrs.empty()) {
    // short series: single-level estimate
    double var = 0.0;
    for (const double v : x) var += (v - est.mean) * (v - est.mean);
    var = x.size() > 1 ? var / double(x.size() - 1) : 0.0;
    est.naive_stderr = std::sqrt(var / double(x.size()));
    est.bin_sizes.push_back(1);
    est.bin_stderrs.push_back(est.naive_stderr);
  }
  est.stderror = *std::max_element(est.bin_stderrs.begin(), est.bin_stderrs.end());
  return est;
}

BinnedEstimate BinnedEstimate::from_chains(
    const std::vector<BinnedEstimate>& parts) {
  if (parts.empty())
    throw StatisticalResolutionError("no chains to merge");
  BinnedEstimate out;
  double wsum = 0.0;
  for (const auto& p : parts) wsum += double(p.n_samples);
  double mean = 0.0, var = 0.0;
  for (const auto& p : parts) {
    const double w = double(p.n_samples) / wsum;
    mean += w * p.mean;
    var += w * w * p.stderror * p.stderror;
    out.n_samples += p.n_samples;
  }
  out.mean = mean;
  out.stderror = std::sqrt(var);
  out.naive_stderr = out.stderror;
  out.bin_sizes = parts.front().bin_sizes;
  out.bin_stderrs = parts.front().bin_stderrs;
  return out;
}

RatioEstimate ratio_of(const BinnedEstimate& num, const BinnedEstimate& den,
                       const std::string& context) {
  return ratio_of(RatioEstimate{num.mean, num.stderror},
                  RatioEstimate{den.mean, den.stderror}, context);
}

RatioEstimate ratio_of(const RatioEstimate& num, const RatioEstimate& den,
                       const std::string& context) {
  if (num.value == 0.0 || den.value == 0.0)
    throw StatisticalResolutionError(
        context + ": zero event count in a ratio; increase the sweep budget");
  const double r = num.value / den.value;
  const double rel2 = (num.stderror / num.value) * (num.stderror / num.value) +
                      (den.stderror / den.value) * (den.stderror / den.value);
  return {r, std::abs(r) * std::sqrt(rel2)};
}

LinearFit weighted_linear_fit(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& yerr) {
  const std::size_t n = x.size();
  if (y.size() != n || yerr.size() != n || n < 2)
    throw std::invalid_argument("weighted_linear_fit: need >= 2 points");
  double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (yerr[i] * yerr[i]);
    if (!std::isfinite(w))
      throw std::invalid_argument("weighted_linear_fit: zero error bar");
    S += w;
    Sx += w * x[i];
    Sy += w * y[i];
    Sxx += w * x[i] * x[i];
    Sxy += w * x[i] * y[i];
  }
  const double delta = S * Sxx - Sx * Sx;
  LinearFit fit;
  fit.intercept = (Sxx * Sy - Sx * Sxy) / delta;
  fit.slope = (S * Sxy - Sx * Sy) / delta;
  fit.intercept_err = std::sqrt(Sxx / delta);
  fit.slope_err = std::sqrt(S / delta);
  fit.dof = int(n) - 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (y[i] - fit.intercept - fit.slope * x[i]) / yerr[i];
    fit.chi2 += r * r;
  }
  if (fit.dof > 0 && fit.chi2 / fit.dof > 1.0) {
    const double s = std::sqrt(fit.chi2 / fit.dof);
    fit.intercept_err *= s;
    fit.slope_err *= s;
    fit.stderr_inflated = true;
  }
  return fit;
}

AmplitudeFit weighted_amplitude_fit(const std::vector<double>& model,
                                    const std::vector<double>& y,
                                    const std::vector<double>& yerr) {
  const std::size_t n = model.size();
  if (y.size() != n || yerr.size() != n || n < 1)
    throw std::invalid_argument("weighted_amplitude_fit: bad inputs");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (yerr[i] * yerr[i]);
    num += w * model[i] * y[i];
    den += w * model[i] * model[i];
  }
  if (den == 0.0)
    throw std::invalid_argument("weighted_amplitude_fit: degenerate model");
  AmplitudeFit fit;
  fit.c = num / den;
  fit.c_err = std::sqrt(1.0 / den);
  fit.dof = int(n) - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (y[i] - fit.c * model[i]) / yerr[i];
    fit.residuals.push_back(r);
    fit.chi2 += r * r;
  }
  if (fit.dof > 0 && fit.chi2 / fit.dof > 1.0)
    fit.c_err *= std::sqrt(fit.chi2 / fit.dof);
  return fit;
}

namespace {

double gammln(double xx) {
  static const double cof[6] = {76.18009172947146,  -86.50532032941677,
                                24.01409824083091,  -1.231739572450155,
                                0.1208650973866179e-2, -0.5395239384953e-5};
  double x = xx, y = xx;
  double tmp = x + 5.5;
  tmp -= (x + 0.5) * std::log(tmp);
  double ser = 1.000000000190015;
  for (int j = 0; j < 6; ++j) ser += cof[j] / ++y;
  return -tmp + std::log(2.5066282746310005 * ser / x);
}

double gser(double a, double x) {
  const double gln = gammln(a);
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ++ap;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-14) break;
  }
  return sum * std::exp(-x + a * std::log(x) - gln);
}

double gcf(double a, double x) {
  const double gln = gammln(a);
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-14) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double chi2_survival(double x, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi2_survival: dof must be > 0");
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * dof, xx = 0.5 * x;
  return xx < a + 1.0 ? 1.0 - gser(a, xx) : gcf(a, xx);
}

}  // namespace clelab
