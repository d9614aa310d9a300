#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace clelab {

// Raised when a measurement cannot resolve the requested quantity (zero
// event counts, derivative below noise). CLI maps it to exit code 3.
class StatisticalResolutionError : public std::runtime_error {
 public:
  explicit StatisticalResolutionError(const std::string& what)
      : std::runtime_error(what) {}
};

// Mean with a blocking-analysis error bar: bins are doubled until fewer
// than 8 remain and the error is read off the variance plateau.
struct BinnedEstimate {
  double mean = 0.0;
  double stderror = 0.0;
  long n_samples = 0;
  double naive_stderr = 0.0;
  std::vector<long> bin_sizes;
  std::vector<double> bin_stderrs;

  static BinnedEstimate from_series(const std::vector<double>& x);
  // Merge of independent chains (weighted by sample counts).
  static BinnedEstimate from_chains(const std::vector<BinnedEstimate>& parts);
};

// value = a/b with relative errors added in quadrature. Throws
// StatisticalResolutionError when numerator or denominator is zero.
struct RatioEstimate {
  double value = 0.0;
  double stderror = 0.0;
};
RatioEstimate ratio_of(const BinnedEstimate& num, const BinnedEstimate& den,
                       const std::string& context);
RatioEstimate ratio_of(const RatioEstimate& num, const RatioEstimate& den,
                       const std::string& context);

// Weighted least squares y = intercept + slope x. When chi2/dof exceeds 1
// the parameter errors are inflated by sqrt(chi2/dof) (model mismatch).
struct LinearFit {
  double intercept = 0.0, intercept_err = 0.0;
  double slope = 0.0, slope_err = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  bool stderr_inflated = false;
};
LinearFit weighted_linear_fit(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& yerr);

// One-parameter weighted fit y_i = c * model_i.
struct AmplitudeFit {
  double c = 0.0, c_err = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  std::vector<double> residuals;
};
AmplitudeFit weighted_amplitude_fit(const std::vector<double>& model,
                                    const std::vector<double>& y,
                                    const std::vector<double>& yerr);

// Survival function of the chi-squared distribution, Q(dof/2, x/2).
double chi2_survival(double x, int dof);

}  // namespace clelab
