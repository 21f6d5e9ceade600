// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "driftguard/types.hpp"

namespace driftguard {

/// Fit a two-component 1-D Gaussian mixture by EM.
///
/// Initialization is deterministic and order-invariant: the sorted
/// scores are split at the median and each half seeds one component
/// (weights 0.5/0.5). EM stops when the log-likelihood improvement
/// drops below config.em_tol * n or after config.em_max_iters
/// iterations. Variances are floored at kVarianceFloor in the M-step.
/// Components are returned with mu_clean <= mu_injected.
///
/// Requires at least 10 finite scores with nonzero spread.
/// ll_trace, when given, receives the log-likelihood observed at each
/// iteration (a non-decreasing sequence).
GmmFit fit_gmm_1d(std::span<const double> scores, const CalibrationConfig& config,
                  std::vector<double>* ll_trace = nullptr);

/// Observed-data log likelihood of scores under the fit.
double em_log_likelihood(std::span<const double> scores, const GmmFit& fit);

/// Solve w_clean * f_clean(x) = w_injected * f_injected(x) for the
/// decision boundary in the open interval (mu_clean, mu_injected).
/// Equal variances reduce to the closed form
///   (mu_c + mu_i)/2 + sigma^2 * ln(w_c/w_i) / (mu_i - mu_c);
/// otherwise the log-density equality is a quadratic and the separating
/// root inside the interval is selected. Returns nullopt when no such
/// root exists (caller falls back to a midpoint rule).
/// Requires mu_clean < mu_injected.
std::optional<double> density_intersection(const GmmFit& fit);

enum class InstabilityReason {
  not_converged,
  degenerate_weight,
  collapsed_components,
  degenerate_variance,
};

std::string_view to_string(InstabilityReason reason);

struct StabilityReport {
  bool stable = true;
  std::vector<InstabilityReason> reasons;
};

/// Classify a fit as trustworthy or not:
///   not_converged        EM hit the iteration cap
///   degenerate_weight    min weight < 0.05
///   collapsed_components mean gap < max(sigma)/2
///   degenerate_variance  a sigma sits at the variance floor
StabilityReport stability_check(const GmmFit& fit, const CalibrationConfig& config);

}  // namespace driftguard
