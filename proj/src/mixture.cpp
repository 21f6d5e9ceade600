// SPDX-License-Identifier: Apache-2.0

#include "driftguard/mixture.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "driftguard/stats.hpp"

namespace driftguard {

namespace {

struct Component {
  double w;
  double mu;
  double var;
};

void check_scores(std::span<const double> scores) {
  if (scores.size() < 10) {
    throw ValidationError("GMM fit needs at least 10 scores, got " +
                          std::to_string(scores.size()));
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("GMM fit: non-finite score");
  }
}

double log_mix_density(double x, const Component& c0, const Component& c1) {
  const double l0 = std::log(c0.w) + normal_log_pdf(x, c0.mu, std::sqrt(c0.var));
  const double l1 = std::log(c1.w) + normal_log_pdf(x, c1.mu, std::sqrt(c1.var));
  const double m = std::max(l0, l1);
  return m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
}

}  // namespace

GmmFit fit_gmm_1d(std::span<const double> scores, const CalibrationConfig& config,
                  std::vector<double>* ll_trace) {
  config.validate();
  check_scores(scores);

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw ValidationError("GMM fit: all scores identical (zero variance)");
  }

  const std::size_t n = sorted.size();

  // Median-split initialization: deterministic and order-invariant.
  auto seed_component = [](std::span<const double> half) {
    double mean = 0.0;
    for (double s : half) mean += s;
    mean /= static_cast<double>(half.size());
    double var = 0.0;
    for (double s : half) var += (s - mean) * (s - mean);
    var /= static_cast<double>(half.size());
    return Component{0.5, mean, std::max(var, kVarianceFloor)};
  };
  Component lo = seed_component(std::span(sorted).first(n / 2));
  Component hi = seed_component(std::span(sorted).subspan(n / 2));

  std::vector<double> resp(n);  // responsibility of the hi component
  if (ll_trace) ll_trace->clear();

  double prev_ll = -std::numeric_limits<double>::infinity();
  double ll = prev_ll;
  bool converged = false;
  std::uint32_t iterations = 0;
  const double tol = config.em_tol * static_cast<double>(n);

  for (std::uint32_t iter = 0; iter < config.em_max_iters; ++iter) {
    // E-step and log likelihood under the current parameters.
    const double sd_lo = std::sqrt(lo.var);
    const double sd_hi = std::sqrt(hi.var);
    const double log_w_lo = std::log(lo.w);
    const double log_w_hi = std::log(hi.w);
    ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double l0 = log_w_lo + normal_log_pdf(sorted[i], lo.mu, sd_lo);
      const double l1 = log_w_hi + normal_log_pdf(sorted[i], hi.mu, sd_hi);
      const double m = std::max(l0, l1);
      const double e0 = std::exp(l0 - m);
      const double e1 = std::exp(l1 - m);
      resp[i] = e1 / (e0 + e1);
      ll += m + std::log(e0 + e1);
    }
    // EM guarantees this up to rounding noise.
    assert(ll >= prev_ll - 1e-8 * std::max(1.0, std::abs(prev_ll)));
    if (ll_trace) ll_trace->push_back(ll);
    ++iterations;
    if (std::abs(ll - prev_ll) < tol) {
      converged = true;
      break;
    }
    prev_ll = ll;

    // M-step.
    double n_hi = 0.0;
    for (double r : resp) n_hi += r;
    const double n_lo = static_cast<double>(n) - n_hi;
    if (n_lo <= 0.0 || n_hi <= 0.0) {
      // One component lost every point; freeze parameters and let the
      // stability check flag the degenerate weight.
      break;
    }
    double mu_lo = 0.0, mu_hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mu_hi += resp[i] * sorted[i];
      mu_lo += (1.0 - resp[i]) * sorted[i];
    }
    mu_lo /= n_lo;
    mu_hi /= n_hi;
    double var_lo = 0.0, var_hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d_lo = sorted[i] - mu_lo;
      const double d_hi = sorted[i] - mu_hi;
      var_lo += (1.0 - resp[i]) * d_lo * d_lo;
      var_hi += resp[i] * d_hi * d_hi;
    }
    lo = Component{n_lo / static_cast<double>(n), mu_lo,
                   std::max(var_lo / n_lo, kVarianceFloor)};
    hi = Component{n_hi / static_cast<double>(n), mu_hi,
                   std::max(var_hi / n_hi, kVarianceFloor)};
  }

  if (lo.mu > hi.mu) std::swap(lo, hi);
  // Keep weights inside (0, 1) so the fit always validates; a weight at
  // the clamp is far below the 0.05 stability floor anyway.
  constexpr double w_eps = 1e-12;
  const double w_lo = std::clamp(lo.w, w_eps, 1.0 - w_eps);

  GmmFit fit;
  fit.w_clean = w_lo;
  fit.w_injected = 1.0 - w_lo;
  fit.mu_clean = lo.mu;
  fit.sigma_clean = std::sqrt(lo.var);
  fit.mu_injected = hi.mu;
  fit.sigma_injected = std::sqrt(hi.var);
  fit.converged = converged;
  fit.iterations = iterations;
  fit.log_likelihood = em_log_likelihood(sorted, fit);
  if (ll_trace) ll_trace->push_back(fit.log_likelihood);
  fit.validate();
  return fit;
}

double em_log_likelihood(std::span<const double> scores, const GmmFit& fit) {
  fit.validate();
  const Component c0{fit.w_clean, fit.mu_clean, fit.sigma_clean * fit.sigma_clean};
  const Component c1{fit.w_injected, fit.mu_injected,
                     fit.sigma_injected * fit.sigma_injected};
  double ll = 0.0;
  for (double s : scores) ll += log_mix_density(s, c0, c1);
  return ll;
}

std::optional<double> density_intersection(const GmmFit& fit) {
  fit.validate();
  if (!(fit.mu_clean < fit.mu_injected)) {
    throw ValidationError("density_intersection requires mu_clean < mu_injected");
  }
  const double vc = fit.sigma_clean * fit.sigma_clean;
  const double vi = fit.sigma_injected * fit.sigma_injected;

  // Equality of weighted log densities:
  //   a x^2 + b x + c = 0 with
  const double a = 0.5 / vi - 0.5 / vc;
  const double b = fit.mu_clean / vc - fit.mu_injected / vi;
  const double c = fit.mu_injected * fit.mu_injected / (2.0 * vi) -
                   fit.mu_clean * fit.mu_clean / (2.0 * vc) +
                   std::log((fit.w_clean * fit.sigma_injected) /
                            (fit.w_injected * fit.sigma_clean));

  const double lo = fit.mu_clean;
  const double hi = fit.mu_injected;
  auto inside = [&](double x) { return x > lo && x < hi; };

  std::vector<double> roots;
  if (std::abs(a) <= 1e-12 * std::max(0.5 / vi, 0.5 / vc)) {
    // Equal variances: the linear case, i.e. the closed form
    // (mu_c + mu_i)/2 + sigma^2 ln(w_c/w_i)/(mu_i - mu_c).
    if (b != 0.0) roots.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(sq, b));
      roots.push_back(q / a);
      if (q != 0.0) roots.push_back(c / q);
    }
  }

  // Select the separating root: clean density dominates below it,
  // injected above.
  auto weighted_gap = [&](double x) {
    return std::log(fit.w_clean) + normal_log_pdf(x, fit.mu_clean, fit.sigma_clean) -
           std::log(fit.w_injected) -
           normal_log_pdf(x, fit.mu_injected, fit.sigma_injected);
  };
  std::sort(roots.begin(), roots.end());
  for (double r : roots) {
    if (!inside(r)) continue;
    const double eps = 1e-9 * (hi - lo);
    if (weighted_gap(r - eps) > 0.0 && weighted_gap(r + eps) < 0.0) return r;
  }
  return std::nullopt;
}

std::string_view to_string(InstabilityReason reason) {
  switch (reason) {
    case InstabilityReason::not_converged: return "not_converged";
    case InstabilityReason::degenerate_weight: return "degenerate_weight";
    case InstabilityReason::collapsed_components: return "collapsed_components";
    case InstabilityReason::degenerate_variance: return "degenerate_variance";
  }
  throw ValidationError("unknown InstabilityReason value");
}

StabilityReport stability_check(const GmmFit& fit, const CalibrationConfig& config) {
  (void)config;
  StabilityReport report;
  if (!fit.converged) report.reasons.push_back(InstabilityReason::not_converged);
  if (std::min(fit.w_clean, fit.w_injected) < 0.05) {
    report.reasons.push_back(InstabilityReason::degenerate_weight);
  }
  const double gap = fit.mu_injected - fit.mu_clean;
  if (gap < std::max(fit.sigma_clean, fit.sigma_injected) / 2.0) {
    report.reasons.push_back(InstabilityReason::collapsed_components);
  }
  const double floor_edge = kSigmaFloor * (1.0 + 1e-9);
  if (fit.sigma_clean <= floor_edge || fit.sigma_injected <= floor_edge) {
    report.reasons.push_back(InstabilityReason::degenerate_variance);
  }
  report.stable = report.reasons.empty();
  return report;
}

}  // namespace driftguard
