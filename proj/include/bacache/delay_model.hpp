#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bacache/replica_vector.hpp"
#include "bacache/scenario.hpp"

namespace bacache {

/// Per-slot, per-candidate building block of the decoding failure
/// probability: (1 - exp(-(2^{R/m} - 1) / snr))^m.
inline double compute_beta(double rate, int buffer, double avg_snr) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw Error(ErrorCategory::domain, "compute_beta: rate must be > 0");
  if (buffer < 1) throw Error(ErrorCategory::domain, "compute_beta: buffer must be >= 1");
  if (!(avg_snr > 0.0) || !std::isfinite(avg_snr))
    throw Error(ErrorCategory::domain, "compute_beta: avg_snr must be > 0");
  const double threshold = std::expm1(rate / buffer * std::log(2.0));  // 2^{R/m} - 1
  const double per_slot = -std::expm1(-threshold / avg_snr);
  const double beta = std::pow(per_slot, buffer);
  if (!(beta > 0.0 && beta < 1.0))
    throw Error(ErrorCategory::numerical, "compute_beta: beta = " + std::to_string(beta) +
                                              " is not representable in (0, 1) for rate=" + std::to_string(rate) +
                                              ", buffer=" + std::to_string(buffer) + ", snr=" + std::to_string(avg_snr));
  return beta;
}

struct SmoothedObjectiveValue {
  double total = 0.0;
  double convex_part = 0.0;
  double concave_part = 0.0;
};

/**
 * Derived constants for evaluating the delay objective of one scenario.
 *
 * The segment delay D(x) = 1 / (1 - beta^x) is defined for real x > 0 so the
 * relaxed solver can use the same object; the indicator of "uncached" is
 * replaced by smoothing_a^x inside the smooth objective.
 */
class DelayModel {
 public:
  DelayModel(const Scenario& scenario, double smoothing_a = 0.1, double domain_floor = 1e-2)
      : beta_(compute_beta(scenario.rate, scenario.buffer, scenario.avg_snr)),
        log_beta_(std::log(beta_)),
        smoothing_a_(smoothing_a),
        log_a_(std::log(smoothing_a)),
        domain_floor_(domain_floor),
        num_bs_(scenario.num_bs) {
    scenario.validate();
    if (!(smoothing_a > 0.0 && smoothing_a < 1.0))
      throw Error(ErrorCategory::domain, "smoothing_a must lie in (0, 1)");
    if (!(domain_floor > 0.0)) throw Error(ErrorCategory::domain, "domain_floor must be > 0");
    if (!(beta_ > 0.0 && beta_ < 1.0))
      throw Error(ErrorCategory::numerical, "beta = " + std::to_string(beta_) + " is not in (0, 1)");
    base_delay_full_ = delay(scenario.num_bs);
    segment_weight_.resize(scenario.num_segments());
    for (std::size_t i = 0; i < segment_weight_.size(); ++i)
      segment_weight_[i] = scenario.popularity[static_cast<std::size_t>(scenario.file_of(i))];
  }

  double beta() const { return beta_; }
  double log_beta() const { return log_beta_; }
  double base_delay_full() const { return base_delay_full_; }
  double smoothing_a() const { return smoothing_a_; }
  double log_a() const { return log_a_; }
  double domain_floor() const { return domain_floor_; }
  int num_bs() const { return num_bs_; }
  std::span<const double> segment_weight() const { return segment_weight_; }

  /// Returns a copy with a different relaxed-domain floor.
  DelayModel with_floor(double floor) const {
    DelayModel m = *this;
    m.domain_floor_ = floor;
    return m;
  }

  // D(x) and its first two derivatives for real x > 0.
  double delay(double x) const { return -1.0 / std::expm1(x * log_beta_); }
  double delay_slope(double x) const {
    const double b = std::exp(x * log_beta_);
    const double q = -std::expm1(x * log_beta_);
    return b * log_beta_ / (q * q);
  }
  double delay_curvature(double x) const {
    const double b = std::exp(x * log_beta_);
    const double q = -std::expm1(x * log_beta_);
    return log_beta_ * log_beta_ * b * (1.0 + b) / (q * q * q);
  }

 private:
  double beta_;
  double log_beta_;
  double smoothing_a_;
  double log_a_;
  double domain_floor_;
  int num_bs_;
  double base_delay_full_ = 1.0;
  std::vector<double> segment_weight_;
};

inline double segment_delay(int x, const DelayModel& model) {
  if (x < 1) throw Error(ErrorCategory::domain, "segment_delay: x must be >= 1 (got " + std::to_string(x) + ")");
  return model.delay(x);
}

/// Uncached segments are pushed to every BS over the backhaul first.
inline double segment_delay_with_backhaul(int x, const Scenario& scenario, const DelayModel& model) {
  if (x < 0 || x > scenario.num_bs)
    throw Error(ErrorCategory::domain, "segment_delay_with_backhaul: x = " + std::to_string(x) +
                                           " outside [0, " + std::to_string(scenario.num_bs) + "]");
  return x >= 1 ? model.delay(x) : model.base_delay_full() + scenario.backhaul_delay;
}

/// Average download delay of a file request (slots); the reporting objective.
inline double exact_objective(const ReplicaVector& x, const Scenario& scenario, const DelayModel& model) {
  require_feasible(x, scenario);
  const auto w = model.segment_weight();
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += w[i] * segment_delay_with_backhaul(x[i], scenario, model);
  return total;
}

namespace detail {

inline void check_relaxed(std::span<const double> x, const Scenario& scenario, const DelayModel& model,
                          const char* who) {
  if (x.size() != scenario.num_segments())
    throw Error(ErrorCategory::domain, std::string(who) + ": point has " + std::to_string(x.size()) +
                                           " entries, expected " + std::to_string(scenario.num_segments()));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= model.domain_floor()) || !std::isfinite(x[i]))
      throw Error(ErrorCategory::domain, std::string(who) + ": entry " + std::to_string(i) + " = " +
                                             std::to_string(x[i]) + " below the domain floor");
}

}  // namespace detail

/// f = f1 + f2 with f1 convex and f2 concave on the relaxed domain.
inline SmoothedObjectiveValue smooth_objective(std::span<const double> x, const Scenario& scenario,
                                               const DelayModel& model) {
  detail::check_relaxed(x, scenario, model, "smooth_objective");
  const auto w = model.segment_weight();
  const double penalty = model.base_delay_full() + scenario.backhaul_delay;
  SmoothedObjectiveValue v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = model.delay(x[i]);
    const double ax = std::exp(x[i] * model.log_a());
    v.convex_part += w[i] * (d + penalty * ax);
    v.concave_part -= w[i] * d * ax;
  }
  v.total = v.convex_part + v.concave_part;
  return v;
}

inline std::vector<double> grad_concave_part(std::span<const double> x, const Scenario& scenario,
                                             const DelayModel& model) {
  detail::check_relaxed(x, scenario, model, "grad_concave_part");
  const auto w = model.segment_weight();
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ax = std::exp(x[i] * model.log_a());
    g[i] = -w[i] * ax * (model.delay_slope(x[i]) + model.delay(x[i]) * model.log_a());
  }
  return g;
}

/// Convex majorizer of f anchored at `anchor`, up to the constant f2(anchor).
inline double surrogate(std::span<const double> x, std::span<const double> anchor, double prox_weight,
                        const Scenario& scenario, const DelayModel& model) {
  if (prox_weight < 0.0) throw Error(ErrorCategory::domain, "surrogate: prox_weight must be >= 0");
  detail::check_relaxed(anchor, scenario, model, "surrogate");
  const auto value = smooth_objective(x, scenario, model);
  const auto grad = grad_concave_part(anchor, scenario, model);
  double linear = 0.0, prox = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - anchor[i];
    linear += grad[i] * d;
    prox += d * d;
  }
  return value.convex_part + linear + prox_weight * prox;
}

}  // namespace bacache
