#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "siggame/params.hpp"
#include "siggame/single_stage.hpp"

namespace siggame {

// Scalar Kalman filter state for one stage.
struct FilterState {
  double x_pred = 0.0;      // xhat_{t|t-1}
  double sigma_pred = 0.0;  // Sigma_{t|t-1}
  double x_upd = 0.0;       // xhat_{t|t}
  double sigma_upd = 0.0;   // Sigma_{t|t}
  double gain = 0.0;        // Kalman gain K_t
  double innov_var = 0.0;   // innovation variance
};

// Predicted prior entering a stage.
struct Prediction {
  double x_pred = 0.0;
  double sigma_pred = 0.0;
};

inline Prediction initial_prediction(double sigma_x0_2) { return {0.0, sigma_x0_2}; }

// Gauss-Markov time update from the filtered state at t to the prior at t+1.
inline Prediction predict_next(const FilterState& s, double beta, double sigma_n2) {
  return {beta * s.x_upd, beta * beta * s.sigma_upd + sigma_n2};
}

// Measurement update for the combined observation r = alpha*y + (1-alpha)*z
// when the encoder transmits m = A*x + C. The known offset alpha*C is
// removed through the innovation. The covariance recursion is independent of
// the observed value.
inline FilterState kalman_step(const Prediction& pred, double A, double alpha, double C,
                               double sigma_v2, double sigma_w2, double r) {
  const double h = alpha * A + 1.0 - alpha;
  const double innov_var = h * h * pred.sigma_pred +
                           (1.0 - alpha) * (1.0 - alpha) * sigma_w2 + alpha * alpha * sigma_v2;
  if (!(innov_var > 0.0)) {
    throw PreconditionError("innovation variance must be > 0 (degenerate observation)");
  }
  const double gain = pred.sigma_pred * h / innov_var;
  const double innovation = r - h * pred.x_pred - alpha * C;
  FilterState s;
  s.x_pred = pred.x_pred;
  s.sigma_pred = pred.sigma_pred;
  s.gain = gain;
  s.innov_var = innov_var;
  s.x_upd = pred.x_pred + gain * innovation;
  s.sigma_upd = (1.0 - gain * h) * pred.sigma_pred;
  return s;
}

struct StageResponse {
  double alpha;
  double gain;
  double J_d;
  DecoderCase which;
};

// Stage-wise decoder best response: the single-stage table with the source
// variance replaced by the predicted variance Sigma_{t|t-1}.
inline StageResponse decoder_stage_best_response(double A, double sigma_pred, double sigma_v2,
                                                 double sigma_w2) {
  if (!(sigma_pred > 0.0)) {
    throw PreconditionError("sigma_pred must be > 0");
  }
  const detail::TableEntry row = detail::decoder_table(A, sigma_pred, sigma_v2, sigma_w2);
  return {row.alpha, row.K, row.J_d, row.which};
}

// Equilibrium strategy and costs of one stage.
struct StagePolicy {
  double A = 0.0;           // encoder slope, nonnegative root
  double alpha = 0.0;       // combining ratio
  double gain = 0.0;        // decoder gain
  double J_d = 0.0;         // stage estimation error
  double J_e = 0.0;         // stage encoder cost
  double sigma_pred = 0.0;  // Sigma_{t|t-1} seen by the stage
  DecoderCase which = DecoderCase::SideOnly;
  bool transmitting = false;
};

struct MultiStageEquilibrium {
  std::vector<StagePolicy> stages;
  double J_d_avg = 0.0;
  double J_e_avg = 0.0;
};

// Forward-recursive Stackelberg equilibrium: each stage solves the
// single-stage decision rule at its predicted variance, and the next
// predicted variance is beta_t^2 * J_d_t + sigma_n2_t. Strictly forward; the
// stage costs are myopic, so no backward pass exists.
inline MultiStageEquilibrium multistage_stackelberg(const MultiStageParams& p) {
  validate(p);
  MultiStageEquilibrium eq;
  eq.stages.reserve(static_cast<std::size_t>(p.n) + 1);
  double sigma_pred = p.sigma_x0_2;
  double sum_d = 0.0;
  double sum_e = 0.0;
  for (int t = 0; t <= p.n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const detail::StageSolution s =
        detail::solve_stage(sigma_pred, p.sigma_v2[i], p.sigma_w2[i], p.theta[i], p.bias[i]);
    eq.stages.push_back(
        {s.A, s.alpha, s.gain, s.J_d, s.J_e, sigma_pred, s.which, s.transmitting});
    sum_d += s.J_d;
    sum_e += s.J_e;
    if (t < p.n) {
      sigma_pred = p.beta[i] * p.beta[i] * s.J_d + p.sigma_n2[i];
    }
  }
  eq.J_d_avg = sum_d / (p.n + 1);
  eq.J_e_avg = sum_e / (p.n + 1);
  return eq;
}

// Forward-in-time lower bound on the per-stage estimation error given the
// per-stage innovation powers P_t. The recursion feeds the bound itself into
// the next predicted variance.
inline std::vector<double> multistage_lower_bound(std::span<const double> powers,
                                                  const MultiStageParams& p) {
  validate(p);
  const auto expected = static_cast<std::size_t>(p.n) + 1;
  if (powers.size() != expected) {
    detail::reject("powers must have length n+1 (expected " + std::to_string(expected) +
                   ", got " + std::to_string(powers.size()) + ")");
  }
  std::vector<double> bounds;
  bounds.reserve(expected);
  double sigma_pred = p.sigma_x0_2;
  for (int t = 0; t <= p.n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (!(powers[i] >= 0.0)) {
      throw PreconditionError("innovation power P_t must be >= 0");
    }
    const double w = p.sigma_w2[i];
    const double v = p.sigma_v2[i];
    const double J =
        sigma_pred * w * v / ((powers[i] / sigma_pred * w + v) * sigma_pred + w * v);
    bounds.push_back(J);
    if (t < p.n) {
      sigma_pred = p.beta[i] * p.beta[i] * J + p.sigma_n2[i];
    }
  }
  return bounds;
}

struct SchedulePerformance {
  std::vector<double> sigma_pred;  // prediction-error variance entering each stage
  std::vector<double> sigma_upd;   // estimation-error variance after each stage
};

// Deterministic per-stage error variances of a fixed decoder schedule
// (arbitrary combining ratios and gains) against the given slopes. Suboptimal
// gains are priced by the general quadratic update, so this agrees with
// decoder_stage_best_response exactly when the schedule is table-optimal.
inline SchedulePerformance schedule_performance(const MultiStageParams& p,
                                                std::span<const double> A,
                                                std::span<const double> alpha,
                                                std::span<const double> gain) {
  validate(p);
  const auto expected = static_cast<std::size_t>(p.n) + 1;
  if (A.size() != expected || alpha.size() != expected || gain.size() != expected) {
    detail::reject("A, alpha and gain must all have length n+1");
  }
  SchedulePerformance perf;
  double sigma_pred = p.sigma_x0_2;
  for (int t = 0; t <= p.n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0)) {
      detail::reject("alpha must be in [0, 1]");
    }
    const double h = alpha[i] * A[i] + 1.0 - alpha[i];
    const double err_gain = 1.0 - gain[i] * h;
    const double noise = gain[i] * gain[i] *
                         (alpha[i] * alpha[i] * p.sigma_v2[i] +
                          (1.0 - alpha[i]) * (1.0 - alpha[i]) * p.sigma_w2[i]);
    const double sigma_upd = err_gain * err_gain * sigma_pred + noise;
    perf.sigma_pred.push_back(sigma_pred);
    perf.sigma_upd.push_back(sigma_upd);
    if (t < p.n) {
      sigma_pred = p.beta[i] * p.beta[i] * sigma_upd + p.sigma_n2[i];
    }
  }
  return perf;
}

// Runs the Kalman decoder over a full observation record for the given
// per-stage encoder slopes and combining ratios. The variance trajectory is
// deterministic; only the state estimates depend on the observations.
inline std::vector<FilterState> run_filter(const MultiStageParams& p, std::span<const double> A,
                                           std::span<const double> alpha,
                                           std::span<const double> observations) {
  validate(p);
  const auto expected = static_cast<std::size_t>(p.n) + 1;
  if (A.size() != expected || alpha.size() != expected || observations.size() != expected) {
    detail::reject("A, alpha and observations must all have length n+1");
  }
  std::vector<FilterState> states;
  states.reserve(expected);
  Prediction pred = initial_prediction(p.sigma_x0_2);
  for (int t = 0; t <= p.n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const FilterState s =
        kalman_step(pred, A[i], alpha[i], 0.0, p.sigma_v2[i], p.sigma_w2[i], observations[i]);
    states.push_back(s);
    if (t < p.n) {
      pred = predict_next(s, p.beta[i], p.sigma_n2[i]);
    }
  }
  return states;
}

}  // namespace siggame
