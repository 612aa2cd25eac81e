#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "siggame/multi_stage.hpp"
#include "siggame/params.hpp"
#include "siggame/single_stage.hpp"

namespace siggame {

// Simulation control. Samples are drawn in blocks; every block owns an
// independent sub-stream derived from (seed, block index), so results are
// reproducible bit-for-bit and do not depend on how blocks are scheduled.
struct SimConfig {
  std::int64_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  std::int64_t block_size = 1 << 16;
};

inline const SimConfig& validate(const SimConfig& c) {
  if (c.n_samples < 1) detail::reject("n_samples must be >= 1");
  if (c.block_size < 1) detail::reject("block_size must be >= 1");
  return c;
}

struct SimResult {
  double mean_J_e = 0.0;
  double mean_J_d = 0.0;
  double se_J_e = 0.0;
  double se_J_d = 0.0;
  std::int64_t n_samples = 0;
  // Per-stage breakdown, filled by multi-stage runs only.
  std::vector<double> stage_mean_J_d, stage_se_J_d;
  std::vector<double> stage_mean_J_e, stage_se_J_e;
};

enum class EncoderMode {
  Memoryless,   // m_t = A_t * x_t
  Innovations,  // m_t = A_t * (x_t - xhat_{t|t-1}), via noiseless feedback
};

namespace detail {

// Random-access splitmix64: the sub-seed of block b in the stream started at
// `seed`. This is the documented splitting rule that keeps serial and
// parallel execution bit-identical.
inline std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
  std::uint64_t z = seed + (block + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Mean and standard error from running sums. The standard error comes from
// the sample variance of the per-sample costs.
struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
  double mean(std::int64_t n) const { return sum / static_cast<double>(n); }
  double se(std::int64_t n) const {
    if (n < 2) return std::numeric_limits<double>::infinity();
    const double m = mean(n);
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) /
                                         static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace detail

// Samples the single-stage model x -> (y, z) -> r -> xhat and estimates both
// expected costs. Deterministic for a fixed (seed, block_size, n_samples).
inline SimResult simulate_single_stage(const AffineEncoder& enc, const AffineDecoder& dec,
                                       const GameParams& p, const SimConfig& cfg) {
  validate(p);
  validate(enc);
  validate(dec);
  validate(cfg);
  const double sd_x = std::sqrt(p.sigma_x2);
  const double sd_v = std::sqrt(p.sigma_v2);
  const double sd_w = std::sqrt(p.sigma_w2);
  detail::Moments m_d, m_e;
  const std::int64_t n_blocks = (cfg.n_samples + cfg.block_size - 1) / cfg.block_size;
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    std::mt19937_64 rng(detail::block_seed(cfg.seed, static_cast<std::uint64_t>(b)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::int64_t count =
        std::min(cfg.block_size, cfg.n_samples - b * cfg.block_size);
    detail::Moments blk_d, blk_e;
    for (std::int64_t i = 0; i < count; ++i) {
      const double x = sd_x * gauss(rng);
      const double v = sd_v * gauss(rng);
      const double w = sd_w * gauss(rng);
      const double m = enc.A * x + enc.C;
      const double r = dec.alpha * (m + v) + (1.0 - dec.alpha) * (x + w);
      const double xhat = dec.K * r + dec.L;
      const double err = x - xhat;
      blk_d.add(err * err);
      const double biased = err - p.bias;
      blk_e.add(biased * biased + p.theta * m * m);
    }
    m_d.sum += blk_d.sum;
    m_d.sum_sq += blk_d.sum_sq;
    m_e.sum += blk_e.sum;
    m_e.sum_sq += blk_e.sum_sq;
  }
  SimResult res;
  res.n_samples = cfg.n_samples;
  res.mean_J_d = m_d.mean(cfg.n_samples);
  res.se_J_d = m_d.se(cfg.n_samples);
  res.mean_J_e = m_e.mean(cfg.n_samples);
  res.se_J_e = m_e.se(cfg.n_samples);
  return res;
}

// Per-stage decoder schedule for a multi-stage simulation.
struct DecoderSchedule {
  std::vector<double> alpha;
  std::vector<double> gain;
};

// Decoder schedule that best-responds to the announced slopes via the
// deterministic variance recursion.
inline DecoderSchedule table_optimal_schedule(const MultiStageParams& p,
                                              std::span<const double> A) {
  validate(p);
  const auto expected = static_cast<std::size_t>(p.n) + 1;
  if (A.size() != expected) {
    detail::reject("A must have length n+1");
  }
  DecoderSchedule sched;
  double sigma_pred = p.sigma_x0_2;
  for (int t = 0; t <= p.n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const StageResponse resp =
        decoder_stage_best_response(A[i], sigma_pred, p.sigma_v2[i], p.sigma_w2[i]);
    sched.alpha.push_back(resp.alpha);
    sched.gain.push_back(resp.gain);
    if (t < p.n) {
      sigma_pred = p.beta[i] * p.beta[i] * resp.J_d + p.sigma_n2[i];
    }
  }
  return sched;
}

// Simulates whole trajectories of the Gauss-Markov source through both
// channels and the filtering decoder, and estimates the per-stage costs.
// The aggregate means are averages over stages of a trajectory.
inline SimResult simulate_multi_stage(const MultiStageParams& p, EncoderMode mode,
                                      std::span<const double> A, const DecoderSchedule& sched,
                                      const SimConfig& cfg) {
  validate(p);
  validate(cfg);
  const auto n_stages = static_cast<std::size_t>(p.n) + 1;
  if (A.size() != n_stages || sched.alpha.size() != n_stages || sched.gain.size() != n_stages) {
    detail::reject("A, alpha and gain schedules must all have length n+1");
  }
  std::vector<detail::Moments> st_d(n_stages), st_e(n_stages);
  detail::Moments avg_d, avg_e;
  const std::int64_t n_blocks = (cfg.n_samples + cfg.block_size - 1) / cfg.block_size;
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    std::mt19937_64 rng(detail::block_seed(cfg.seed, static_cast<std::uint64_t>(b)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::int64_t count =
        std::min(cfg.block_size, cfg.n_samples - b * cfg.block_size);
    std::vector<detail::Moments> blk_d(n_stages), blk_e(n_stages);
    detail::Moments blk_avg_d, blk_avg_e;
    for (std::int64_t i = 0; i < count; ++i) {
      double x = std::sqrt(p.sigma_x0_2) * gauss(rng);
      double xhat_pred = 0.0;
      double traj_d = 0.0;
      double traj_e = 0.0;
      for (std::size_t t = 0; t < n_stages; ++t) {
        const double v = std::sqrt(p.sigma_v2[t]) * gauss(rng);
        const double w = std::sqrt(p.sigma_w2[t]) * gauss(rng);
        const double m =
            mode == EncoderMode::Memoryless ? A[t] * x : A[t] * (x - xhat_pred);
        const double alpha = sched.alpha[t];
        const double r = alpha * (m + v) + (1.0 - alpha) * (x + w);
        const double r_pred = mode == EncoderMode::Memoryless
                                  ? (alpha * A[t] + 1.0 - alpha) * xhat_pred
                                  : (1.0 - alpha) * xhat_pred;
        const double xhat = xhat_pred + sched.gain[t] * (r - r_pred);
        const double err = x - xhat;
        const double c_d = err * err;
        const double biased = err - p.bias[t];
        const double c_e = biased * biased + p.theta[t] * m * m;
        blk_d[t].add(c_d);
        blk_e[t].add(c_e);
        traj_d += c_d;
        traj_e += c_e;
        if (t < n_stages - 1) {
          const double noise = std::sqrt(p.sigma_n2[t]) * gauss(rng);
          x = p.beta[t] * x + noise;
          xhat_pred = p.beta[t] * xhat;
        }
      }
      blk_avg_d.add(traj_d / static_cast<double>(n_stages));
      blk_avg_e.add(traj_e / static_cast<double>(n_stages));
    }
    for (std::size_t t = 0; t < n_stages; ++t) {
      st_d[t].sum += blk_d[t].sum;
      st_d[t].sum_sq += blk_d[t].sum_sq;
      st_e[t].sum += blk_e[t].sum;
      st_e[t].sum_sq += blk_e[t].sum_sq;
    }
    avg_d.sum += blk_avg_d.sum;
    avg_d.sum_sq += blk_avg_d.sum_sq;
    avg_e.sum += blk_avg_e.sum;
    avg_e.sum_sq += blk_avg_e.sum_sq;
  }
  SimResult res;
  res.n_samples = cfg.n_samples;
  res.mean_J_d = avg_d.mean(cfg.n_samples);
  res.se_J_d = avg_d.se(cfg.n_samples);
  res.mean_J_e = avg_e.mean(cfg.n_samples);
  res.se_J_e = avg_e.se(cfg.n_samples);
  for (std::size_t t = 0; t < n_stages; ++t) {
    res.stage_mean_J_d.push_back(st_d[t].mean(cfg.n_samples));
    res.stage_se_J_d.push_back(st_d[t].se(cfg.n_samples));
    res.stage_mean_J_e.push_back(st_e[t].mean(cfg.n_samples));
    res.stage_se_J_e.push_back(st_e[t].se(cfg.n_samples));
  }
  return res;
}

inline SimResult simulate_multi_stage(const MultiStageParams& p, EncoderMode mode,
                                      std::span<const double> A, const SimConfig& cfg) {
  return simulate_multi_stage(p, mode, A, table_optimal_schedule(p, A), cfg);
}

struct OracleResult {
  double alpha = 0.0;
  double K = 0.0;
  double L = 0.0;
  double J_d = 0.0;
};

// Exhaustive decoder search: scans alpha over [0, 1] on a grid and, for each
// alpha, applies the closed-form conditional minimizers of K and L (both 1-D
// quadratic problems). Independent of the case analysis in the best-response
// table. Ties resolve to the smallest alpha.
inline OracleResult brute_force_decoder_oracle(double A, double C, const GameParams& p,
                                               double grid_step) {
  validate(p);
  if (!(grid_step > 0.0)) {
    throw PreconditionError("grid_step must be > 0");
  }
  const auto steps = static_cast<long>(std::ceil(1.0 / grid_step));
  OracleResult best;
  best.J_d = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= steps; ++i) {
    const double alpha =
        (i == steps) ? 1.0 : std::min(static_cast<double>(i) * grid_step, 1.0);
    const double h = alpha * A + 1.0 - alpha;
    const double noise =
        alpha * alpha * p.sigma_v2 + (1.0 - alpha) * (1.0 - alpha) * p.sigma_w2;
    const double K = h * p.sigma_x2 / (h * h * p.sigma_x2 + noise);
    const double J = p.sigma_x2 * noise / (h * h * p.sigma_x2 + noise);
    if (J < best.J_d) {
      best = {alpha, K, -K * alpha * C, J};
    }
  }
  return best;
}

// Grid minimizer of the power-penalized estimation-error lower bound
//   g(P) = sigma_x2 / (P/sigma_v2 + sigma_x2/sigma_w2 + 1) + theta * P
// over P in [0, P_max]. Ties resolve to the smallest P.
inline double brute_force_encoder_power_oracle(const GameParams& p, double P_max,
                                               double grid_step) {
  validate(p);
  if (!(p.theta > 0.0)) {
    throw PreconditionError("theta must be > 0");
  }
  if (!(P_max > 0.0) || !(grid_step > 0.0)) {
    throw PreconditionError("P_max and grid_step must be > 0");
  }
  const auto steps = static_cast<long>(std::ceil(P_max / grid_step));
  double best_P = 0.0;
  double best_J = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= steps; ++i) {
    const double P =
        (i == steps) ? P_max : std::min(static_cast<double>(i) * grid_step, P_max);
    const double J =
        p.sigma_x2 / (P / p.sigma_v2 + p.sigma_x2 / p.sigma_w2 + 1.0) + p.theta * P;
    if (J < best_J) {
      best_J = J;
      best_P = P;
    }
  }
  return best_P;
}

}  // namespace siggame
