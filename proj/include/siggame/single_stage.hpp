#pragma once

#include <algorithm>
#include <cmath>

#include "siggame/params.hpp"

namespace siggame {

namespace detail {

struct TableEntry {
  double alpha;
  double K;
  double J_d;
  DecoderCase which;
};

// Closed-form decoder best response to a linear encoder with slope A.
// var_x is the prior variance the decoder faces: sigma_x^2 in the single-stage
// game and the predicted variance Sigma_{t|t-1} in the multi-stage one.
//
// For A >= 0 the optimum blends both channels (maximum-ratio combining); for
// A < 0 the interior optimum is infeasible and the decoder picks the better
// endpoint. Ties at the endpoint boundary resolve to the side channel, and the
// A >= 0 row reduces to the side-only row exactly at A = 0.
inline TableEntry decoder_table(double A, double var_x, double sigma_v2, double sigma_w2) {
  if (A >= 0.0) {
    const double alpha = A * sigma_w2 / (A * sigma_w2 + sigma_v2);
    const double K = (A * var_x * sigma_w2 + var_x * sigma_v2) /
                     (A * A * var_x * sigma_w2 + var_x * sigma_v2 + sigma_w2 * sigma_v2);
    const double J = var_x * sigma_w2 * sigma_v2 /
                     ((A * A * sigma_w2 + sigma_v2) * var_x + sigma_w2 * sigma_v2);
    return {alpha, K, J, DecoderCase::Combined};
  }
  if (A >= -std::sqrt(sigma_v2 / sigma_w2)) {
    const double K = var_x / (var_x + sigma_w2);
    const double J = var_x * sigma_w2 / (var_x + sigma_w2);
    return {0.0, K, J, DecoderCase::SideOnly};
  }
  const double K = A * var_x / (A * A * var_x + sigma_v2);
  const double J = var_x * sigma_v2 / (A * A * var_x + sigma_v2);
  return {1.0, K, J, DecoderCase::EncoderOnly};
}

// Power weight above which the informative slope collapses to zero at a stage
// with prior variance var_x.
inline double stage_threshold(double var_x, double sigma_v2, double sigma_w2) {
  const double g = var_x / sigma_w2 + 1.0;
  return var_x / (sigma_v2 * g * g);
}

struct StageSolution {
  double A;   // nonnegative root of A2
  double A2;
  double alpha;
  double gain;
  double J_d;
  double J_e;
  DecoderCase which;
  bool transmitting;
};

// Leader decision rule for one stage. Shared by the single-stage solver
// (var_x = sigma_x^2) and the forward multi-stage recursion
// (var_x = Sigma_{t|t-1}), so the horizon-0 reduction is bit-exact.
inline StageSolution solve_stage(double var_x, double sigma_v2, double sigma_w2, double theta,
                                 double bias) {
  if (!(theta > 0.0)) {
    throw PreconditionError("theta must be > 0 (the equilibrium decision rule divides by theta)");
  }
  double A2 = 0.0;
  if (theta < stage_threshold(var_x, sigma_v2, sigma_w2)) {
    A2 = sigma_v2 / std::sqrt(theta * var_x * sigma_v2) -
         (sigma_v2 / var_x) * (var_x / sigma_w2 + 1.0);
    A2 = std::max(A2, 0.0);  // rounding can graze the A^2 >= 0 boundary
  }
  const double A = std::sqrt(A2);
  const TableEntry row = decoder_table(A, var_x, sigma_v2, sigma_w2);
  const double J_e = row.J_d + theta * A2 * var_x + bias * bias;
  return {A, A2, row.alpha, row.K, row.J_d, J_e, row.which, A2 > 0.0};
}

}  // namespace detail

struct DecoderResponse {
  AffineDecoder decoder;
  double J_d;
  DecoderCase which;
};

// Optimal affine decoder against the affine encoder m = A*x + C. The offset
// subtracts the known mean alpha*C of the combined observation, so J_d does
// not depend on C.
inline DecoderResponse decoder_best_response(const AffineEncoder& enc, const GameParams& p) {
  validate(p);
  validate(enc);
  const detail::TableEntry row = detail::decoder_table(enc.A, p.sigma_x2, p.sigma_v2, p.sigma_w2);
  const double L = -row.K * row.alpha * enc.C;
  return {AffineDecoder{row.K, L, row.alpha}, row.J_d, row.which};
}

// Affine minimizer of the encoder cost against a fixed affine decoder:
//   A = alpha*K*(1 - (1-alpha)*K) / (alpha^2*K^2 + theta)
//   C = -alpha*K*(L + b) / (alpha^2*K^2 + theta)
inline AffineEncoder encoder_best_response(const AffineDecoder& dec, const GameParams& p) {
  validate(p);
  validate(dec);
  const double aK = dec.alpha * dec.K;
  const double denom = aK * aK + p.theta;
  if (!(denom > 0.0)) {
    throw PreconditionError(
        "alpha^2 K^2 + theta must be > 0 (the encoder cost has no unique minimizer)");
  }
  const double A = aK * (1.0 - (1.0 - dec.alpha) * dec.K) / denom;
  const double C = -aK * (dec.L + p.bias) / denom;
  return {A, C};
}

struct Costs {
  double J_e;
  double J_d;
};

// Exact expected costs of an arbitrary affine strategy pair; no simulation.
inline Costs evaluate_costs(const AffineEncoder& enc, const AffineDecoder& dec,
                            const GameParams& p) {
  validate(p);
  validate(enc);
  validate(dec);
  const double h = dec.alpha * enc.A + 1.0 - dec.alpha;
  const double err_gain = 1.0 - h * dec.K;
  const double noise = dec.alpha * dec.alpha * dec.K * dec.K * p.sigma_v2 +
                       (1.0 - dec.alpha) * (1.0 - dec.alpha) * dec.K * dec.K * p.sigma_w2;
  const double mean_shift = dec.alpha * dec.K * enc.C + dec.L;
  const double J_d = err_gain * err_gain * p.sigma_x2 + noise + mean_shift * mean_shift;
  const double biased = mean_shift + p.bias;
  const double power = enc.A * enc.A * p.sigma_x2 + enc.C * enc.C;
  const double J_e =
      err_gain * err_gain * p.sigma_x2 + noise + biased * biased + p.theta * power;
  return {J_e, J_d};
}

// Information-theoretic lower bound on the estimation error when the
// transmitted message has power P. Achieved iff both players use linear
// strategies.
inline double estimation_error_lower_bound(double power, const GameParams& p) {
  validate(p);
  if (!(power >= 0.0)) {
    throw PreconditionError("message power P must be >= 0");
  }
  return p.sigma_x2 / (power / p.sigma_v2 + p.sigma_x2 / p.sigma_w2 + 1.0);
}

// Power weight above which the Stackelberg encoder stops transmitting.
inline double transmission_threshold(const GameParams& p) {
  validate(p);
  return detail::stage_threshold(p.sigma_x2, p.sigma_v2, p.sigma_w2);
}

// Stackelberg equilibrium of the single-stage game. The encoder commits to
// m = A*x with the nonnegative root A; the decoder best-responds. Requires
// theta > 0.
inline EquilibriumReport stackelberg_equilibrium(const GameParams& p) {
  validate(p);
  const detail::StageSolution s =
      detail::solve_stage(p.sigma_x2, p.sigma_v2, p.sigma_w2, p.theta, p.bias);
  EquilibriumReport rep;
  rep.encoder = {s.A, 0.0};
  rep.decoder = {s.gain, 0.0, s.alpha};
  rep.J_d = s.J_d;
  rep.J_e = s.J_e;
  rep.decoder_case = s.which;
  rep.transmitting = s.transmitting;
  // Follower consistency: the reported decoder must be the exact best
  // response to the reported encoder.
  const DecoderResponse br = decoder_best_response(rep.encoder, p);
  rep.fixed_point_residual = std::max({std::fabs(br.decoder.K - rep.decoder.K),
                                       std::fabs(br.decoder.L - rep.decoder.L),
                                       std::fabs(br.decoder.alpha - rep.decoder.alpha)});
  rep.fixed_point_ok = rep.fixed_point_residual <= 1e-9;
  return rep;
}

}  // namespace siggame
