#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "siggame/params.hpp"
#include "siggame/single_stage.hpp"

namespace siggame {

enum class NashKind {
  InformativePositive,  // A > 0, both channels combined
  InformativeNegative,  // A < 0, encoder channel only
  NonInformative,       // A = 0, side channel only
};

inline const char* to_string(NashKind k) {
  switch (k) {
    case NashKind::InformativePositive: return "informative-positive";
    case NashKind::InformativeNegative: return "informative-negative";
    case NashKind::NonInformative: return "non-informative";
  }
  return "?";
}

struct NashEquilibrium {
  AffineEncoder encoder;
  AffineDecoder decoder;
  NashKind kind = NashKind::NonInformative;
  double fixed_point_residual = 0.0;
};

// Componentwise deviation of (enc, dec) under one best-response round over
// (A, C, K, L, alpha). Zero exactly at a Nash equilibrium.
inline double verify_fixed_point(const AffineEncoder& enc, const AffineDecoder& dec,
                                 const GameParams& p) {
  validate(p);
  if (!(p.theta > 0.0)) {
    throw PreconditionError("theta must be > 0");
  }
  const AffineEncoder enc_br = encoder_best_response(dec, p);
  const AffineDecoder dec_br = decoder_best_response(enc, p).decoder;
  return std::max({std::fabs(enc.A - enc_br.A), std::fabs(enc.C - enc_br.C),
                   std::fabs(dec.K - dec_br.K), std::fabs(dec.L - dec_br.L),
                   std::fabs(dec.alpha - dec_br.alpha)});
}

struct NashScan {
  std::vector<NashEquilibrium> equilibria;  // candidates that verified
  std::vector<NashEquilibrium> rejected;    // candidates that failed, with residuals
};

// Enumerates the affine Nash equilibria. The non-informative pair always
// exists; below the transmission threshold two informative candidates are
// constructed from the joint best-response algebra. Every candidate is run
// through verify_fixed_point and emitted only if the residual is within tol;
// failed candidates are reported in `rejected`.
inline NashScan scan_nash_equilibria(const GameParams& p, double tol = 1e-9) {
  validate(p);
  if (!(p.theta > 0.0)) {
    throw PreconditionError("theta must be > 0");
  }
  NashScan scan;
  auto consider = [&](const AffineEncoder& enc, const AffineDecoder& dec, NashKind kind) {
    NashEquilibrium eq{enc, dec, kind, verify_fixed_point(enc, dec, p)};
    if (eq.fixed_point_residual <= tol) {
      scan.equilibria.push_back(eq);
    } else {
      scan.rejected.push_back(eq);
    }
  };

  // Non-informative equilibrium, exists for every theta.
  consider(AffineEncoder{0.0, 0.0},
           AffineDecoder{p.sigma_x2 / (p.sigma_x2 + p.sigma_w2), 0.0, 0.0},
           NashKind::NonInformative);

  if (p.theta < transmission_threshold(p)) {
    // Positive-slope candidate: slope from the joint consistency equation,
    // decoder from the combining row, offsets C = -alpha*K*b/theta and
    // L = alpha^2*K^2*b/theta from the coupled offset equations.
    const double A2_pos = std::sqrt((1.0 / p.theta) * (p.sigma_v2 / p.sigma_x2)) -
                          p.sigma_v2 / p.sigma_w2 - p.sigma_v2 / p.sigma_x2;
    if (A2_pos > 0.0) {
      const double A = std::sqrt(A2_pos);
      const detail::TableEntry row = detail::decoder_table(A, p.sigma_x2, p.sigma_v2, p.sigma_w2);
      const double C = -row.alpha * row.K * p.bias / p.theta;
      const double L = row.alpha * row.alpha * row.K * row.K * p.bias / p.theta;
      consider(AffineEncoder{A, C}, AffineDecoder{row.K, L, row.alpha},
               NashKind::InformativePositive);
    }

    // Negative-slope candidate: alpha = 1, K carries the sign of A, and the
    // offsets solve L = -K*C jointly with the encoder response, giving
    // C = -K*b/theta and L = K^2*b/theta.
    const double A2_neg =
        std::sqrt(p.sigma_v2 / (p.theta * p.sigma_x2)) - p.sigma_v2 / p.sigma_x2;
    if (A2_neg > 0.0) {
      const double A = -std::sqrt(A2_neg);
      const double K = A * p.sigma_x2 / (A * A * p.sigma_x2 + p.sigma_v2);
      const double C = -K * p.bias / p.theta;
      const double L = K * K * p.bias / p.theta;
      consider(AffineEncoder{A, C}, AffineDecoder{K, L, 1.0}, NashKind::InformativeNegative);
    }
  }
  return scan;
}

inline std::vector<NashEquilibrium> nash_equilibria(const GameParams& p, double tol = 1e-9) {
  return scan_nash_equilibria(p, tol).equilibria;
}

struct IterationResult {
  AffineEncoder encoder;
  AffineDecoder decoder;
  bool converged = false;
  int iterations = 0;
  double last_change = 0.0;
  double residual = 0.0;  // fixed-point residual at the final iterate
  std::optional<NashKind> kind;
};

// Alternating best-response iteration from an initial strategy pair:
// decoder responds first, then the encoder. Stops when the componentwise
// change falls within tol or after max_iter rounds; non-convergence is
// reported, not thrown.
inline IterationResult best_response_iteration(AffineEncoder enc, AffineDecoder dec,
                                               const GameParams& p, int max_iter = 200,
                                               double tol = 1e-12) {
  validate(p);
  validate(enc);
  validate(dec);
  if (!(p.theta > 0.0)) {
    throw PreconditionError("theta must be > 0");
  }
  IterationResult res;
  double change = std::numeric_limits<double>::infinity();
  int iter = 0;
  while (iter < max_iter) {
    ++iter;
    const AffineDecoder dec_next = decoder_best_response(enc, p).decoder;
    const AffineEncoder enc_next = encoder_best_response(dec_next, p);
    change = std::max({std::fabs(dec_next.K - dec.K), std::fabs(dec_next.L - dec.L),
                       std::fabs(dec_next.alpha - dec.alpha), std::fabs(enc_next.A - enc.A),
                       std::fabs(enc_next.C - enc.C)});
    dec = dec_next;
    enc = enc_next;
    if (change <= tol) break;
  }
  res.encoder = enc;
  res.decoder = dec;
  res.iterations = iter;
  res.last_change = change;
  res.converged = change <= tol;
  res.residual = verify_fixed_point(enc, dec, p);
  if (res.converged) {
    if (enc.A > 1e-12) {
      res.kind = NashKind::InformativePositive;
    } else if (enc.A < -1e-12) {
      res.kind = NashKind::InformativeNegative;
    } else {
      res.kind = NashKind::NonInformative;
    }
  }
  return res;
}

}  // namespace siggame
