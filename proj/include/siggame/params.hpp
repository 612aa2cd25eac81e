#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace siggame {

// Thrown when a problem instance violates one of its invariants. The message
// names the violated invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when an operation's mathematical precondition fails, e.g. theta == 0
// passed to a solver whose decision rule divides by theta.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Single-stage problem instance. Variances are stored as variances (sigma^2),
// never as standard deviations.
struct GameParams {
  double sigma_x2 = 1.0;  // source variance, > 0
  double sigma_v2 = 1.0;  // encoder-channel noise variance, > 0
  double sigma_w2 = 1.0;  // side-channel noise variance, > 0
  double theta = 0.0;     // soft power weight, >= 0 (solvers require > 0)
  double bias = 0.0;      // objective misalignment b

  friend bool operator==(const GameParams&, const GameParams&) = default;
};

// Encoder strategy m = A*x + C.
struct AffineEncoder {
  double A = 0.0;
  double C = 0.0;

  friend bool operator==(const AffineEncoder&, const AffineEncoder&) = default;
};

// Decoder strategy xhat = K*r + L applied to the combined observation
// r = alpha*y + (1 - alpha)*z.
struct AffineDecoder {
  double K = 0.0;
  double L = 0.0;
  double alpha = 0.0;  // channel combining ratio, in [0, 1]

  friend bool operator==(const AffineDecoder&, const AffineDecoder&) = default;
};

// Multi-stage problem instance. The source is the Gauss-Markov process
// x_{t+1} = beta_t * x_t + n_t for t = 0..n-1; channels and costs are
// per-stage for t = 0..n.
struct MultiStageParams {
  int n = 0;                     // horizon index; stages run t = 0..n
  std::vector<double> beta;      // length n
  std::vector<double> sigma_n2;  // process noise variances, length n, > 0
  double sigma_x0_2 = 1.0;       // initial source variance, > 0
  std::vector<double> sigma_w2;  // side-channel noise variances, length n+1, > 0
  std::vector<double> sigma_v2;  // encoder-channel noise variances, length n+1, > 0
  std::vector<double> theta;     // soft power weights, length n+1, > 0
  std::vector<double> bias;      // per-stage bias, length n+1

  friend bool operator==(const MultiStageParams&, const MultiStageParams&) = default;
};

// Which row of the decoder best-response table applied.
enum class DecoderCase {
  Combined = 1,     // A > 0: maximum-ratio combining of both channels
  SideOnly = 2,     // alpha = 0: decoder ignores the encoder channel
  EncoderOnly = 3,  // alpha = 1: decoder ignores the side channel
};

inline const char* to_string(DecoderCase c) {
  switch (c) {
    case DecoderCase::Combined: return "combined";
    case DecoderCase::SideOnly: return "side-only";
    case DecoderCase::EncoderOnly: return "encoder-only";
  }
  return "?";
}

// Solved equilibrium of the single-stage game, with the closed-form costs and
// the self-check flags recording which table case applied and whether the
// follower best-response consistency check passed.
struct EquilibriumReport {
  AffineEncoder encoder;
  AffineDecoder decoder;
  double J_e = 0.0;  // encoder expected cost
  double J_d = 0.0;  // decoder expected cost (estimation error)
  DecoderCase decoder_case = DecoderCase::SideOnly;
  bool transmitting = false;          // encoder slope is nonzero
  double fixed_point_residual = 0.0;  // decoder-side best-response deviation
  bool fixed_point_ok = false;
};

namespace detail {

[[noreturn]] inline void reject(const std::string& message) {
  throw ValidationError(message);
}

inline void require_positive(double value, const char* name) {
  if (!(std::isfinite(value) && value > 0.0)) {
    reject(std::string(name) + " must be > 0");
  }
}

inline void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    reject(std::string(name) + " must be finite");
  }
}

inline void require_length(std::size_t actual, std::size_t expected, const char* name,
                           const char* expected_label) {
  if (actual != expected) {
    reject(std::string(name) + " must have length " + expected_label + " (expected " +
           std::to_string(expected) + ", got " + std::to_string(actual) + ")");
  }
}

inline void require_all_positive(const std::vector<double>& values, const char* name) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(std::isfinite(values[i]) && values[i] > 0.0)) {
      reject(std::string(name) + " must be > 0 at every stage (" + name + "[" +
             std::to_string(i) + "] violates)");
    }
  }
}

inline void require_all_finite(const std::vector<double>& values, const char* name) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      reject(std::string(name) + " must be finite at every stage (" + name + "[" +
             std::to_string(i) + "] violates)");
    }
  }
}

}  // namespace detail

// Each validate(...) returns its argument when every invariant holds and
// throws ValidationError naming the first violated invariant otherwise.
inline const GameParams& validate(const GameParams& p) {
  detail::require_positive(p.sigma_x2, "sigma_x2");
  detail::require_positive(p.sigma_v2, "sigma_v2");
  detail::require_positive(p.sigma_w2, "sigma_w2");
  if (!(std::isfinite(p.theta) && p.theta >= 0.0)) {
    detail::reject("theta must be >= 0");
  }
  detail::require_finite(p.bias, "bias");
  return p;
}

inline const MultiStageParams& validate(const MultiStageParams& p) {
  if (p.n < 0) detail::reject("n must be >= 0");
  const auto n = static_cast<std::size_t>(p.n);
  detail::require_length(p.beta.size(), n, "beta", "n");
  detail::require_length(p.sigma_n2.size(), n, "sigma_n2", "n");
  detail::require_length(p.sigma_w2.size(), n + 1, "sigma_w2", "n+1");
  detail::require_length(p.sigma_v2.size(), n + 1, "sigma_v2", "n+1");
  detail::require_length(p.theta.size(), n + 1, "theta", "n+1");
  detail::require_length(p.bias.size(), n + 1, "bias", "n+1");
  detail::require_positive(p.sigma_x0_2, "sigma_x0_2");
  detail::require_all_finite(p.beta, "beta");
  detail::require_all_positive(p.sigma_n2, "sigma_n2");
  detail::require_all_positive(p.sigma_w2, "sigma_w2");
  detail::require_all_positive(p.sigma_v2, "sigma_v2");
  detail::require_all_positive(p.theta, "theta");
  detail::require_all_finite(p.bias, "bias");
  return p;
}

inline const AffineEncoder& validate(const AffineEncoder& e) {
  detail::require_finite(e.A, "encoder A");
  detail::require_finite(e.C, "encoder C");
  return e;
}

inline const AffineDecoder& validate(const AffineDecoder& d) {
  detail::require_finite(d.K, "decoder K");
  detail::require_finite(d.L, "decoder L");
  if (!(d.alpha >= 0.0 && d.alpha <= 1.0)) {
    detail::reject("alpha must be in [0, 1]");
  }
  return d;
}

}  // namespace siggame
