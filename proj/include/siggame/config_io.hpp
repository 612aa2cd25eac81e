#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "siggame/params.hpp"

// Configuration schema. Keys mirror the field names:
//   single-stage: sigma_x2, sigma_v2, sigma_w2, theta, bias
//   multi-stage:  n, beta, sigma_n2, sigma_x0_2, sigma_w2, sigma_v2, theta, bias
// Multi-stage per-stage keys accept either an array of the exact length or a
// scalar that is broadcast to every stage. bias defaults to zero.

namespace siggame {

inline void to_json(nlohmann::json& j, const GameParams& p) {
  j = nlohmann::json{{"sigma_x2", p.sigma_x2},
                     {"sigma_v2", p.sigma_v2},
                     {"sigma_w2", p.sigma_w2},
                     {"theta", p.theta},
                     {"bias", p.bias}};
}

inline void from_json(const nlohmann::json& j, GameParams& p) {
  j.at("sigma_x2").get_to(p.sigma_x2);
  j.at("sigma_v2").get_to(p.sigma_v2);
  j.at("sigma_w2").get_to(p.sigma_w2);
  j.at("theta").get_to(p.theta);
  p.bias = j.value("bias", 0.0);
}

namespace detail {

inline std::vector<double> stage_array(const nlohmann::json& j, const char* key,
                                       std::size_t length, const double* fallback) {
  if (!j.contains(key)) {
    if (fallback != nullptr || length == 0) {
      return std::vector<double>(length, fallback != nullptr ? *fallback : 0.0);
    }
    throw ValidationError(std::string("missing config key '") + key + "'");
  }
  const nlohmann::json& v = j.at(key);
  if (v.is_number()) {
    return std::vector<double>(length, v.get<double>());
  }
  return v.get<std::vector<double>>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const MultiStageParams& p) {
  j = nlohmann::json{{"n", p.n},
                     {"beta", p.beta},
                     {"sigma_n2", p.sigma_n2},
                     {"sigma_x0_2", p.sigma_x0_2},
                     {"sigma_w2", p.sigma_w2},
                     {"sigma_v2", p.sigma_v2},
                     {"theta", p.theta},
                     {"bias", p.bias}};
}

inline void from_json(const nlohmann::json& j, MultiStageParams& p) {
  j.at("n").get_to(p.n);
  if (p.n < 0) throw ValidationError("n must be >= 0");
  const auto n = static_cast<std::size_t>(p.n);
  const double zero = 0.0;
  p.beta = detail::stage_array(j, "beta", n, nullptr);
  p.sigma_n2 = detail::stage_array(j, "sigma_n2", n, nullptr);
  j.at("sigma_x0_2").get_to(p.sigma_x0_2);
  p.sigma_w2 = detail::stage_array(j, "sigma_w2", n + 1, nullptr);
  p.sigma_v2 = detail::stage_array(j, "sigma_v2", n + 1, nullptr);
  p.theta = detail::stage_array(j, "theta", n + 1, nullptr);
  p.bias = detail::stage_array(j, "bias", n + 1, &zero);
}

// A config holds a multi-stage instance iff it carries a horizon.
inline bool is_multi_stage_config(const nlohmann::json& j) { return j.contains("n"); }

}  // namespace siggame
