// Command-line front end: closed-form solvers, equilibrium enumeration,
// seeded simulation, and parameter sweeps with CSV/JSON report emission.
//
// Exit codes: 0 success, 2 config/parse error, 3 precondition violation,
// 4 verification failure (simulation verdicts and --verify cross-checks).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "siggame/config_io.hpp"
#include "siggame/monte_carlo.hpp"
#include "siggame/multi_stage.hpp"
#include "siggame/nash.hpp"
#include "siggame/params.hpp"
#include "siggame/single_stage.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

using nlohmann::json;

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

// Machine formats carry 12 significant digits; human tables carry 4.
std::string fmt12(double x) { return fmt("%.12g", x == 0.0 ? 0.0 : x); }
std::string fmt4(double x) { return fmt("%.4g", x == 0.0 ? 0.0 : x); }

double quant12(double x) {
  if (x == 0.0) return 0.0;
  return std::strtod(fmt12(x).c_str(), nullptr);
}

json quantized(const json& j) {
  json out = j;
  if (out.is_number_float()) {
    out = quant12(out.get<double>());
  } else if (out.is_array() || out.is_object()) {
    for (auto& item : out.items()) {
      item.value() = quantized(item.value());
    }
  }
  return out;
}

struct OutputOpts {
  std::string format = "human";
  std::string out_path;
};

void add_output_opts(CLI::App* cmd, OutputOpts* opts) {
  cmd->add_option("--format", opts->format, "Output format")
      ->check(CLI::IsMember({"human", "json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--out", opts->out_path, "Write the report to a file instead of stdout");
}

void emit(const OutputOpts& opts, const std::string& body) {
  if (opts.out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(opts.out_path, std::ios::binary);
  if (!f) {
    throw siggame::ValidationError("cannot open output file '" + opts.out_path + "'");
  }
  f << body;
}

json load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw siggame::ValidationError("cannot open config file '" + path + "'");
  }
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw siggame::ValidationError("config parse error in '" + path + "': " + e.what());
  }
}

// Single-stage parameters from an optional config file with flag overrides.
struct GameParamFlags {
  std::string config_path;
  std::optional<double> sigma_x2, sigma_v2, sigma_w2, theta, bias;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--sigma-x2", sigma_x2, "Source variance");
    cmd->add_option("--sigma-v2", sigma_v2, "Encoder-channel noise variance");
    cmd->add_option("--sigma-w2", sigma_w2, "Side-channel noise variance");
    cmd->add_option("--theta", theta, "Soft power weight");
    cmd->add_option("--bias", bias, "Objective misalignment b");
  }

  siggame::GameParams resolve() const {
    siggame::GameParams p;
    if (!config_path.empty()) {
      try {
        p = load_config_file(config_path).get<siggame::GameParams>();
      } catch (const json::exception& e) {
        throw siggame::ValidationError(std::string("config error: ") + e.what());
      }
    }
    if (sigma_x2) p.sigma_x2 = *sigma_x2;
    if (sigma_v2) p.sigma_v2 = *sigma_v2;
    if (sigma_w2) p.sigma_w2 = *sigma_w2;
    if (theta) p.theta = *theta;
    if (bias) p.bias = *bias;
    siggame::validate(p);
    return p;
  }
};

siggame::MultiStageParams load_multi_config(const std::string& path) {
  siggame::MultiStageParams p;
  try {
    p = load_config_file(path).get<siggame::MultiStageParams>();
  } catch (const json::exception& e) {
    throw siggame::ValidationError(std::string("config error: ") + e.what());
  }
  siggame::validate(p);
  return p;
}

json params_json(const siggame::GameParams& p) { return json(p); }

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

// ---------------------------------------------------------------------------
// single-stackelberg

struct SingleStackelbergCmd {
  GameParamFlags params;
  OutputOpts out;
  bool verify = false;
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 42;
  double grid_step = 1e-3;

  int run() const {
    Timer timer;
    const siggame::GameParams p = params.resolve();
    const siggame::EquilibriumReport eq = siggame::stackelberg_equilibrium(p);
    const double threshold = siggame::transmission_threshold(p);

    bool verify_ok = true;
    siggame::SimResult sim;
    siggame::OracleResult oracle;
    if (verify) {
      siggame::SimConfig cfg;
      cfg.n_samples = samples;
      cfg.seed = seed;
      sim = siggame::simulate_single_stage(eq.encoder, eq.decoder, p, cfg);
      oracle = siggame::brute_force_decoder_oracle(eq.encoder.A, eq.encoder.C, p, grid_step);
      verify_ok = std::fabs(sim.mean_J_d - eq.J_d) <= 3.0 * sim.se_J_d &&
                  std::fabs(sim.mean_J_e - eq.J_e) <= 3.0 * sim.se_J_e &&
                  std::fabs(oracle.J_d - eq.J_d) <= 1e-6;
    }

    if (out.format == "json") {
      json j;
      j["command"] = "single-stackelberg";
      j["params"] = params_json(p);
      j["result"] = {{"A", eq.encoder.A},
                     {"C", eq.encoder.C},
                     {"alpha", eq.decoder.alpha},
                     {"K", eq.decoder.K},
                     {"L", eq.decoder.L},
                     {"J_d", eq.J_d},
                     {"J_e", eq.J_e},
                     {"decoder_case", siggame::to_string(eq.decoder_case)},
                     {"transmitting", eq.transmitting},
                     {"threshold", threshold},
                     {"fixed_point_residual", eq.fixed_point_residual}};
      if (verify) {
        j["verify"] = {{"seed", seed},
                       {"samples", samples},
                       {"mc_J_d", sim.mean_J_d},
                       {"mc_se_J_d", sim.se_J_d},
                       {"mc_J_e", sim.mean_J_e},
                       {"mc_se_J_e", sim.se_J_e},
                       {"oracle_alpha", oracle.alpha},
                       {"oracle_J_d", oracle.J_d},
                       {"pass", verify_ok}};
      }
      j["provenance"] = {{"tool", "siggame"}, {"version", kToolVersion}};
      emit(out, quantized(j).dump(2) + "\n");
    } else if (out.format == "csv") {
      std::ostringstream csv;
      csv << "A,C,alpha,K,L,J_d,J_e\n";
      csv << fmt12(eq.encoder.A) << ',' << fmt12(eq.encoder.C) << ','
          << fmt12(eq.decoder.alpha) << ',' << fmt12(eq.decoder.K) << ','
          << fmt12(eq.decoder.L) << ',' << fmt12(eq.J_d) << ',' << fmt12(eq.J_e) << '\n';
      emit(out, csv.str());
    } else {
      std::ostringstream text;
      text << "single-stage Stackelberg equilibrium\n";
      text << "  sigma_x2=" << fmt4(p.sigma_x2) << " sigma_v2=" << fmt4(p.sigma_v2)
           << " sigma_w2=" << fmt4(p.sigma_w2) << " theta=" << fmt4(p.theta)
           << " bias=" << fmt4(p.bias) << "\n";
      text << "  A     = " << fmt4(eq.encoder.A) << "\n";
      text << "  C     = " << fmt4(eq.encoder.C) << "\n";
      text << "  alpha = " << fmt4(eq.decoder.alpha) << "\n";
      text << "  K     = " << fmt4(eq.decoder.K) << "\n";
      text << "  L     = " << fmt4(eq.decoder.L) << "\n";
      text << "  J_d   = " << fmt4(eq.J_d) << "\n";
      text << "  J_e   = " << fmt4(eq.J_e) << "\n";
      text << "  decoder case: " << siggame::to_string(eq.decoder_case)
           << ", threshold theta* = " << fmt4(threshold) << "\n";
      if (!eq.transmitting) {
        text << "  note: non-transmitting equilibrium (theta >= threshold)\n";
      }
      if (verify) {
        text << "  verify: mc J_d = " << fmt4(sim.mean_J_d) << " +/- " << fmt4(sim.se_J_d)
             << ", mc J_e = " << fmt4(sim.mean_J_e) << " +/- " << fmt4(sim.se_J_e)
             << ", oracle J_d = " << fmt4(oracle.J_d) << " -> "
             << (verify_ok ? "PASS" : "FAIL") << "\n";
      }
      text << "  elapsed: " << fmt4(timer.ms()) << " ms\n";
      emit(out, text.str());
    }
    return verify_ok ? 0 : 4;
  }
};

// ---------------------------------------------------------------------------
// multi-stackelberg

struct MultiStackelbergCmd {
  std::string config_path;
  OutputOpts out;

  int run() const {
    Timer timer;
    const siggame::MultiStageParams p = load_multi_config(config_path);
    const siggame::MultiStageEquilibrium eq = siggame::multistage_stackelberg(p);

    if (out.format == "json") {
      json stages = json::array();
      for (std::size_t t = 0; t < eq.stages.size(); ++t) {
        const auto& s = eq.stages[t];
        stages.push_back({{"t", t},
                          {"A", s.A},
                          {"alpha", s.alpha},
                          {"K", s.gain},
                          {"sigma_pred", s.sigma_pred},
                          {"J_d", s.J_d},
                          {"J_e", s.J_e},
                          {"decoder_case", siggame::to_string(s.which)},
                          {"transmitting", s.transmitting}});
      }
      json j;
      j["command"] = "multi-stackelberg";
      j["params"] = json(p);
      j["result"] = {{"stages", stages}, {"J_d_avg", eq.J_d_avg}, {"J_e_avg", eq.J_e_avg}};
      j["provenance"] = {{"tool", "siggame"}, {"version", kToolVersion}};
      emit(out, quantized(j).dump(2) + "\n");
    } else if (out.format == "csv") {
      std::ostringstream csv;
      csv << "t,A,alpha,K,sigma_pred,J_d,J_e\n";
      for (std::size_t t = 0; t < eq.stages.size(); ++t) {
        const auto& s = eq.stages[t];
        csv << t << ',' << fmt12(s.A) << ',' << fmt12(s.alpha) << ',' << fmt12(s.gain) << ','
            << fmt12(s.sigma_pred) << ',' << fmt12(s.J_d) << ',' << fmt12(s.J_e) << '\n';
      }
      csv << "# J_d_avg=" << fmt12(eq.J_d_avg) << " J_e_avg=" << fmt12(eq.J_e_avg) << '\n';
      emit(out, csv.str());
    } else {
      std::ostringstream text;
      text << "multi-stage Stackelberg equilibrium (n = " << p.n << ")\n";
      text << "  t        A    alpha        K  Sigma_pred      J_d      J_e\n";
      for (std::size_t t = 0; t < eq.stages.size(); ++t) {
        const auto& s = eq.stages[t];
        char row[160];
        std::snprintf(row, sizeof row, "  %zu %8.4g %8.4g %8.4g  %10.4g %8.4g %8.4g\n", t, s.A,
                      s.alpha, s.gain, s.sigma_pred, s.J_d, s.J_e);
        text << row;
      }
      text << "  averages: J_d = " << fmt4(eq.J_d_avg) << ", J_e = " << fmt4(eq.J_e_avg)
           << "\n";
      text << "  elapsed: " << fmt4(timer.ms()) << " ms\n";
      emit(out, text.str());
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// nash

struct NashCmd {
  GameParamFlags params;
  OutputOpts out;
  double tol = 1e-9;

  int run() const {
    Timer timer;
    const siggame::GameParams p = params.resolve();
    const siggame::NashScan scan = siggame::scan_nash_equilibria(p, tol);
    for (const auto& rej : scan.rejected) {
      std::cerr << "dropped candidate " << siggame::to_string(rej.kind)
                << " (fixed-point residual " << fmt4(rej.fixed_point_residual) << " > tol "
                << fmt4(tol) << ")\n";
    }

    auto eq_json = [&](const siggame::NashEquilibrium& e) {
      const siggame::Costs c = siggame::evaluate_costs(e.encoder, e.decoder, p);
      return json{{"kind", siggame::to_string(e.kind)},
                  {"A", e.encoder.A},
                  {"C", e.encoder.C},
                  {"K", e.decoder.K},
                  {"L", e.decoder.L},
                  {"alpha", e.decoder.alpha},
                  {"residual", e.fixed_point_residual},
                  {"J_d", c.J_d},
                  {"J_e", c.J_e}};
    };

    if (out.format == "json") {
      json eqs = json::array();
      for (const auto& e : scan.equilibria) eqs.push_back(eq_json(e));
      json rej = json::array();
      for (const auto& e : scan.rejected) rej.push_back(eq_json(e));
      json j;
      j["command"] = "nash";
      j["params"] = params_json(p);
      j["result"] = {{"count", scan.equilibria.size()}, {"equilibria", eqs}, {"rejected", rej}};
      j["provenance"] = {{"tool", "siggame"}, {"version", kToolVersion}};
      emit(out, quantized(j).dump(2) + "\n");
    } else if (out.format == "csv") {
      std::ostringstream csv;
      csv << "kind,A,C,K,L,alpha,residual,J_d,J_e\n";
      for (const auto& e : scan.equilibria) {
        const siggame::Costs c = siggame::evaluate_costs(e.encoder, e.decoder, p);
        csv << siggame::to_string(e.kind) << ',' << fmt12(e.encoder.A) << ','
            << fmt12(e.encoder.C) << ',' << fmt12(e.decoder.K) << ',' << fmt12(e.decoder.L)
            << ',' << fmt12(e.decoder.alpha) << ',' << fmt12(e.fixed_point_residual) << ','
            << fmt12(c.J_d) << ',' << fmt12(c.J_e) << '\n';
      }
      emit(out, csv.str());
    } else {
      std::ostringstream text;
      text << "affine Nash equilibria: " << scan.equilibria.size() << " found\n";
      for (const auto& e : scan.equilibria) {
        const siggame::Costs c = siggame::evaluate_costs(e.encoder, e.decoder, p);
        text << "  [" << siggame::to_string(e.kind) << "] A=" << fmt4(e.encoder.A)
             << " C=" << fmt4(e.encoder.C) << " K=" << fmt4(e.decoder.K)
             << " L=" << fmt4(e.decoder.L) << " alpha=" << fmt4(e.decoder.alpha)
             << " J_d=" << fmt4(c.J_d) << " J_e=" << fmt4(c.J_e)
             << " residual=" << fmt4(e.fixed_point_residual) << "\n";
      }
      text << "  elapsed: " << fmt4(timer.ms()) << " ms\n";
      emit(out, text.str());
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateCmd {
  std::string config_path;
  OutputOpts out;
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 42;
  std::int64_t block_size = 1 << 16;
  std::string mode = "innovations";
  std::optional<double> enc_A, enc_C, dec_K, dec_L, dec_alpha;

  struct Row {
    std::string stage;
    std::string quantity;
    double analytic;
    double empirical;
    double se;
  };

  int run() const {
    Timer timer;
    const json config = load_config_file(config_path);
    siggame::SimConfig cfg;
    cfg.n_samples = samples;
    cfg.seed = seed;
    cfg.block_size = block_size;
    siggame::validate(cfg);

    std::vector<Row> rows;
    std::string model;
    if (siggame::is_multi_stage_config(config)) {
      model = "multi-stage (" + mode + " encoder)";
      rows = run_multi(config, cfg);
    } else {
      model = "single-stage";
      rows = run_single(config, cfg);
    }

    bool all_pass = true;
    json table = json::array();
    std::ostringstream csv;
    std::ostringstream text;
    csv << "stage,quantity,analytic,empirical,se,z,pass\n";
    text << "simulation: " << model << " (samples = " << samples << ", seed = " << seed
         << ")\n";
    text << "  stage  quantity   analytic   empirical         se        z  verdict\n";
    for (const auto& r : rows) {
      const double z = r.se > 0.0 ? (r.empirical - r.analytic) / r.se : 0.0;
      const bool pass = std::fabs(r.empirical - r.analytic) <= 3.0 * r.se;
      all_pass = all_pass && pass;
      table.push_back({{"stage", r.stage},
                       {"quantity", r.quantity},
                       {"analytic", r.analytic},
                       {"empirical", r.empirical},
                       {"se", r.se},
                       {"z", z},
                       {"pass", pass}});
      csv << r.stage << ',' << r.quantity << ',' << fmt12(r.analytic) << ','
          << fmt12(r.empirical) << ',' << fmt12(r.se) << ',' << fmt12(z) << ','
          << (pass ? "1" : "0") << '\n';
      char line[200];
      std::snprintf(line, sizeof line, "  %5s  %8s %10.4g  %10.4g %10.4g %8.2f  %s\n",
                    r.stage.c_str(), r.quantity.c_str(), r.analytic, r.empirical, r.se, z,
                    pass ? "PASS" : "FAIL");
      text << line;
    }

    if (out.format == "json") {
      json j;
      j["command"] = "simulate";
      j["config"] = config;
      j["result"] = {{"rows", table}, {"pass", all_pass}};
      j["provenance"] = {{"tool", "siggame"},
                         {"version", kToolVersion},
                         {"seed", seed},
                         {"samples", samples},
                         {"block_size", block_size}};
      emit(out, quantized(j).dump(2) + "\n");
    } else if (out.format == "csv") {
      emit(out, csv.str());
    } else {
      text << "overall: " << (all_pass ? "PASS" : "FAIL") << "\n";
      text << "  elapsed: " << fmt4(timer.ms()) << " ms\n";
      emit(out, text.str());
    }
    return all_pass ? 0 : 4;
  }

  std::vector<Row> run_single(const json& config, const siggame::SimConfig& cfg) const {
    siggame::GameParams p = config.get<siggame::GameParams>();
    siggame::validate(p);
    siggame::AffineEncoder enc;
    siggame::AffineDecoder dec;
    double J_d, J_e;
    const bool explicit_strategy = enc_A.has_value() || dec_K.has_value();
    if (explicit_strategy) {
      if (!(enc_A && dec_K && dec_alpha)) {
        throw siggame::ValidationError(
            "explicit strategies need --enc-A, --dec-K and --dec-alpha");
      }
      enc = {*enc_A, enc_C.value_or(0.0)};
      dec = {*dec_K, dec_L.value_or(0.0), *dec_alpha};
      const siggame::Costs c = siggame::evaluate_costs(enc, dec, p);
      J_d = c.J_d;
      J_e = c.J_e;
    } else {
      const siggame::EquilibriumReport eq = siggame::stackelberg_equilibrium(p);
      enc = eq.encoder;
      dec = eq.decoder;
      J_d = eq.J_d;
      J_e = eq.J_e;
    }
    const siggame::SimResult sim = siggame::simulate_single_stage(enc, dec, p, cfg);
    return {{"", "J_d", J_d, sim.mean_J_d, sim.se_J_d},
            {"", "J_e", J_e, sim.mean_J_e, sim.se_J_e}};
  }

  std::vector<Row> run_multi(const json& config, const siggame::SimConfig& cfg) const {
    siggame::MultiStageParams p = config.get<siggame::MultiStageParams>();
    siggame::validate(p);
    const auto n_stages = static_cast<std::size_t>(p.n) + 1;

    std::vector<double> A;
    siggame::DecoderSchedule sched;
    std::vector<double> sigma_pred(n_stages), J_d(n_stages);
    if (config.contains("strategy")) {
      const json& st = config.at("strategy");
      A = siggame::detail::stage_array(st, "A", n_stages, nullptr);
      // Decoder defaults to the stage-wise best response to the given slopes.
      sched = siggame::table_optimal_schedule(p, A);
      if (st.contains("alpha")) {
        sched.alpha = siggame::detail::stage_array(st, "alpha", n_stages, nullptr);
      }
      if (st.contains("gain")) {
        sched.gain = siggame::detail::stage_array(st, "gain", n_stages, nullptr);
      }
      // Analytic reference that prices possibly suboptimal schedules exactly.
      const siggame::SchedulePerformance perf =
          siggame::schedule_performance(p, A, sched.alpha, sched.gain);
      sigma_pred = perf.sigma_pred;
      J_d = perf.sigma_upd;
    } else {
      const siggame::MultiStageEquilibrium eq = siggame::multistage_stackelberg(p);
      for (const auto& s : eq.stages) {
        A.push_back(s.A);
        sched.alpha.push_back(s.alpha);
        sched.gain.push_back(s.gain);
      }
      for (std::size_t t = 0; t < n_stages; ++t) {
        sigma_pred[t] = eq.stages[t].sigma_pred;
        J_d[t] = eq.stages[t].J_d;
      }
    }

    const bool innovations = mode == "innovations";
    const siggame::EncoderMode enc_mode =
        innovations ? siggame::EncoderMode::Innovations : siggame::EncoderMode::Memoryless;
    const siggame::SimResult sim = siggame::simulate_multi_stage(p, enc_mode, A, sched, cfg);

    // Analytic encoder cost: message power is A^2 * Sigma_{t|t-1} for the
    // innovations encoder and A^2 * Var(x_t) for the memoryless one.
    std::vector<double> var_x(n_stages);
    double vx = p.sigma_x0_2;
    for (std::size_t t = 0; t < n_stages; ++t) {
      var_x[t] = vx;
      if (t + 1 < n_stages) vx = p.beta[t] * p.beta[t] * vx + p.sigma_n2[t];
    }
    std::vector<Row> rows;
    for (std::size_t t = 0; t < n_stages; ++t) {
      const double power = A[t] * A[t] * (innovations ? sigma_pred[t] : var_x[t]);
      const double J_e = J_d[t] + p.theta[t] * power + p.bias[t] * p.bias[t];
      rows.push_back({std::to_string(t), "J_d", J_d[t], sim.stage_mean_J_d[t],
                      sim.stage_se_J_d[t]});
      rows.push_back({std::to_string(t), "J_e", J_e, sim.stage_mean_J_e[t],
                      sim.stage_se_J_e[t]});
    }
    return rows;
  }
};

// ---------------------------------------------------------------------------
// sweep

struct SweepCmd {
  GameParamFlags params;
  OutputOpts out;
  std::string param = "theta";
  double from = 0.0;
  double to = 0.0;
  int steps = 0;

  int run() const {
    siggame::GameParams base = params.resolve();
    if (steps < 1) {
      throw siggame::ValidationError("--steps must be >= 1");
    }
    std::ostringstream csv;
    csv << param << ",A,alpha,K,J_d,J_e,nash_count\n";
    for (int i = 0; i <= steps; ++i) {
      const double value = from + (to - from) * static_cast<double>(i) / steps;
      siggame::GameParams p = base;
      if (param == "sigma_x2") p.sigma_x2 = value;
      else if (param == "sigma_v2") p.sigma_v2 = value;
      else if (param == "sigma_w2") p.sigma_w2 = value;
      else if (param == "theta") p.theta = value;
      else if (param == "bias") p.bias = value;
      siggame::validate(p);
      const siggame::EquilibriumReport eq = siggame::stackelberg_equilibrium(p);
      const std::size_t nash_count = siggame::nash_equilibria(p).size();
      csv << fmt12(value) << ',' << fmt12(eq.encoder.A) << ',' << fmt12(eq.decoder.alpha)
          << ',' << fmt12(eq.decoder.K) << ',' << fmt12(eq.J_d) << ',' << fmt12(eq.J_e) << ','
          << nash_count << '\n';
    }
    emit(out, csv.str());
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic Gaussian signaling-game solver and simulator"};
  app.require_subcommand(1);

  SingleStackelbergCmd single_cmd;
  auto* single = app.add_subcommand("single-stackelberg",
                                    "Closed-form single-stage Stackelberg equilibrium");
  single_cmd.params.add_to(single);
  add_output_opts(single, &single_cmd.out);
  single->add_flag("--verify", single_cmd.verify,
                   "Cross-check the closed form against Monte Carlo and the grid oracle");
  single->add_option("--samples", single_cmd.samples, "Monte Carlo samples for --verify");
  single->add_option("--seed", single_cmd.seed, "Monte Carlo seed for --verify");
  single->add_option("--grid-step", single_cmd.grid_step, "Oracle grid step for --verify");

  MultiStackelbergCmd multi_cmd;
  auto* multi = app.add_subcommand("multi-stackelberg",
                                   "Forward-recursive multi-stage Stackelberg equilibrium");
  multi->add_option("--config", multi_cmd.config_path, "JSON config file")->required();
  add_output_opts(multi, &multi_cmd.out);

  NashCmd nash_cmd;
  auto* nash = app.add_subcommand("nash", "Enumerate and verify the affine Nash equilibria");
  nash_cmd.params.add_to(nash);
  add_output_opts(nash, &nash_cmd.out);
  nash->add_option("--tol", nash_cmd.tol, "Fixed-point residual tolerance");

  SimulateCmd sim_cmd;
  auto* sim = app.add_subcommand("simulate",
                                 "Seeded Monte Carlo comparison against the closed forms");
  sim->add_option("--config", sim_cmd.config_path, "JSON config file (single or multi-stage)")
      ->required();
  add_output_opts(sim, &sim_cmd.out);
  sim->add_option("--samples", sim_cmd.samples, "Sample count");
  sim->add_option("--seed", sim_cmd.seed, "RNG seed");
  sim->add_option("--block-size", sim_cmd.block_size, "Samples per deterministic block");
  sim->add_option("--mode", sim_cmd.mode, "Multi-stage encoder mode")
      ->check(CLI::IsMember({"memoryless", "innovations"}));
  sim->add_option("--enc-A", sim_cmd.enc_A, "Explicit encoder slope (single-stage)");
  sim->add_option("--enc-C", sim_cmd.enc_C, "Explicit encoder offset (single-stage)");
  sim->add_option("--dec-K", sim_cmd.dec_K, "Explicit decoder gain (single-stage)");
  sim->add_option("--dec-L", sim_cmd.dec_L, "Explicit decoder offset (single-stage)");
  sim->add_option("--dec-alpha", sim_cmd.dec_alpha, "Explicit combining ratio (single-stage)");

  SweepCmd sweep_cmd;
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep emitting CSV plot data");
  sweep_cmd.params.add_to(sweep);
  add_output_opts(sweep, &sweep_cmd.out);
  sweep->add_option("--param", sweep_cmd.param, "Swept parameter")
      ->check(CLI::IsMember({"sigma_x2", "sigma_v2", "sigma_w2", "theta", "bias"}));
  sweep->add_option("--from", sweep_cmd.from, "Sweep start")->required();
  sweep->add_option("--to", sweep_cmd.to, "Sweep end")->required();
  sweep->add_option("--steps", sweep_cmd.steps, "Number of sweep intervals")->required();

  int rc = 0;
  single->callback([&]() { rc = single_cmd.run(); });
  multi->callback([&]() { rc = multi_cmd.run(); });
  nash->callback([&]() { rc = nash_cmd.run(); });
  sim->callback([&]() { rc = sim_cmd.run(); });
  sweep->callback([&]() { rc = sweep_cmd.run(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const siggame::PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 3;
  } catch (const siggame::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
