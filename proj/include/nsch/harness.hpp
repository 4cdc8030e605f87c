#pragma once

// Run orchestration: configuration, the sampling loop, verdict evaluation,
// resume, parameter sweeps.
//
// Exit codes (shared by every command):
//   0  all enabled checks pass and the run completed
//   1  the run completed but at least one enabled check failed
//   2  the solver stopped on a blow-up guard (structured record written)
//   3  configuration or infrastructure error
//
// Every run writes into its output directory:
//   series.ndjson        header + samples (+ resume/blowup markers)
//   verdicts.json        one entry per enabled check, plus the exit code
//   checkpoint_final.bin and optional periodic checkpoint_<step>.bin
//
// The environment variable NSCH_OUTPUT_DIR, when set and non-empty,
// overrides the configured output directory.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsch/checkpoint.hpp"
#include "nsch/initial_data.hpp"
#include "nsch/series_io.hpp"
#include "nsch/timestepper.hpp"

namespace nsch {

enum ExitCode : int {
  exit_pass = 0,
  exit_check_failed = 1,
  exit_blowup = 2,
  exit_config_error = 3,
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct CheckToggles {
  bool conservation = true;
  bool energy_law = true;
  bool apriori = true;
  bool decay = true;
  bool neg_energy = true;
};

struct RunConfig {
  int dim = 2;
  std::int64_t n = 64;
  ModelParams params;
  StepConfig step;
  PerturbationSpec perturbation;
  std::string mode = "well";  // "well" (smallness bracket) | "large" (literal)

  double t_end = 1.0;
  std::int64_t sample_every = 10;     // sample when step % sample_every == 0
  std::int64_t checkpoint_every = 0;  // 0: only the final checkpoint
  std::string output_dir = "out";
  double inject_mass_drift = 0.0;  // fault injection: adds drift*dt to rho

  CheckToggles checks;
  double decay_s = 1.0;   // decay claims use rates s and 2+s
  double decay_t0 = 1.0;  // envelope anchor time
  double neg_s = 1.0;     // order of the negative-index energy
  double neg_factor = 1.1;
  double energy_slack = 0.05;
  double conservation_tol = 1e-10;

  void validate() const {
    if (dim != 2 && dim != 3)
      throw std::invalid_argument("config: dim must be 2 or 3");
    if (n < 8) throw std::invalid_argument("config: n must be at least 8");
    params.validate();
    step.validate();
    perturbation.validate();
    if (mode != "well" && mode != "large")
      throw std::invalid_argument("config: mode must be 'well' or 'large'");
    if (!(t_end >= 0.0)) throw std::invalid_argument("config: t_end must be >= 0");
    if (sample_every < 1)
      throw std::invalid_argument("config: sample_every must be >= 1");
    if (checkpoint_every < 0)
      throw std::invalid_argument("config: checkpoint_every must be >= 0");
    if (output_dir.empty())
      throw std::invalid_argument("config: output_dir must not be empty");
    if (!(decay_s > 0.0 && decay_s < 1.5))
      throw std::invalid_argument("config: decay_s must lie in (0, 1.5)");
    if (!(decay_t0 >= 1.0))
      throw std::invalid_argument("config: decay_t0 must be >= 1");
    if (!(neg_s > 0.0 && neg_s < 1.5))
      throw std::invalid_argument("config: neg_s must lie in (0, 1.5)");
    if (!(neg_factor >= 1.0))
      throw std::invalid_argument("config: neg_factor must be >= 1");
    if (!(energy_slack >= 0.0))
      throw std::invalid_argument("config: energy_slack must be >= 0");
    if (!(conservation_tol > 0.0))
      throw std::invalid_argument("config: conservation_tol must be > 0");
  }
};

inline void to_json(json& j, const ModelParams& p) {
  j = json{{"rho_bar", p.rho_bar}, {"gamma", p.gamma}, {"p_coeff", p.p_coeff},
           {"nu0", p.nu0},         {"nu1", p.nu1},     {"lam0", p.lam0},
           {"eps", p.eps}};
}

inline void from_json(const json& j, ModelParams& p) {
  ModelParams d;
  p.rho_bar = j.value("rho_bar", d.rho_bar);
  p.gamma = j.value("gamma", d.gamma);
  p.p_coeff = j.value("p_coeff", d.p_coeff);
  p.nu0 = j.value("nu0", d.nu0);
  p.nu1 = j.value("nu1", d.nu1);
  p.lam0 = j.value("lam0", d.lam0);
  p.eps = j.value("eps", d.eps);
}

inline void to_json(json& j, const StepConfig& s) {
  j = json{{"dt", s.dt},
           {"adaptive", s.adaptive},
           {"cfl", s.cfl},
           {"dt_min", s.dt_min},
           {"dt_max", s.dt_max},
           {"implicit_phase", s.implicit_phase},
           {"implicit_viscous", s.implicit_viscous},
           {"rho_floor_frac", s.rho_floor_frac},
           {"stab_margin", s.stab_margin},
           {"ramp_rate", s.ramp_rate},
           {"theta_shift", s.theta_shift}};
}

inline void from_json(const json& j, StepConfig& s) {
  StepConfig d;
  s.dt = j.value("dt", d.dt);
  s.adaptive = j.value("adaptive", d.adaptive);
  s.cfl = j.value("cfl", d.cfl);
  s.dt_min = j.value("dt_min", d.dt_min);
  s.dt_max = j.value("dt_max", d.dt_max);
  s.implicit_phase = j.value("implicit_phase", d.implicit_phase);
  s.implicit_viscous = j.value("implicit_viscous", d.implicit_viscous);
  s.rho_floor_frac = j.value("rho_floor_frac", d.rho_floor_frac);
  s.stab_margin = j.value("stab_margin", d.stab_margin);
  s.ramp_rate = j.value("ramp_rate", d.ramp_rate);
  s.theta_shift = j.value("theta_shift", d.theta_shift);
}

inline void to_json(json& j, const PerturbationSpec& p) {
  j = json{{"delta", p.delta},
           {"seed", p.seed},
           {"k_min", p.k_min},
           {"k_max", p.k_max},
           {"base", p.base},
           {"stripe", p.stripe},
           {"stripe_width", p.stripe_width},
           {"neg_s_target", p.neg_s_target}};
}

inline void from_json(const json& j, PerturbationSpec& p) {
  PerturbationSpec d;
  p.delta = j.value("delta", d.delta);
  p.seed = j.value("seed", d.seed);
  p.k_min = j.value("k_min", d.k_min);
  p.k_max = j.value("k_max", d.k_max);
  p.base = j.value("base", d.base);
  p.stripe = j.value("stripe", d.stripe);
  p.stripe_width = j.value("stripe_width", d.stripe_width);
  p.neg_s_target = j.value("neg_s_target", d.neg_s_target);
}

inline void to_json(json& j, const CheckToggles& c) {
  j = json{{"conservation", c.conservation}, {"energy_law", c.energy_law},
           {"apriori", c.apriori},           {"decay", c.decay},
           {"neg_energy", c.neg_energy}};
}

inline void from_json(const json& j, CheckToggles& c) {
  CheckToggles d;
  c.conservation = j.value("conservation", d.conservation);
  c.energy_law = j.value("energy_law", d.energy_law);
  c.apriori = j.value("apriori", d.apriori);
  c.decay = j.value("decay", d.decay);
  c.neg_energy = j.value("neg_energy", d.neg_energy);
}

inline void to_json(json& j, const RunConfig& c) {
  j = json{{"grid", json{{"dim", c.dim}, {"n", c.n}}},
           {"params", c.params},
           {"step", c.step},
           {"perturbation", c.perturbation},
           {"mode", c.mode},
           {"run", json{{"t_end", c.t_end},
                        {"sample_every", c.sample_every},
                        {"checkpoint_every", c.checkpoint_every},
                        {"output_dir", c.output_dir},
                        {"inject_mass_drift", c.inject_mass_drift}}},
           {"checks", c.checks},
           {"check_params", json{{"decay_s", c.decay_s},
                                 {"decay_t0", c.decay_t0},
                                 {"neg_s", c.neg_s},
                                 {"neg_factor", c.neg_factor},
                                 {"energy_slack", c.energy_slack},
                                 {"conservation_tol", c.conservation_tol}}}};
}

inline void from_json(const json& j, RunConfig& c) {
  RunConfig d;
  if (j.contains("grid")) {
    c.dim = j["grid"].value("dim", d.dim);
    c.n = j["grid"].value("n", d.n);
  }
  c.params = j.value("params", d.params);
  c.step = j.value("step", d.step);
  c.perturbation = j.value("perturbation", d.perturbation);
  c.mode = j.value("mode", d.mode);
  if (j.contains("run")) {
    const json& r = j["run"];
    c.t_end = r.value("t_end", d.t_end);
    c.sample_every = r.value("sample_every", d.sample_every);
    c.checkpoint_every = r.value("checkpoint_every", d.checkpoint_every);
    c.output_dir = r.value("output_dir", d.output_dir);
    c.inject_mass_drift = r.value("inject_mass_drift", d.inject_mass_drift);
  }
  c.checks = j.value("checks", d.checks);
  if (j.contains("check_params")) {
    const json& r = j["check_params"];
    c.decay_s = r.value("decay_s", d.decay_s);
    c.decay_t0 = r.value("decay_t0", d.decay_t0);
    c.neg_s = r.value("neg_s", d.neg_s);
    c.neg_factor = r.value("neg_factor", d.neg_factor);
    c.energy_slack = r.value("energy_slack", d.energy_slack);
    c.conservation_tol = r.value("conservation_tol", d.conservation_tol);
  }
}

/// NSCH_OUTPUT_DIR, when set and non-empty, wins over the configured value.
inline std::string resolve_output_dir(const std::string& configured) {
  const char* env = std::getenv("NSCH_OUTPUT_DIR");
  if (env != nullptr && env[0] != '\0') return env;
  return configured;
}

/// Sets one scalar knob by its dotted configuration name (the sweep axis).
inline void apply_override(RunConfig& c, const std::string& key, double v) {
  auto as_i64 = [&] { return static_cast<std::int64_t>(std::llround(v)); };
  if (key == "grid.n") c.n = as_i64();
  else if (key == "params.rho_bar") c.params.rho_bar = v;
  else if (key == "params.gamma") c.params.gamma = v;
  else if (key == "params.p_coeff") c.params.p_coeff = v;
  else if (key == "params.nu0") c.params.nu0 = v;
  else if (key == "params.nu1") c.params.nu1 = v;
  else if (key == "params.lam0") c.params.lam0 = v;
  else if (key == "params.eps") c.params.eps = v;
  else if (key == "step.dt") c.step.dt = v;
  else if (key == "step.cfl") c.step.cfl = v;
  else if (key == "step.dt_min") c.step.dt_min = v;
  else if (key == "step.dt_max") c.step.dt_max = v;
  else if (key == "step.stab_margin") c.step.stab_margin = v;
  else if (key == "step.ramp_rate") c.step.ramp_rate = v;
  else if (key == "step.theta_shift") c.step.theta_shift = v;
  else if (key == "perturbation.delta") c.perturbation.delta = v;
  else if (key == "perturbation.seed")
    c.perturbation.seed = static_cast<std::uint64_t>(as_i64());
  else if (key == "perturbation.k_min") c.perturbation.k_min = static_cast<int>(as_i64());
  else if (key == "perturbation.k_max") c.perturbation.k_max = static_cast<int>(as_i64());
  else if (key == "perturbation.base") c.perturbation.base = v;
  else if (key == "perturbation.stripe_width") c.perturbation.stripe_width = v;
  else if (key == "perturbation.neg_s_target") c.perturbation.neg_s_target = v;
  else if (key == "run.t_end") c.t_end = v;
  else if (key == "run.sample_every") c.sample_every = as_i64();
  else if (key == "run.checkpoint_every") c.checkpoint_every = as_i64();
  else
    throw std::invalid_argument("unknown sweep axis: " + key);
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

/// Evaluates every enabled check on a sampled series.
inline std::vector<CheckReport> run_checks(const RunConfig& cfg,
                                           const std::vector<Sample>& samples) {
  std::vector<CheckReport> out;
  if (cfg.checks.conservation) {
    auto v = check_conservation(samples, cfg.conservation_tol);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (cfg.checks.energy_law)
    out.push_back(check_energy_law(samples, cfg.energy_slack));
  if (cfg.checks.apriori) {
    auto v = check_apriori(samples, cfg.perturbation.delta);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (cfg.checks.decay) {
    out.push_back(check_decay_low(samples, cfg.decay_s, cfg.decay_t0));
    out.push_back(check_decay_high(samples, cfg.decay_s, cfg.decay_t0));
    out.push_back(check_rate_ordering(samples, cfg.decay_t0));
  }
  if (cfg.checks.neg_energy)
    out.push_back(check_neg_energy(samples, cfg.neg_factor));
  return out;
}

inline bool all_pass(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

inline void write_verdicts(const std::filesystem::path& path,
                           const std::vector<CheckReport>& reports,
                           bool blowup, int exit_code) {
  json j{{"schema", series_schema},
         {"blowup", blowup},
         {"all_pass", all_pass(reports)},
         {"exit_code", exit_code},
         {"checks", reports}};
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot write verdicts: " + path.string());
  out << j.dump(2) << '\n';
}

/// Samples sorted by step index with duplicates removed (a crash-recovery
/// resume can legitimately re-emit step indices that were already on disk;
/// the recomputation is deterministic, so keeping the first copy is exact).
inline std::vector<Sample> canonical_samples(const SeriesData& sd) {
  std::vector<std::size_t> order(sd.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sd.steps[a] < sd.steps[b];
  });
  std::vector<Sample> out;
  out.reserve(order.size());
  std::uint64_t last = 0;
  bool have = false;
  for (std::size_t i : order) {
    if (have && sd.steps[i] == last) continue;
    out.push_back(sd.samples[i]);
    last = sd.steps[i];
    have = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The sampling loop
// ---------------------------------------------------------------------------

namespace detail {

/// Advances `st` to cfg.t_end, writing samples/checkpoints/verdicts into the
/// resolved output directory.  `step0` is the step index of `st` and
/// `diss0` its accumulated dissipation integral; `append_series` continues
/// an existing series (resume).
template <int D>
int run_loop(const RunConfig& cfg, State<D> st, std::uint64_t step0,
             double diss0, bool append_series,
             const std::string& resume_from) {
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  SeriesWriter w(dir / "series.ndjson", append_series);
  if (append_series)
    w.resume_marker(st.t, step0, resume_from);
  else
    w.header(json(cfg));

  std::uint64_t idx = step0;
  double last_dt = 0.0;
  double diss_integral = diss0;
  std::uint64_t last_sampled = idx + 1;  // sentinel: nothing sampled yet
  auto sample_now = [&] {
    Sample s = measure(st, cfg.params, cfg.neg_s);
    s.dt = last_dt;
    s.diss_integral = diss_integral;
    w.sample(idx, s);
    last_sampled = idx;
  };
  if (step0 == 0) sample_now();

  StepConfig sc = cfg.step;
  bool blew = false;
  const double t_eps = 1e-12 * std::max(1.0, cfg.t_end);
  const double dt_ramp0 =
      cfg.step.ramp_rate > 0.0 ? ramp_floor(st, cfg.params, cfg.step) : 0.0;
  try {
    while (st.t < cfg.t_end - t_eps) {
      double dt = cfg.step.adaptive ? adaptive_dt(st, cfg.params, cfg.step)
                                    : cfg.step.dt;
      if (cfg.step.ramp_rate > 0.0)
        dt = std::max(std::min(dt, dt_ramp0 + cfg.step.ramp_rate * st.t),
                      cfg.step.dt_min);
      if (cfg.step.adaptive) dt = dyadic_floor(dt, st.t);
      dt = std::min(dt, cfg.t_end - st.t);
      sc.dt = dt;
      State<D> next = step(st, cfg.params, sc);
      // midpoint-state dissipation: the quadrature consistent with the
      // trapezoidal treatment of the stiff part (see diss_lower_value)
      State<D> mid(st.grid());
      mid.t = 0.5 * (st.t + next.t);
      for (std::int64_t i = 0; i < st.grid()->size(); ++i) {
        mid.rho.v[i] = 0.5 * (st.rho.v[i] + next.rho.v[i]);
        mid.c.v[i] = 0.5 * (st.c.v[i] + next.c.v[i]);
        for (int a = 0; a < D; ++a)
          mid.m[a].v[i] = 0.5 * (st.m[a].v[i] + next.m[a].v[i]);
      }
      diss_integral += dt * diss_lower_value(mid, cfg.params);
      st = std::move(next);
      if (cfg.inject_mass_drift != 0.0)
        for (auto& v : st.rho.v) v += cfg.inject_mass_drift * dt;
      ++idx;
      last_dt = dt;
      if (idx % static_cast<std::uint64_t>(cfg.sample_every) == 0) sample_now();
      if (cfg.checkpoint_every > 0 &&
          idx % static_cast<std::uint64_t>(cfg.checkpoint_every) == 0)
        save_checkpoint(dir / ("checkpoint_" + std::to_string(idx) + ".bin"),
                        st, cfg.params, idx, diss_integral);
    }
  } catch (const BlowupError& e) {
    blew = true;
    // `st` is the last state that passed the guards.
    Sample s = measure(st, cfg.params, cfg.neg_s);
    json norms(s.norms);
    norms["energy_total"] = s.energy.total;
    w.blowup(e.t, e.what(), e.offending_value, norms);
  }
  if (!blew && last_sampled != idx) sample_now();
  save_checkpoint(dir / "checkpoint_final.bin", st, cfg.params, idx,
                  diss_integral);

  SeriesData sd = read_series(dir / "series.ndjson");
  auto reports = run_checks(cfg, canonical_samples(sd));
  const int code =
      blew ? exit_blowup : (all_pass(reports) ? exit_pass : exit_check_failed);
  write_verdicts(dir / "verdicts.json", reports, blew, code);
  return code;
}

template <int D>
State<D> initial_state(const RunConfig& cfg) {
  auto g = Grid<D>::make(cfg.n);
  if (cfg.mode == "large") return make_large_data(g, cfg.params, cfg.perturbation);
  return make_initial_data(g, cfg.params, cfg.perturbation);
}

/// Core of `run` with the output directory already resolved.
inline int run_resolved(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.dim == 2)
    return run_loop<2>(cfg, initial_state<2>(cfg), 0, 0.0, false, "");
  return run_loop<3>(cfg, initial_state<3>(cfg), 0, 0.0, false, "");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Fresh run from the configured initial data.
inline int cmd_run(RunConfig cfg) {
  cfg.output_dir = resolve_output_dir(cfg.output_dir);
  return detail::run_resolved(cfg);
}

/// Continues a checkpointed run to cfg.t_end, appending to the series in the
/// output directory.  Grid must match the configuration; the model
/// parameters are taken from the checkpoint (they define the trajectory).
inline int cmd_resume(RunConfig cfg, const std::filesystem::path& from) {
  cfg.output_dir = resolve_output_dir(cfg.output_dir);
  CheckpointInfo info = peek_checkpoint(from);
  if (info.dim != cfg.dim || info.n != cfg.n)
    throw std::invalid_argument(
        "resume: checkpoint grid " + std::to_string(info.dim) + "d n=" +
        std::to_string(info.n) + " does not match the configured grid");
  cfg.params = info.params;
  cfg.validate();
  if (cfg.dim == 2) {
    auto [st, i] = load_checkpoint<2>(from);
    return detail::run_loop<2>(cfg, std::move(st), i.step_index,
                               i.diss_integral, true, from.string());
  }
  auto [st, i] = load_checkpoint<3>(from);
  return detail::run_loop<3>(cfg, std::move(st), i.step_index,
                             i.diss_integral, true, from.string());
}

/// Re-evaluates the checks of an existing series without simulating.
/// Check parameters come from the series header when present (so the verdict
/// reproduces the run's own), else from `cfg`.
inline int cmd_check(RunConfig cfg,
                     const std::optional<std::string>& dir_flag = {}) {
  const std::filesystem::path dir =
      dir_flag ? std::filesystem::path(*dir_flag)
               : std::filesystem::path(resolve_output_dir(cfg.output_dir));
  SeriesData sd = read_series(dir / "series.ndjson");
  RunConfig eff = cfg;
  if (!sd.header.is_null() && sd.header.contains("config"))
    eff = sd.header["config"].get<RunConfig>();
  auto reports = run_checks(eff, canonical_samples(sd));
  const int code = sd.blowup
                       ? exit_blowup
                       : (all_pass(reports) ? exit_pass : exit_check_failed);
  write_verdicts(dir / "verdicts.json", reports, sd.blowup, code);
  return code;
}

/// Loads a checkpoint and prints its full measurement as JSON on stdout.
inline int cmd_norms(const std::filesystem::path& from, double neg_s,
                     std::ostream& os) {
  CheckpointInfo info = peek_checkpoint(from);
  json j;
  if (info.dim == 2) {
    auto [st, i] = load_checkpoint<2>(from);
    j = measure(st, i.params, neg_s);
  } else {
    auto [st, i] = load_checkpoint<3>(from);
    j = measure(st, i.params, neg_s);
  }
  j["step"] = info.step_index;
  j["n"] = info.n;
  j["dim"] = info.dim;
  os << j.dump(2) << '\n';
  return exit_pass;
}

namespace detail {

inline json stat_or_null(const CheckReport& r, const std::string& key) {
  for (const auto& [k, v] : r.stats)
    if (k == key) return num_or_null(v);
  return nullptr;
}

}  // namespace detail

/// Runs one member per axis value under <output_dir>/<axis>=<value>/ and
/// writes a summary row per member into <output_dir>/sweep.ndjson.  A member
/// that stops on a blow-up or a failed check still yields a row; an
/// infrastructure error aborts the sweep, keeping the rows written so far.
inline int cmd_sweep(RunConfig cfg, const std::string& axis,
                     const std::vector<double>& values) {
  if (values.empty())
    throw std::invalid_argument("sweep: need at least one value");
  cfg.output_dir = resolve_output_dir(cfg.output_dir);
  const std::filesystem::path base = cfg.output_dir;
  std::filesystem::create_directories(base);
  std::ofstream rows(base / "sweep.ndjson", std::ios::trunc);
  if (!rows)
    throw std::runtime_error("cannot write sweep summary in " + base.string());

  int worst = exit_pass;
  for (double v : values) {
    RunConfig member = cfg;
    apply_override(member, axis, v);
    member.output_dir =
        (base / (axis + "=" + json(v).dump())).string();
    const int code = detail::run_resolved(member);
    worst = std::max(worst, code);

    json row{{"kind", "member"},      {"axis", axis},
             {"value", v},            {"output_dir", member.output_dir},
             {"exit_code", code},     {"blowup", code == exit_blowup}};
    // pull headline constants out of the member's verdicts
    std::ifstream vf(std::filesystem::path(member.output_dir) /
                     "verdicts.json");
    if (vf) {
      json verd = json::parse(vf);
      row["all_pass"] = verd.value("all_pass", false);
      for (const auto& cj : verd.value("checks", json::array())) {
        CheckReport r = cj.get<CheckReport>();
        if (r.name == "apriori.bracket")
          row["bracket_ratio"] = detail::num_or_null(r.observed);
        else if (r.name == "decay.low")
          row["envelope_C_low"] = detail::stat_or_null(r, "envelope_C");
        else if (r.name == "decay.high")
          row["envelope_C_high"] = detail::stat_or_null(r, "envelope_C");
      }
    }
    rows << row.dump() << '\n';
    rows.flush();
  }
  return worst;
}

}  // namespace nsch
