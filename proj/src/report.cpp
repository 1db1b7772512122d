#include "enkbf/report.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "enkbf/format.hpp"

namespace enkbf {

namespace {

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::string scheme_name(StepScheme s) {
  return s == StepScheme::DSI ? "dsi" : "euler";
}

std::string schedule_name(ScheduleKind k) {
  return k == ScheduleKind::Uniform ? "uniform" : "doubling";
}

}  // namespace

void write_diagnostics_csv(const std::string& path,
                           const std::vector<CycleDiagnostics>& diagnostics) {
  auto out = open_or_throw(path);
  out << "cycle,rmse_a,rmse_b,spread,beta,delta_mean,failed\n";
  for (const auto& d : diagnostics) {
    out << d.cycle << ',' << to_shortest(d.rmse_a) << ','
        << to_shortest(d.rmse_b) << ',' << to_shortest(d.spread) << ','
        << to_shortest(d.beta) << ',' << to_shortest(d.delta_mean) << ','
        << (d.failed ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
  auto out = open_or_throw(path);
  out << "param_name,param_value,rmse_mean,rmse_std,spread_mean,delta_mean,"
         "failures\n";
  for (const auto& r : rows) {
    out << r.param_name << ',' << to_shortest(r.param_value) << ','
        << to_shortest(r.rmse_mean) << ',' << to_shortest(r.rmse_std) << ','
        << to_shortest(r.spread_mean) << ',' << to_shortest(r.delta_mean)
        << ',' << r.failures << '\n';
  }
}

void write_ecdf_csv(const std::string& path,
                    const std::vector<std::pair<double, double>>& ecdf) {
  auto out = open_or_throw(path);
  out << "beta,ecdf\n";
  for (const auto& [beta, f] : ecdf) {
    out << to_shortest(beta) << ',' << to_shortest(f) << '\n';
  }
}

void write_inflation_fields_csv(
    const std::string& path,
    const std::vector<std::tuple<long, int, double>>& fields) {
  auto out = open_or_throw(path);
  out << "cycle,gridpoint,delta\n";
  for (const auto& [cycle, gridpoint, delta] : fields) {
    out << cycle << ',' << gridpoint << ',' << to_shortest(delta) << '\n';
  }
}

std::string summary_json_string(const RunSummary& summary,
                                const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["rmse_mean"] = summary.rmse_mean;
  j["rmse_std"] = summary.rmse_std;
  j["rmse_b_mean"] = summary.rmse_b_mean;
  j["spread_mean"] = summary.spread_mean;
  j["spread_std"] = summary.spread_std;
  j["delta_mean"] = summary.delta_mean;
  j["failures"] = summary.failures;
  j["cycles_used"] = summary.cycles_used;
  j["wall_seconds"] = summary.wall_seconds;
  j["aborted"] = summary.aborted;
  if (summary.aborted) j["abort_reason"] = summary.abort_reason;

  nlohmann::ordered_json c;
  c["model"] = cfg.model.kind == ModelKind::Lorenz63 ? "l63" : "l96";
  c["dt"] = cfg.model.dt;
  if (cfg.model.kind == ModelKind::Lorenz96) {
    c["n"] = cfg.model.n;
    c["forcing"] = cfg.model.forcing;
  }
  c["obs_interval"] = cfg.obs_interval;
  c["observe_all"] = cfg.observe_all;
  c["obs_variance"] = cfg.obs_variance;
  c["ensemble_size"] = cfg.ensemble_size;
  c["filter"] = filter_kind_name(cfg.filter);
  c["scheme"] = scheme_name(cfg.scheme);
  c["schedule"] = schedule_name(cfg.schedule_kind);
  c["steps"] = cfg.pseudo_steps;
  c["mean_mode"] =
      cfg.mean_mode == MeanUpdateMode::PerStep ? "per_step" : "final_gain";
  c["localize"] = cfg.localize;
  if (cfg.localize) c["localization_radius"] = cfg.localization_radius;
  c["inflation_mode"] =
      cfg.inflation_mode == InflationMode::Fixed ? "fixed" : "adaptive";
  c["fixed_delta"] = cfg.fixed_delta;
  c["cycles"] = cfg.cycles;
  c["spinup"] = cfg.spinup;
  c["seed"] = cfg.seed;
  j["config"] = std::move(c);
  return j.dump(2) + "\n";
}

void write_summary_json(const std::string& path, const RunSummary& summary,
                        const ExperimentConfig& cfg) {
  auto out = open_or_throw(path);
  out << summary_json_string(summary, cfg);
}

}  // namespace enkbf
