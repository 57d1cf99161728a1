#include "ridesim/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ridesim/csv.hpp"
#include "ridesim/errors.hpp"
#include "ridesim/svg.hpp"

namespace ridesim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw ConfigError("failed while writing " + path.string());
}

std::string calibration_csv(const CalibrationResult& result, const std::string& digest,
                            std::uint64_t master_seed) {
  std::string s = "# config_digest=" + digest + " seed=" + std::to_string(master_seed) + "\n";
  s += "scope,run_index,seed,n_offers,n_accepts,acceptance_rate\n";
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    const auto& r = result.runs[i];
    const double rate =
        r.offers > 0 ? static_cast<double>(r.accepts) / static_cast<double>(r.offers) : 0.0;
    s += "run," + std::to_string(i) + ',' + std::to_string(r.seed) + ',' +
         std::to_string(r.offers) + ',' + std::to_string(r.accepts) + ',' + fmt_double(rate) + '\n';
  }
  s += "pooled,,," + std::to_string(result.total_offers) + ',' +
       std::to_string(result.total_accepts) + ',' + fmt_double(result.pooled) + '\n';
  return s;
}

bool scenario_has_random_drivers(const ScenarioConfig& sc, double share) {
  return std::lround(share * sc.n_drivers) < sc.n_drivers;
}

// Calibrates when the scenario will field random drivers and no probability
// is pinned. Returns the result when calibration actually ran.
std::optional<CalibrationResult> resolve_random_prob(ScenarioConfig& sc, const RoadGraph& graph,
                                                     const RunConfig& cfg, bool needed) {
  if (!needed || sc.random_accept_prob) return std::nullopt;
  const auto seeds = calibration_seeds(sc.master_seed, cfg.calibration_runs);
  CalibrationResult result = calibrate(sc, graph, seeds);
  sc.random_accept_prob = result.pooled;
  std::printf("calibrated random_accept_prob = %s (%ld offers over %d runs)\n",
              fmt_double(result.pooled).c_str(), result.total_offers, cfg.calibration_runs);
  return result;
}

std::string driver_distributions_csv(const SweepResult& sweep, const std::vector<double>& shares,
                                     const std::string& digest, std::uint64_t master_seed) {
  std::string s = "# config_digest=" + digest + " seed=" + std::to_string(master_seed) + "\n";
  s += "share,replication,driver_id,class,income_eur,idle_s,enroute_s,inservice_s,n_trips\n";
  const double share = shares[static_cast<std::size_t>(sweep.mid_share_index)];
  for (std::size_t rep = 0; rep < sweep.mid_outputs.size(); ++rep) {
    for (const auto& d : sweep.mid_outputs[rep].drivers) {
      s += fmt_double(share) + ',' + std::to_string(rep) + ',' + std::to_string(d.id) + ',' +
           policy_name(d.policy) + ',' + fmt_double(d.income_eur) + ',' + fmt_double(d.idle_s) +
           ',' + fmt_double(d.enroute_s) + ',' + fmt_double(d.inservice_s) + ',' +
           std::to_string(d.n_trips) + '\n';
    }
  }
  return s;
}

// per-share replication means of one metric/class, for plotting
PlotSeries mean_series(std::span<const KpiSummary> summaries, const char* label,
                       const char* colour, AgentClass cls,
                       const StatBlock* (*get)(const KpiSummary&, std::size_t)) {
  std::map<double, std::pair<double, long>> acc;
  for (const auto& s : summaries) {
    const StatBlock* b = get(s, static_cast<std::size_t>(cls));
    if (b->n == 0) continue;
    auto& slot = acc[s.behavioural_share];
    slot.first += b->mean;
    slot.second += 1;
  }
  PlotSeries series;
  series.label = label;
  series.colour = colour;
  for (const auto& [share, sum] : acc)
    series.points.emplace_back(share, sum.first / static_cast<double>(sum.second));
  return series;
}

const StatBlock* plot_income(const KpiSummary& s, std::size_t c) { return &s.income[c]; }
const StatBlock* plot_waiting(const KpiSummary& s, std::size_t c) { return &s.waiting[c]; }

}  // namespace

int cmd_run(const RunConfig& config, const CommandOptions& options) {
  const auto start = Clock::now();
  const RoadGraph graph = build_graph(config);
  ScenarioConfig sc = config.scenario;
  const std::uint64_t seed = options.seed.value_or(sc.master_seed);

  resolve_random_prob(sc, graph, config,
                      scenario_has_random_drivers(sc, sc.behavioural_share));

  SimOutput out = run(sc, graph, seed);
  out.config_digest = config.digest;

  write_file(options.out / "trips.csv", out.trips_csv());
  write_file(options.out / "drivers.csv", out.drivers_csv());
  write_file(options.out / "offers.csv", out.offers_csv());

  const KpiSummary k = summarize(out);
  const auto all = static_cast<std::size_t>(AgentClass::All);
  std::printf("run seed=%llu: %ld completed, %ld abandoned, mean wait %s s, "
              "total income %s eur, overtime %s s (%.2f s)\n",
              static_cast<unsigned long long>(seed), k.completed[all], k.abandoned,
              k.waiting[all].n > 0 ? fmt_double(k.waiting[all].mean).c_str() : "-",
              fmt_double(k.income[all].mean * static_cast<double>(k.n_drivers[all])).c_str(),
              fmt_double(out.overtime_s).c_str(), seconds_since(start));
  std::printf("wrote %s\n", (options.out / "trips.csv").string().c_str());
  return 0;
}

int cmd_calibrate(const RunConfig& config, const CommandOptions& options) {
  const RoadGraph graph = build_graph(config);
  const auto seeds = calibration_seeds(config.scenario.master_seed, config.calibration_runs);
  const CalibrationResult result = calibrate(config.scenario, graph, seeds);
  write_file(options.out / "calibration.csv",
             calibration_csv(result, config.digest, config.scenario.master_seed));
  std::printf("calibrated random_accept_prob = %s (%ld offers over %d runs)\n",
              fmt_double(result.pooled).c_str(), result.total_offers, config.calibration_runs);
  std::printf("wrote %s\n", (options.out / "calibration.csv").string().c_str());
  return 0;
}

int cmd_sweep(const RunConfig& config, const CommandOptions& options) {
  const auto start = Clock::now();
  const RoadGraph graph = build_graph(config);

  ExperimentPlan plan;
  plan.shares = config.shares;
  plan.replications = config.replications;
  plan.master_seed = config.scenario.master_seed;

  ScenarioConfig sc = config.scenario;
  bool any_random = false;
  for (double share : plan.shares)
    if (scenario_has_random_drivers(sc, share)) any_random = true;
  const auto calibration = resolve_random_prob(sc, graph, config, any_random);
  if (calibration)
    write_file(options.out / "calibration.csv",
               calibration_csv(*calibration, config.digest, sc.master_seed));

  const int jobs = options.jobs.value_or(config.jobs);
  const SweepResult sweep = run_sweep(plan, sc, graph, jobs);

  write_file(options.out / "summary.csv",
             summary_csv(sweep.summaries, config.digest, sc.master_seed));

  std::size_t distinct_shares = std::set<double>(plan.shares.begin(), plan.shares.end()).size();
  if (distinct_shares >= 3 && plan.replications >= 2) {
    const auto trends = trend_stats(sweep.summaries);
    write_file(options.out / "trend.csv", trend_csv(trends, config.digest, sc.master_seed));
  } else {
    std::printf("plan too small for trend statistics, skipping trend.csv\n");
  }

  write_file(options.out / "driver_distributions.csv",
             driver_distributions_csv(sweep, plan.shares, config.digest, sc.master_seed));

  if (options.plots) {
    const std::vector<PlotSeries> income = {
        mean_series(sweep.summaries, "behavioural", "#1f77b4", AgentClass::Behavioural, plot_income),
        mean_series(sweep.summaries, "random", "#d62728", AgentClass::Random, plot_income),
        mean_series(sweep.summaries, "all", "#555555", AgentClass::All, plot_income)};
    write_file(options.out / "sweep_income.svg",
               line_chart_svg("Mean driver income by behavioural share", "behavioural share",
                              "income (eur)", income));
    const std::vector<PlotSeries> waiting = {
        mean_series(sweep.summaries, "behavioural", "#1f77b4", AgentClass::Behavioural, plot_waiting),
        mean_series(sweep.summaries, "random", "#d62728", AgentClass::Random, plot_waiting),
        mean_series(sweep.summaries, "all", "#555555", AgentClass::All, plot_waiting)};
    write_file(options.out / "sweep_waiting.svg",
               line_chart_svg("Mean traveller waiting by behavioural share", "behavioural share",
                              "waiting (s)", waiting));

    HistogramGroup inc_b{"behavioural", "#1f77b4", {}}, inc_r{"random", "#d62728", {}};
    HistogramGroup idle_b{"behavioural", "#1f77b4", {}}, idle_r{"random", "#d62728", {}};
    for (const auto& out : sweep.mid_outputs) {
      for (const auto& d : out.drivers) {
        (is_behavioural(d.policy) ? inc_b : inc_r).values.push_back(d.income_eur);
        (is_behavioural(d.policy) ? idle_b : idle_r).values.push_back(d.idle_s);
      }
    }
    write_file(options.out / "dist_income.svg",
               histogram_svg("Driver income at the mixed share", "income (eur)", {inc_b, inc_r}, 20));
    write_file(options.out / "dist_idle.svg",
               histogram_svg("Driver idle time at the mixed share", "idle (s)", {idle_b, idle_r}, 20));
  }

  std::printf("sweep: %zu cells (%zu shares x %d replications), jobs=%d, %.2f s\n",
              sweep.summaries.size(), plan.shares.size(), plan.replications, jobs,
              seconds_since(start));
  std::printf("wrote %s\n", (options.out / "summary.csv").string().c_str());
  return 0;
}

int cmd_sensitivity(const RunConfig& config, const CommandOptions& options) {
  const DecisionContext reference{};  // all attributes at zero
  struct Sweep {
    ChoiceAttribute attribute;
    const std::vector<double>* grid;
  };
  const std::vector<double> time1_grid = {0.0, 1.0};
  const Sweep sweeps[] = {
      {ChoiceAttribute::PickupTime, &config.pickup_grid},
      {ChoiceAttribute::WaitingTime, &config.waiting_grid},
      {ChoiceAttribute::Time1Loc, &time1_grid},
      {ChoiceAttribute::Rlrd, &config.rlrd_grid},
  };

  std::vector<std::pair<std::string, double>> ranking;
  std::vector<PlotSeries> plot;
  const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  int ci = 0;
  for (const auto& sw : sweeps) {
    const auto points = sensitivity_sweep(config.scenario.model, sw.attribute, *sw.grid, reference);
    const std::string name = attribute_name(sw.attribute);

    std::string csv = "# config_digest=" + config.digest +
                      " seed=" + std::to_string(config.scenario.master_seed) + "\n";
    csv += "attribute,value,probability\n";
    double lo = points.front().probability, hi = points.front().probability;
    for (const auto& p : points) {
      csv += name + ',' + fmt_double(p.value) + ',' + fmt_double(p.probability) + '\n';
      lo = std::min(lo, p.probability);
      hi = std::max(hi, p.probability);
    }
    write_file(options.out / ("sensitivity_" + name + ".csv"), csv);
    ranking.emplace_back(name, hi - lo);

    if (options.plots) {
      PlotSeries series;
      series.label = name;
      series.colour = colours[ci++ % 4];
      const double vlo = sw.grid->front(), vhi = sw.grid->back();
      for (const auto& p : points)
        series.points.emplace_back(vhi > vlo ? (p.value - vlo) / (vhi - vlo) : 0.0, p.probability);
      plot.push_back(std::move(series));
    }
  }

  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string rank_csv = "# config_digest=" + config.digest +
                         " seed=" + std::to_string(config.scenario.master_seed) + "\n";
  rank_csv += "attribute,delta_p\n";
  for (const auto& [name, delta] : ranking) rank_csv += name + ',' + fmt_double(delta) + '\n';
  write_file(options.out / "sensitivity_ranking.csv", rank_csv);

  if (options.plots)
    write_file(options.out / "sensitivity.svg",
               line_chart_svg("Acceptance probability, one attribute at a time",
                              "attribute value (normalized to its grid)", "P(accept)", plot));

  for (const auto& [name, delta] : ranking)
    std::printf("%s: delta_p = %s\n", name.c_str(), fmt_double(delta).c_str());
  std::printf("wrote %s\n", (options.out / "sensitivity_ranking.csv").string().c_str());
  return 0;
}

int cmd_validate_graph(const RunConfig& config) {
  const RoadGraph graph = build_graph(config);
  long central = 0;
  for (const auto& e : graph.edges())
    if (e.speed_mps == kmh_to_mps(config.scenario.central_speed_kmh)) ++central;
  std::printf("nodes=%zu edges=%zu strongly_connected=yes central_edges=%ld outer_edges=%ld "
              "route_cache=%s\n",
              graph.node_count(), graph.edge_count(), central,
              static_cast<long>(graph.edge_count()) - central,
              graph.route_cache_built() ? "built" : "off");
  return 0;
}

}  // namespace ridesim
