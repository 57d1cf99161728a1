#include "ridesim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ridesim/csv.hpp"
#include "ridesim/errors.hpp"

extern "C" char** environ;

namespace ridesim {

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return v;
}

double parse_number(const std::string& value, const std::string& where) {
  try {
    return parse_double_field(value, where);
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
}

std::int64_t parse_integer(const std::string& value, const std::string& where) {
  try {
    return parse_i64_field(value, where);
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t parse_unsigned(const std::string& value, const std::string& where) {
  try {
    return parse_u64_field(value, where);
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
}

// "a,b,c" or "lo:hi:count" (inclusive endpoints)
std::vector<double> parse_list(const std::string& value, const std::string& where) {
  std::vector<double> out;
  if (value.find(':') != std::string::npos) {
    std::string v = value;
    std::replace(v.begin(), v.end(), ':', ',');
    std::vector<std::string> p;
    for (auto f : split_fields(v)) p.emplace_back(f);
    if (p.size() != 3) throw ConfigError(where + ": range syntax is lo:hi:count");
    const double lo = parse_number(p[0], where);
    const double hi = parse_number(p[1], where);
    const auto count = parse_integer(p[2], where);
    if (count < 2) throw ConfigError(where + ": range count must be >= 2");
    if (!(hi >= lo)) throw ConfigError(where + ": range needs hi >= lo");
    return linspace(lo, hi, static_cast<int>(count));
  }
  for (auto f : split_fields(std::string_view(value)))
    out.push_back(parse_number(std::string(f), where));
  if (out.empty()) throw ConfigError(where + ": empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& value, const std::string& where)>;

struct KeySpec {
  const char* section;
  Setter set;
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = {
      // [graph]
      {"graph",
       {"graph", [](RunConfig& c, const std::string& v, const std::string& w) {
          if (v == "grid") c.graph_source = GraphSource::Grid;
          else if (v == "files") c.graph_source = GraphSource::Files;
          else throw ConfigError(w + ": graph must be 'grid' or 'files'");
        }}},
      {"grid_rows",
       {"graph", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 2) throw ConfigError(w + ": grid_rows must be >= 2");
          c.grid_rows = static_cast<std::size_t>(n);
        }}},
      {"grid_cols",
       {"graph", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 2) throw ConfigError(w + ": grid_cols must be >= 2");
          c.grid_cols = static_cast<std::size_t>(n);
        }}},
      {"grid_edge_len_m",
       {"graph", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x > 0.0)) throw ConfigError(w + ": grid_edge_len_m must be positive");
          c.grid_edge_len_m = x;
        }}},
      {"nodes_file",
       {"graph", [](RunConfig& c, const std::string& v, const std::string&) { c.nodes_file = v; }}},
      {"edges_file",
       {"graph", [](RunConfig& c, const std::string& v, const std::string&) { c.edges_file = v; }}},
      {"route_cache_max_nodes",
       {"graph", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 0) throw ConfigError(w + ": route_cache_max_nodes must be >= 0");
          c.route_cache_max_nodes = static_cast<std::size_t>(n);
        }}},
      // [zone]
      {"central_x_m",
       {"zone", [](RunConfig& c, const std::string& v, const std::string& w) {
          if (v == "auto") c.scenario.central_x_m.reset();
          else c.scenario.central_x_m = parse_number(v, w);
        }}},
      {"central_y_m",
       {"zone", [](RunConfig& c, const std::string& v, const std::string& w) {
          if (v == "auto") c.scenario.central_y_m.reset();
          else c.scenario.central_y_m = parse_number(v, w);
        }}},
      {"central_radius_m",
       {"zone", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x > 0.0)) throw ConfigError(w + ": central_radius_m must be positive");
          c.scenario.central_radius_m = x;
        }}},
      {"central_speed_kmh",
       {"zone", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x > 0.0)) throw ConfigError(w + ": central_speed_kmh must be positive");
          c.scenario.central_speed_kmh = x;
        }}},
      {"outer_speed_kmh",
       {"zone", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x > 0.0)) throw ConfigError(w + ": outer_speed_kmh must be positive");
          c.scenario.outer_speed_kmh = x;
        }}},
      // [scenario]
      {"horizon_s",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x > 0.0)) throw ConfigError(w + ": horizon_s must be positive");
          c.scenario.horizon_s = x;
        }}},
      {"n_drivers",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 1) throw ConfigError(w + ": n_drivers must be a positive integer");
          c.scenario.n_drivers = static_cast<int>(n);
        }}},
      {"n_travellers",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 0) throw ConfigError(w + ": n_travellers must be >= 0");
          c.scenario.n_travellers = static_cast<int>(n);
        }}},
      {"behavioural_share",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(w + ": behavioural_share must lie in [0, 1]");
          c.scenario.behavioural_share = x;
        }}},
      {"fare_per_km_eur",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x >= 0.0)) throw ConfigError(w + ": fare_per_km_eur must be >= 0");
          c.scenario.fare_per_km_eur = x;
        }}},
      {"max_offer_rounds",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 1) throw ConfigError(w + ": max_offer_rounds must be >= 1");
          c.scenario.max_offer_rounds = static_cast<int>(n);
        }}},
      {"max_wait_s",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x >= 0.0)) throw ConfigError(w + ": max_wait_s must be >= 0 (0 disables)");
          c.scenario.max_wait_s = x;
        }}},
      {"min_trip_m",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          const double x = parse_number(v, w);
          if (!(x >= 0.0)) throw ConfigError(w + ": min_trip_m must be >= 0");
          c.scenario.min_trip_m = x;
        }}},
      {"arrival_process",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          if (v == "uniform") c.scenario.arrivals = ArrivalProcess::Uniform;
          else if (v == "poisson") c.scenario.arrivals = ArrivalProcess::Poisson;
          else throw ConfigError(w + ": arrival_process must be 'uniform' or 'poisson'");
        }}},
      {"rating_min",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.scenario.rating.min = parse_number(v, w);
        }}},
      {"rating_max",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.scenario.rating.max = parse_number(v, w);
        }}},
      {"random_accept_prob",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          if (v == "auto") {
            c.scenario.random_accept_prob.reset();
            return;
          }
          const double x = parse_number(v, w);
          if (!(x >= 0.0 && x <= 1.0))
            throw ConfigError(w + ": random_accept_prob must be 'auto' or lie in [0, 1]");
          c.scenario.random_accept_prob = x;
        }}},
      {"master_seed",
       {"scenario", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.scenario.master_seed = parse_unsigned(v, w);
        }}},
      // [choice]
      {"beta_asc",
       {"choice", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.scenario.model.beta_asc = parse_number(v, w);
        }}},
      {"beta_pickup_min",
       {"choice", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.scenario.model.beta_pickup_min = parse_number(v, w);
        }}},
      {"beta_waiting_min",
       {"choice", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.scenario.model.beta_waiting_min = parse_number(v, w);
        }}},
      {"beta_time1loc",
       {"choice", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.scenario.model.beta_time1loc = parse_number(v, w);
        }}},
      {"beta_rlrd",
       {"choice", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.scenario.model.beta_rlrd = parse_number(v, w);
        }}},
      // [sweep]
      {"shares",
       {"sweep", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.shares = parse_list(v, w);
          for (double s : c.shares)
            if (!(s >= 0.0 && s <= 1.0)) throw ConfigError(w + ": shares must lie in [0, 1]");
        }}},
      {"replications",
       {"sweep", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 1) throw ConfigError(w + ": replications must be >= 1");
          c.replications = static_cast<int>(n);
        }}},
      {"jobs",
       {"sweep", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 1) throw ConfigError(w + ": jobs must be >= 1");
          c.jobs = static_cast<int>(n);
        }}},
      {"calibration_runs",
       {"sweep", [](RunConfig& c, const std::string& v, const std::string& w) {
          const auto n = parse_integer(v, w);
          if (n < 1) throw ConfigError(w + ": calibration_runs must be >= 1");
          c.calibration_runs = static_cast<int>(n);
        }}},
      // [sensitivity]
      {"pickup_grid",
       {"sensitivity", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.pickup_grid = parse_list(v, w);
        }}},
      {"waiting_grid",
       {"sensitivity", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.waiting_grid = parse_list(v, w);
        }}},
      {"rlrd_grid",
       {"sensitivity", [](RunConfig& c, const std::string& v, const std::string& w) {
          c.rlrd_grid = parse_list(v, w);
        }}},
  };
  return table;
}

void fill_default_lists(RunConfig& c) {
  if (c.shares.empty())
    for (int i = 0; i <= 10; ++i) c.shares.push_back(static_cast<double>(i) / 10.0);
  if (c.pickup_grid.empty()) c.pickup_grid = linspace(0.0, 30.0, 31);
  if (c.waiting_grid.empty()) c.waiting_grid = linspace(0.0, 60.0, 61);
  if (c.rlrd_grid.empty()) c.rlrd_grid = linspace(0.0, 5.0, 51);
}

void cross_validate(const RunConfig& c) {
  if (c.graph_source == GraphSource::Files) {
    if (c.nodes_file.empty() || c.edges_file.empty())
      throw ConfigError("graph = files requires nodes_file and edges_file");
  }
  const auto& r = c.scenario.rating;
  if (!(r.min >= 0.0 && r.min <= r.max && r.max <= 5.0))
    throw ConfigError("rating bounds must satisfy 0 <= rating_min <= rating_max <= 5");
  const auto& m = c.scenario.model;
  for (double b : {m.beta_asc, m.beta_pickup_min, m.beta_waiting_min, m.beta_time1loc, m.beta_rlrd})
    if (!std::isfinite(b)) throw ConfigError("choice model coefficients must be finite");
}

void apply_env_overrides(RunConfig& c) {
  static const std::string prefix = "RIDESIM_";
  for (char** env = environ; env != nullptr && *env != nullptr; ++env) {
    const std::string entry(*env);
    if (entry.compare(0, prefix.size(), prefix) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    const std::string value = entry.substr(eq + 1);
    const std::string where = "environment override " + entry.substr(0, eq);
    const auto it = key_table().find(key);
    if (it == key_table().end()) throw ConfigError(where + ": unknown config key '" + key + "'");
    it->second.set(c, std::string(trim(value)), where);
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  static const std::set<std::string> known_sections = {"graph", "zone", "scenario",
                                                       "choice", "sweep", "sensitivity"};
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    const std::string where = origin + ":" + std::to_string(line_no);
    // strip comments (whole-line or trailing)
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' || line[i] == ';') {
        line = trim(line.substr(0, i));
        break;
      }
    }
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      const std::string section(trim(line.substr(1, line.size() - 2)));
      if (known_sections.count(section) == 0)
        throw ConfigError(where + ": unknown section '" + section + "'");
      continue;  // sections only group keys; names stay globally unique
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const auto it = key_table().find(key);
    if (it == key_table().end())
      throw ConfigError(where + ": unknown key '" + key + "'");
    it->second.set(cfg, value, where + ": " + key);
  }
  fill_default_lists(cfg);
  cross_validate(cfg);
  cfg.digest = config_digest(cfg);
  return cfg;
}

RunConfig default_config() {
  RunConfig cfg;
  fill_default_lists(cfg);
  cross_validate(cfg);
  cfg.digest = config_digest(cfg);
  return cfg;
}

RunConfig load_config(const std::optional<std::filesystem::path>& path) {
  RunConfig cfg;
  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path->string());
    std::ostringstream buf;
    buf << in.rdbuf();
    cfg = parse_config_text(buf.str(), path->filename().string());
  }
  apply_env_overrides(cfg);
  fill_default_lists(cfg);
  cross_validate(cfg);
  cfg.digest = config_digest(cfg);
  return cfg;
}

namespace {

std::string join_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ',';
    s += fmt_double(v[i]);
  }
  return s;
}

}  // namespace

std::string canonical_config(const RunConfig& c) {
  std::map<std::string, std::string> kv;
  kv["graph"] = c.graph_source == GraphSource::Grid ? "grid" : "files";
  kv["grid_rows"] = std::to_string(c.grid_rows);
  kv["grid_cols"] = std::to_string(c.grid_cols);
  kv["grid_edge_len_m"] = fmt_double(c.grid_edge_len_m);
  kv["nodes_file"] = c.nodes_file.string();
  kv["edges_file"] = c.edges_file.string();
  kv["route_cache_max_nodes"] = std::to_string(c.route_cache_max_nodes);
  kv["central_x_m"] = c.scenario.central_x_m ? fmt_double(*c.scenario.central_x_m) : "auto";
  kv["central_y_m"] = c.scenario.central_y_m ? fmt_double(*c.scenario.central_y_m) : "auto";
  kv["central_radius_m"] = fmt_double(c.scenario.central_radius_m);
  kv["central_speed_kmh"] = fmt_double(c.scenario.central_speed_kmh);
  kv["outer_speed_kmh"] = fmt_double(c.scenario.outer_speed_kmh);
  kv["horizon_s"] = fmt_double(c.scenario.horizon_s);
  kv["n_drivers"] = std::to_string(c.scenario.n_drivers);
  kv["n_travellers"] = std::to_string(c.scenario.n_travellers);
  kv["behavioural_share"] = fmt_double(c.scenario.behavioural_share);
  kv["fare_per_km_eur"] = fmt_double(c.scenario.fare_per_km_eur);
  kv["max_offer_rounds"] = std::to_string(c.scenario.max_offer_rounds);
  kv["max_wait_s"] = fmt_double(c.scenario.max_wait_s);
  kv["min_trip_m"] = fmt_double(c.scenario.min_trip_m);
  kv["arrival_process"] = c.scenario.arrivals == ArrivalProcess::Uniform ? "uniform" : "poisson";
  kv["rating_min"] = fmt_double(c.scenario.rating.min);
  kv["rating_max"] = fmt_double(c.scenario.rating.max);
  kv["random_accept_prob"] =
      c.scenario.random_accept_prob ? fmt_double(*c.scenario.random_accept_prob) : "auto";
  kv["master_seed"] = std::to_string(c.scenario.master_seed);
  kv["beta_asc"] = fmt_double(c.scenario.model.beta_asc);
  kv["beta_pickup_min"] = fmt_double(c.scenario.model.beta_pickup_min);
  kv["beta_waiting_min"] = fmt_double(c.scenario.model.beta_waiting_min);
  kv["beta_time1loc"] = fmt_double(c.scenario.model.beta_time1loc);
  kv["beta_rlrd"] = fmt_double(c.scenario.model.beta_rlrd);
  kv["shares"] = join_list(c.shares);
  kv["replications"] = std::to_string(c.replications);
  kv["jobs"] = std::to_string(c.jobs);
  kv["calibration_runs"] = std::to_string(c.calibration_runs);
  kv["pickup_grid"] = join_list(c.pickup_grid);
  kv["waiting_grid"] = join_list(c.waiting_grid);
  kv["rlrd_grid"] = join_list(c.rlrd_grid);

  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string config_digest(const RunConfig& config) {
  const std::string canon = canonical_config(config);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
  buf[16] = '\0';
  return std::string(buf);
}

RoadGraph build_graph(const RunConfig& config) {
  RoadGraph graph = config.graph_source == GraphSource::Grid
                        ? generate_grid(config.grid_rows, config.grid_cols, config.grid_edge_len_m)
                        : load_graph(config.nodes_file, config.edges_file);
  double x0, y0, x1, y1;
  graph.bounding_box(x0, y0, x1, y1);
  const double cx = config.scenario.central_x_m.value_or((x0 + x1) / 2.0);
  const double cy = config.scenario.central_y_m.value_or((y0 + y1) / 2.0);
  graph.classify_speeds(cx, cy, config.scenario.central_radius_m,
                        config.scenario.central_speed_kmh, config.scenario.outer_speed_kmh);
  graph.build_route_cache(config.route_cache_max_nodes);
  return graph;
}

}  // namespace ridesim
