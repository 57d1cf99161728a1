#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ridesim/commands.hpp"
#include "ridesim/errors.hpp"

using namespace ridesim;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("ridesim_cmd_" + std::string(tag) + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

RunConfig quick_config() {
  return parse_config_text(
      "[graph]\n"
      "grid_rows = 6\n"
      "grid_cols = 6\n"
      "grid_edge_len_m = 250\n"
      "[zone]\n"
      "central_radius_m = 400\n"
      "[scenario]\n"
      "n_drivers = 4\n"
      "n_travellers = 25\n"
      "horizon_s = 3000\n"
      "random_accept_prob = 0.7\n"
      "master_seed = 5\n"
      "[sweep]\n"
      "shares = 0, 0.5, 1\n"
      "replications = 2\n"
      "calibration_runs = 2\n",
      "cmd.cfg");
}

}  // namespace

TEST_CASE("run command writes the three run files") {
  const TempDir dir("run");
  const RunConfig cfg = quick_config();
  CommandOptions opt;
  opt.out = dir.path;

  CHECK(cmd_run(cfg, opt) == 0);

  const std::string trips = read_file(dir.path / "trips.csv");
  const auto trip_lines = lines_of(trips);
  CHECK(trip_lines[0] == "# config_digest=" + cfg.digest + " seed=5");
  CHECK(trip_lines[1] ==
        "request_id,traveller_id,driver_id,request_time_s,pickup_time_s,completion_time_s,"
        "distance_m,status");
  CHECK(trip_lines.size() == 2 + 25);

  const auto driver_lines = lines_of(read_file(dir.path / "drivers.csv"));
  CHECK(driver_lines.size() == 2 + 4);
  CHECK(read_file(dir.path / "offers.csv").find(",accept\n") != std::string::npos);
}

TEST_CASE("run command honours the seed override") {
  const TempDir dir_a("seed_a");
  const TempDir dir_b("seed_b");
  const TempDir dir_c("seed_c");
  const RunConfig cfg = quick_config();

  CommandOptions opt;
  opt.out = dir_a.path;
  opt.seed = 333;
  cmd_run(cfg, opt);
  opt.out = dir_b.path;
  cmd_run(cfg, opt);
  opt.out = dir_c.path;
  opt.seed = 334;
  cmd_run(cfg, opt);

  CHECK(read_file(dir_a.path / "offers.csv") == read_file(dir_b.path / "offers.csv"));
  CHECK(read_file(dir_a.path / "offers.csv") != read_file(dir_c.path / "offers.csv"));
}

TEST_CASE("calibrate command reports per-run and pooled rates") {
  const TempDir dir("cal");
  const RunConfig cfg = quick_config();
  CommandOptions opt;
  opt.out = dir.path;

  CHECK(cmd_calibrate(cfg, opt) == 0);
  const auto lines = lines_of(read_file(dir.path / "calibration.csv"));
  REQUIRE(lines.size() == 2 + 2 + 1);  // comment, header, 2 runs, pooled
  CHECK(lines[1] == "scope,run_index,seed,n_offers,n_accepts,acceptance_rate");
  CHECK(lines[2].rfind("run,0,", 0) == 0);
  CHECK(lines[3].rfind("run,1,", 0) == 0);
  CHECK(lines[4].rfind("pooled,,,", 0) == 0);
}

TEST_CASE("sweep command writes summaries, trends and distributions") {
  const TempDir dir("sweep");
  RunConfig cfg = quick_config();
  CommandOptions opt;
  opt.out = dir.path;
  opt.jobs = 2;
  opt.plots = true;

  CHECK(cmd_sweep(cfg, opt) == 0);
  CHECK(fs::exists(dir.path / "summary.csv"));
  CHECK(fs::exists(dir.path / "trend.csv"));
  CHECK(fs::exists(dir.path / "driver_distributions.csv"));
  // probability was pinned in the config, so no implicit calibration
  CHECK_FALSE(fs::exists(dir.path / "calibration.csv"));

  for (const char* name : {"sweep_income.svg", "sweep_waiting.svg", "dist_income.svg",
                           "dist_idle.svg"}) {
    const std::string svg = read_file(dir.path / name);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
  }

  const auto dist_lines = lines_of(read_file(dir.path / "driver_distributions.csv"));
  CHECK(dist_lines[1] ==
        "share,replication,driver_id,class,income_eur,idle_s,enroute_s,inservice_s,n_trips");
  // the mid share (0.5) snapshot holds 2 replications x 4 drivers
  CHECK(dist_lines.size() == 2 + 8);
  for (std::size_t i = 2; i < dist_lines.size(); ++i)
    CHECK(dist_lines[i].rfind("0.5,", 0) == 0);

  const std::string summary = read_file(dir.path / "summary.csv");
  CHECK(summary.find(",behavioural,income_eur,") != std::string::npos);
  CHECK(summary.find(",random,income_eur,") != std::string::npos);
  CHECK(summary.find(",all,abandonment_rate,") != std::string::npos);
}

TEST_CASE("sweep runs implicit calibration when the probability is auto") {
  const TempDir dir("sweep_auto");
  RunConfig cfg = quick_config();
  cfg.scenario.random_accept_prob.reset();
  cfg.digest = config_digest(cfg);
  CommandOptions opt;
  opt.out = dir.path;

  CHECK(cmd_sweep(cfg, opt) == 0);
  CHECK(fs::exists(dir.path / "calibration.csv"));
  CHECK(fs::exists(dir.path / "summary.csv"));
}

TEST_CASE("small plans skip trend statistics without failing") {
  const TempDir dir("sweep_small");
  RunConfig cfg = quick_config();
  cfg.shares = {0.0, 1.0};
  cfg.digest = config_digest(cfg);
  CommandOptions opt;
  opt.out = dir.path;

  CHECK(cmd_sweep(cfg, opt) == 0);
  CHECK(fs::exists(dir.path / "summary.csv"));
  CHECK_FALSE(fs::exists(dir.path / "trend.csv"));
}

TEST_CASE("sensitivity command writes curves and the attribute ranking") {
  const TempDir dir("sens");
  const RunConfig cfg = quick_config();
  CommandOptions opt;
  opt.out = dir.path;
  opt.plots = true;

  CHECK(cmd_sensitivity(cfg, opt) == 0);
  for (const char* name : {"sensitivity_pickup_time.csv", "sensitivity_waiting_time.csv",
                           "sensitivity_time1_loc.csv", "sensitivity_rlrd.csv",
                           "sensitivity_ranking.csv"})
    CHECK(fs::exists(dir.path / name));
  CHECK(fs::exists(dir.path / "sensitivity.svg"));

  // the shift flag curve is exactly the two flag values
  const auto flag_lines = lines_of(read_file(dir.path / "sensitivity_time1_loc.csv"));
  REQUIRE(flag_lines.size() == 4);
  CHECK(flag_lines[1] == "attribute,value,probability");
  CHECK(flag_lines[2].rfind("time1_loc,0,", 0) == 0);
  CHECK(flag_lines[3].rfind("time1_loc,1,", 0) == 0);

  // over the default grids travel times dominate the rating interaction
  const auto rank_lines = lines_of(read_file(dir.path / "sensitivity_ranking.csv"));
  REQUIRE(rank_lines.size() == 6);
  CHECK(rank_lines[1] == "attribute,delta_p");
  CHECK(rank_lines[2].rfind("pickup_time,", 0) == 0);
  CHECK(rank_lines[3].rfind("waiting_time,", 0) == 0);
  CHECK(rank_lines[4].rfind("rlrd,", 0) == 0);
  CHECK(rank_lines[5].rfind("time1_loc,", 0) == 0);
}

TEST_CASE("graph validation command succeeds on the default city") {
  RunConfig cfg = quick_config();
  CHECK(cmd_validate_graph(cfg) == 0);
}
