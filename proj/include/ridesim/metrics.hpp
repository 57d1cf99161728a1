#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ridesim/engine.hpp"

namespace ridesim {

// Gini coefficient of a non-negative list. All-zero lists are perfectly
// equal (0). Throws InputError on empty input or negative values.
double gini(std::span<const double> values);

// Spearman rank correlation with average ranks on ties. Series with zero
// rank variance correlate 0 by convention.
double spearman(std::span<const double> x, std::span<const double> y);

enum class AgentClass { Behavioural = 0, Random = 1, All = 2 };

const char* class_name(AgentClass cls);

// Distribution summary of one metric over one agent class. n == 0 marks the
// partition absent (no such agents in the run), not a zero value.
struct StatBlock {
  long n = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;               // population
  std::optional<double> gini_coeff;  // only for income
};

StatBlock stat_block(std::span<const double> values, bool with_gini);

// Per-run KPI set for one experiment cell, partitioned by driver class.
// Waiting is partitioned by the class of the serving driver.
struct KpiSummary {
  int share_index = 0;
  double behavioural_share = 0.0;
  int replication = 0;
  StatBlock income[3];
  StatBlock idle[3];
  StatBlock waiting[3];
  long n_drivers[3] = {0, 0, 0};
  long completed[3] = {0, 0, 0};
  long offers[3] = {0, 0, 0};
  long accepts[3] = {0, 0, 0};
  long n_requests = 0;
  long abandoned = 0;
  double abandonment_rate = 0.0;
};

KpiSummary summarize(const SimOutput& output);

struct TrendRow {
  std::string metric;  // income_eur, waiting_s, idle_s
  AgentClass cls = AgentClass::All;
  double spearman_rho = 0.0;
  double cv_of_means = 0.0;  // population std of per-share means over their mean
};

// Cross-share trend statistics over a sweep: per share, replication means of
// each KPI, then Spearman rank correlation against the share value and the
// coefficient of variation of those means. Requires at least 3 distinct
// shares with at least 2 replications each.
std::vector<TrendRow> trend_stats(std::span<const KpiSummary> summaries);

std::string summary_csv(std::span<const KpiSummary> summaries, const std::string& digest,
                        std::uint64_t seed);
std::string trend_csv(std::span<const TrendRow> rows, const std::string& digest,
                      std::uint64_t seed);

}  // namespace ridesim
