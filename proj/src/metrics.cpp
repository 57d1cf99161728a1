#include "ridesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ridesim/csv.hpp"
#include "ridesim/errors.hpp"

namespace ridesim {

double gini(std::span<const double> values) {
  if (values.empty()) throw InputError("gini of an empty list");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted)
    if (v < 0.0 || !std::isfinite(v)) throw InputError("gini requires finite non-negative values");
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    total += sorted[i];
    weighted += static_cast<double>(i + 1) * sorted[i];
  }
  if (total == 0.0) return 0.0;
  return 2.0 * weighted / (n * total) - (n + 1.0) / n;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("spearman requires equal-length series");
  if (x.size() < 2) throw InputError("spearman requires at least 2 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean_of(rx);
  const double my = mean_of(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;  // constant series
  return sxy / std::sqrt(sxx * syy);
}

const char* class_name(AgentClass cls) {
  switch (cls) {
    case AgentClass::Behavioural: return "behavioural";
    case AgentClass::Random: return "random";
    case AgentClass::All: return "all";
  }
  throw InternalError("unhandled agent class");
}

StatBlock stat_block(std::span<const double> values, bool with_gini) {
  StatBlock b;
  b.n = static_cast<long>(values.size());
  if (values.empty()) return b;
  b.mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - b.mean) * (v - b.mean);
  b.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  b.median = (n % 2 == 1) ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  if (with_gini) b.gini_coeff = gini(values);
  return b;
}

KpiSummary summarize(const SimOutput& output) {
  KpiSummary s;

  std::vector<double> income[3], idle[3], waiting[3];
  std::map<int, AgentClass> driver_class;
  for (const auto& d : output.drivers) {
    const AgentClass cls = is_behavioural(d.policy) ? AgentClass::Behavioural : AgentClass::Random;
    driver_class[d.id] = cls;
    for (AgentClass c : {cls, AgentClass::All}) {
      const auto i = static_cast<std::size_t>(c);
      income[i].push_back(d.income_eur);
      idle[i].push_back(d.idle_s);
      s.n_drivers[i] += 1;
      s.offers[i] += d.n_offers;
      s.accepts[i] += d.n_accepts;
    }
  }

  s.n_requests = static_cast<long>(output.trips.size());
  for (const auto& t : output.trips) {
    if (t.status == RequestStatus::Abandoned) {
      s.abandoned += 1;
      continue;
    }
    const double wait = t.pickup_time_s - t.request_time_s;
    const AgentClass cls = driver_class.at(t.driver_id);
    for (AgentClass c : {cls, AgentClass::All}) {
      const auto i = static_cast<std::size_t>(c);
      waiting[i].push_back(wait);
      s.completed[i] += 1;
    }
  }
  s.abandonment_rate =
      s.n_requests > 0 ? static_cast<double>(s.abandoned) / static_cast<double>(s.n_requests) : 0.0;

  for (std::size_t i = 0; i < 3; ++i) {
    s.income[i] = stat_block(income[i], true);
    s.idle[i] = stat_block(idle[i], false);
    s.waiting[i] = stat_block(waiting[i], false);
  }
  return s;
}

namespace {

struct MetricAccessor {
  const char* name;
  const StatBlock* (*get)(const KpiSummary&, std::size_t);
};

const StatBlock* get_income(const KpiSummary& s, std::size_t c) { return &s.income[c]; }
const StatBlock* get_waiting(const KpiSummary& s, std::size_t c) { return &s.waiting[c]; }
const StatBlock* get_idle(const KpiSummary& s, std::size_t c) { return &s.idle[c]; }

constexpr MetricAccessor kMetrics[] = {
    {"income_eur", get_income},
    {"waiting_s", get_waiting},
    {"idle_s", get_idle},
};

}  // namespace

std::vector<TrendRow> trend_stats(std::span<const KpiSummary> summaries) {
  // group replications by share
  std::map<double, std::vector<const KpiSummary*>> by_share;
  for (const auto& s : summaries) by_share[s.behavioural_share].push_back(&s);
  if (by_share.size() < 3)
    throw ConfigError("trend statistics need at least 3 distinct shares");
  for (const auto& [share, cells] : by_share)
    if (cells.size() < 2)
      throw ConfigError("trend statistics need at least 2 replications per share");

  std::vector<TrendRow> rows;
  for (const auto& metric : kMetrics) {
    for (AgentClass cls : {AgentClass::Behavioural, AgentClass::Random, AgentClass::All}) {
      const auto ci = static_cast<std::size_t>(cls);
      std::vector<double> shares, means;
      for (const auto& [share, cells] : by_share) {
        double sum = 0.0;
        long n = 0;
        for (const KpiSummary* s : cells) {
          const StatBlock* b = metric.get(*s, ci);
          if (b->n > 0) {
            sum += b->mean;
            n += 1;
          }
        }
        // a share where the class never occurs (e.g. no random drivers at
        // share 1.0) is skipped, not counted as zero
        if (n > 0) {
          shares.push_back(share);
          means.push_back(sum / static_cast<double>(n));
        }
      }
      if (shares.size() < 3) continue;
      TrendRow row;
      row.metric = metric.name;
      row.cls = cls;
      row.spearman_rho = spearman(shares, means);
      const double m = mean_of(means);
      double ss = 0.0;
      for (double v : means) ss += (v - m) * (v - m);
      const double sd = std::sqrt(ss / static_cast<double>(means.size()));
      row.cv_of_means = m == 0.0 ? 0.0 : sd / std::abs(m);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

void append_digest_comment(std::string& s, const std::string& digest, std::uint64_t seed) {
  s += "# config_digest=";
  s += digest.empty() ? "none" : digest;
  s += " seed=";
  s += std::to_string(seed);
  s += '\n';
}

void append_stat_rows(std::string& s, const KpiSummary& k, AgentClass cls) {
  const auto ci = static_cast<std::size_t>(cls);
  const std::string prefix =
      fmt_double(k.behavioural_share) + ',' + std::to_string(k.replication) + ',' + class_name(cls) + ',';
  struct Item {
    const char* metric;
    const StatBlock* block;
  };
  const Item items[] = {
      {"income_eur", &k.income[ci]}, {"waiting_s", &k.waiting[ci]}, {"idle_s", &k.idle[ci]}};
  for (const auto& item : items) {
    if (item.block->n == 0) continue;  // absent partition
    s += prefix;
    s += item.metric;
    s += ',';
    s += std::to_string(item.block->n);
    s += ',';
    s += fmt_double(item.block->mean);
    s += ',';
    s += fmt_double(item.block->median);
    s += ',';
    s += fmt_double(item.block->stddev);
    s += ',';
    if (item.block->gini_coeff) s += fmt_double(*item.block->gini_coeff);
    s += '\n';
  }
  if (k.offers[ci] > 0) {
    s += prefix;
    s += "accept_rate,";
    s += std::to_string(k.offers[ci]);
    s += ',';
    s += fmt_double(static_cast<double>(k.accepts[ci]) / static_cast<double>(k.offers[ci]));
    s += ",,,\n";
  }
  if (cls == AgentClass::All && k.n_requests > 0) {
    s += prefix;
    s += "abandonment_rate,";
    s += std::to_string(k.n_requests);
    s += ',';
    s += fmt_double(k.abandonment_rate);
    s += ",,,\n";
  }
}

}  // namespace

std::string summary_csv(std::span<const KpiSummary> summaries, const std::string& digest,
                        std::uint64_t seed) {
  std::string s;
  append_digest_comment(s, digest, seed);
  s += "share,replication,class,metric,n,mean,median,std,gini\n";
  for (const auto& k : summaries)
    for (AgentClass cls : {AgentClass::Behavioural, AgentClass::Random, AgentClass::All})
      append_stat_rows(s, k, cls);
  return s;
}

std::string trend_csv(std::span<const TrendRow> rows, const std::string& digest,
                      std::uint64_t seed) {
  std::string s;
  append_digest_comment(s, digest, seed);
  s += "metric,class,spearman_rho,cv_of_means\n";
  for (const auto& r : rows) {
    s += r.metric;
    s += ',';
    s += class_name(r.cls);
    s += ',';
    s += fmt_double(r.spearman_rho);
    s += ',';
    s += fmt_double(r.cv_of_means);
    s += '\n';
  }
  return s;
}

}  // namespace ridesim
