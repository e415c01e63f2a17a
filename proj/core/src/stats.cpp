#include "oow/stats.hpp"
#include "oow/error.hpp"
#include "oow/telemetry.hpp"

#include "json_codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace oow::stats {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Lentz continued fraction for the incomplete beta.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace

void check_unique(const MeasureTable& table) {
  std::set<std::tuple<std::string, int, std::string>> seen;
  for (const auto& r : table) {
    if (!seen.emplace(r.subject, r.trial_index, r.measure).second) {
      throw ParameterError("duplicate row for subject '" + r.subject + "', trial " +
                           std::to_string(r.trial_index) + ", measure '" + r.measure + "'");
    }
  }
}

ZnormResult znorm_per_subject(const MeasureTable& table, const std::string& measure) {
  std::map<std::string, std::vector<std::size_t>> by_subject;
  ZnormResult out;
  for (const auto& r : table) {
    if (r.measure != measure) continue;
    by_subject[r.subject].push_back(out.table.size());
    out.table.push_back(r);
  }
  for (const auto& [subject, idx] : by_subject) {
    if (idx.size() < 2) {
      throw ParameterError("subject '" + subject + "' has fewer than 2 values of '" + measure + "'");
    }
    std::vector<double> v;
    for (auto i : idx) v.push_back(out.table[i].value);
    const double m = mean_of(v);
    const double sd = sample_sd(v, m);
    if (!(sd > 0.0)) {
      out.warnings.push_back("subject '" + subject + "' has constant '" + measure + "'; set to 0");
      for (auto i : idx) out.table[i].value = 0.0;
      continue;
    }
    for (auto i : idx) out.table[i].value = (out.table[i].value - m) / sd;
  }
  return out;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ParameterError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double f_sf(double f, double d1, double d2) {
  if (!(d1 > 0.0 && d2 > 0.0)) throw ParameterError("F distribution needs positive degrees of freedom");
  if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

AnovaResult oneway_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw ParameterError("ANOVA needs at least 2 groups");
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw ParameterError("every ANOVA group needs at least 2 values");
    n += g.size();
    grand += std::accumulate(g.begin(), g.end(), 0.0);
  }
  grand /= static_cast<double>(n);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) ssw += (x - m) * (x - m);
  }
  AnovaResult r;
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(n - groups.size());
  const double msb = ssb / r.df_between;
  const double msw = ssw / r.df_within;
  if (msw > 0.0) {
    r.f = msb / msw;
  } else {
    r.f = msb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.p = f_sf(r.f, r.df_between, r.df_within);
  return r;
}

double pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw ParameterError("t statistic needs at least 2 values per group");
  const double ma = mean_of(a), mb = mean_of(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = std::pow(sample_sd(a, ma), 2), vb = std::pow(sample_sd(b, mb), 2);
  const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
  return (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
}

PairwiseResult pairwise_anova(const MeasureTable& table, const std::string& measure,
                              const std::vector<std::string>& labels) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : table) {
    if (r.measure == measure) groups[riemann::label_for(r.config, riemann::Paradigm::FiveClass)].push_back(r.value);
  }
  for (const auto& l : labels) {
    if (!groups.count(l)) throw ParameterError("label '" + l + "' has no values of '" + measure + "'");
  }
  PairwiseResult out;
  out.labels = labels;
  const auto k = static_cast<Eigen::Index>(labels.size());
  out.p = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double p = oneway_anova({groups[labels[static_cast<std::size_t>(i)]],
                                     groups[labels[static_cast<std::size_t>(j)]]})
                           .p;
      out.p(i, j) = p;
      out.p(j, i) = p;
    }
  }
  return out;
}

std::vector<double> trim_ci95(const std::vector<double>& values) {
  if (values.size() < 3) throw ParameterError("trim_ci95 needs at least 3 values");
  const double m = mean_of(values);
  const double sd = sample_sd(values, m);
  if (!(sd > 0.0)) return values;
  std::vector<double> out;
  for (double x : values) {
    if (std::abs((x - m) / sd) <= 1.96) out.push_back(x);
  }
  return out;
}

std::vector<TrendPoint> trial_trend(const MeasureTable& table, const std::string& metric) {
  std::map<int, std::vector<double>> by_trial;
  for (const auto& r : table) {
    if (r.measure == metric) by_trial[r.trial_index].push_back(r.value);
  }
  std::vector<TrendPoint> out;
  for (const auto& [idx, v] : by_trial) {
    TrendPoint p;
    p.trial_index = idx;
    p.n = v.size();
    p.mean = mean_of(v);
    if (v.size() > 1) p.ci95 = 1.96 * sample_sd(v, p.mean) / std::sqrt(static_cast<double>(v.size()));
    out.push_back(p);
  }
  return out;
}

Factor factor_from_name(const std::string& name) {
  if (name == "latency") return Factor::Latency;
  if (name == "tp" || name == "time_pressure") return Factor::TimePressure;
  throw ParameterError("unknown factor '" + name + "' (expected latency or tp)");
}

std::string factor_name(Factor f) { return f == Factor::Latency ? "latency" : "tp"; }

std::vector<FactorCell> factor_analysis(const MeasureTable& table, Factor factor) {
  check_unique(table);
  std::vector<std::string> measures;
  for (const auto& info : telemetry::measure_catalog()) measures.emplace_back(info.name);
  for (const auto& r : table) {
    if (std::find(measures.begin(), measures.end(), r.measure) == measures.end()) measures.push_back(r.measure);
  }

  std::vector<FactorCell> out;
  for (const auto& m : measures) {
    FactorCell cell;
    cell.measure = m;
    for (const auto& info : telemetry::measure_catalog()) {
      if (m == info.name) cell.category = info.category;
    }
    std::vector<double> with, without;
    try {
      const ZnormResult z = znorm_per_subject(table, m);
      for (const auto& r : z.table) {
        const bool on = factor == Factor::Latency ? r.config.latency > 0.0 : r.config.time_pressure;
        (on ? with : without).push_back(r.value);
      }
      cell.n_with = with.size();
      cell.n_without = without.size();
      if (with.empty() && without.empty()) continue;
      cell.anova = oneway_anova({with, without});
      cell.direction = mean_of(with) > mean_of(without) ? "up" : "down";
    } catch (const Error& e) {
      cell.n_with = with.size();
      cell.n_without = without.size();
      cell.error = e.what();
    }
    out.push_back(std::move(cell));
  }
  return out;
}

MeasureTable read_measures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  MeasureTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = codec::json::parse(line);
      MeasureRow r;
      r.subject = j.at("subject").get<std::string>();
      r.trial_index = j.at("trial_index").get<int>();
      r.config = codec::trial_config(j.at("config"));
      r.measure = j.at("measure").get<std::string>();
      r.value = j.at("value").get<double>();
      table.push_back(std::move(r));
    } catch (const codec::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return table;
}

void write_measures(const MeasureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : table) {
    const codec::json j = {{"subject", r.subject},
                           {"trial_index", r.trial_index},
                           {"config", codec::trial_config(r.config)},
                           {"measure", r.measure},
                           {"value", r.value}};
    out << j.dump() << '\n';
  }
}

}  // namespace oow::stats
