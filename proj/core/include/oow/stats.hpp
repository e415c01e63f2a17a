#pragma once

#include "oow/mission.hpp"
#include "oow/riemann.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oow::stats {

struct MeasureRow {
  std::string subject;
  int trial_index = 0;
  mission::TrialConfig config;
  std::string measure;
  double value = 0.0;
};

using MeasureTable = std::vector<MeasureRow>;

/// Throws ParameterError on a repeated (subject, trial, measure).
void check_unique(const MeasureTable& table);

struct ZnormResult {
  MeasureTable table;                 // only rows of the requested measure
  std::vector<std::string> warnings;  // subjects with zero spread
};

/// (x - mean) / sd per subject, sample sd. Zero spread gives zeros.
ZnormResult znorm_per_subject(const MeasureTable& table, const std::string& measure);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Upper tail P(F > f) of the F(d1, d2) distribution.
double f_sf(double f, double d1, double d2);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  int df_between = 0;
  int df_within = 0;
};

/// Needs >= 2 groups with >= 2 values each.
AnovaResult oneway_anova(const std::vector<std::vector<double>>& groups);

/// Pooled-variance two-sample t statistic.
double pooled_t(const std::vector<double>& a, const std::vector<double>& b);

struct PairwiseResult {
  std::vector<std::string> labels;
  Eigen::MatrixXd p;  // symmetric, unit diagonal
};

/// Groups the measure by five-class label and runs one ANOVA per pair.
PairwiseResult pairwise_anova(const MeasureTable& table, const std::string& measure,
                              const std::vector<std::string>& labels = {"LW", "TP", "0.5s", "0.5s+TP",
                                                                        "HighLat"});

/// Single pass: z-normalize within the class and drop |z| > 1.96.
std::vector<double> trim_ci95(const std::vector<double>& values);

struct TrendPoint {
  int trial_index = 0;
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> ci95;  // 1.96 * SEM; absent when n == 1
};

/// Mean and CI per trial index over all rows of `metric`.
std::vector<TrendPoint> trial_trend(const MeasureTable& table, const std::string& metric);

enum class Factor { Latency, TimePressure };

Factor factor_from_name(const std::string& name);
std::string factor_name(Factor f);

struct FactorCell {
  std::string measure;
  std::string category;
  std::size_t n_with = 0;
  std::size_t n_without = 0;
  std::optional<AnovaResult> anova;
  std::string direction;  // "up" when the factor raises the normalized mean, else "down"
  std::optional<std::string> error;
};

/// One row per measure: z-normalize per subject, split by the factor and
/// run a two-group ANOVA.
std::vector<FactorCell> factor_analysis(const MeasureTable& table, Factor factor);

/// JSON Lines: {"subject","trial_index","config":{...},"measure","value"}.
MeasureTable read_measures(const std::filesystem::path& path);
void write_measures(const MeasureTable& table, const std::filesystem::path& path);

}  // namespace oow::stats
