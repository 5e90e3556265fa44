//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scm::harness {

enum class Orientation { HigherBetter, LowerBetter };

/// "higher-better" / "lower-better". Throws ConfigError.
Orientation orientation_from_name(std::string_view name);
std::string_view orientation_name(Orientation o) noexcept;

struct MetricReport {
  std::string name;
  Orientation orientation = Orientation::HigherBetter;
  double value = 0.0;
  std::size_t count = 1;

  /// Throws InvalidRange unless count >= 1 and value is finite.
  void validate() const;
};

/// Min-max scaling to [0, 100] across models, lower-better metrics negated
/// first. All-equal inputs (a single value included) map to 50. Throws
/// EmptyList.
std::vector<double> minmax_normalize(std::span<const double> values, Orientation orientation);

inline constexpr const char* kDimensions[] = {"Knowledge Core", "Mol-Text Translation",
                                              "Molecule Generation", "Quantitative Prediction",
                                              "Synthesis Reasoning"};

/// Metric name -> dimension.
using Grouping = std::map<std::string, std::string>;

/// Maps every name by its prefix before the first '.': knowledge,
/// translation, generation, quantitative, synthesis. Names with another
/// prefix are left out.
Grouping default_grouping(std::span<const std::string> metric_names);

struct NormalizedMetric {
  std::string name;
  double score = 0.0;
};

struct CapabilityScore {
  std::string dimension;
  double score = 0.0;
  std::size_t members = 0;
};

struct CapabilityResult {
  /// In kDimensions order; dimensions without members are absent.
  std::vector<CapabilityScore> scores;
  std::vector<std::string> warnings;
};

/// Per-dimension mean of normalized metric scores. Throws UngroupedMetric
/// for a metric the grouping does not cover, ConfigError for an unknown
/// dimension name.
CapabilityResult aggregate_capability(std::span<const NormalizedMetric> metrics,
                                      const Grouping& grouping);

/// nDCG with linear gain. `gains` lists relevance in the predicted order.
/// All-zero gains score 1. Throws EmptyList, InvalidRange (negative gain).
double ndcg(std::span<const double> gains);
/// `ranking` holds item indices in predicted order, `relevance` the gain of
/// each item. Throws IndexOutOfRange, LengthMismatch (not a permutation).
double ndcg(std::span<const std::size_t> ranking, std::span<const double> relevance);

struct RegressionMetrics {
  double mae = 0.0;
  double rmse = 0.0;
};
/// Throws EmptyList, LengthMismatch.
RegressionMetrics regression_metrics(std::span<const double> pred, std::span<const double> truth);

struct ClassificationMetrics {
  double accuracy = 0.0;
  /// Positive class 1; set only when every label is 0 or 1.
  std::optional<double> f1;
};
/// Throws EmptyList, LengthMismatch.
ClassificationMetrics classification_metrics(std::span<const int> pred,
                                             std::span<const int> truth);

/// One evaluated model.
struct ModelReports {
  std::string model;
  std::vector<MetricReport> reports;
};

struct ModelCapability {
  std::string model;
  CapabilityResult capability;
};

/// Normalizes each metric across the models reporting it, then aggregates
/// per model. Throws EmptyList (fewer than two models), ConfigError
/// (conflicting orientations or duplicate names), UngroupedMetric.
std::vector<ModelCapability> scorecard(std::span<const ModelReports> models,
                                       const Grouping& grouping);

/// {"axes": [...], "models": [{"model", "scores": {dim: score}}],
///  "warnings": [...]}
std::string radar_json(std::span<const ModelCapability> card);
/// Static radar chart, one polygon per model.
std::string radar_svg(std::span<const ModelCapability> card);

/// {"name", "orientation", "value", "count"}.
std::string report_json(const MetricReport& report);
/// A report file: {"model": name, "reports": [...]}. Throws IoError,
/// ConfigError.
ModelReports load_model_reports(const std::filesystem::path& path);
/// Every *.json in `dir` except grouping.json, sorted by file name, and the
/// grouping from grouping.json when present (default_grouping otherwise).
std::pair<std::vector<ModelReports>, Grouping> load_report_dir(const std::filesystem::path& dir);

}  // namespace scm::harness
