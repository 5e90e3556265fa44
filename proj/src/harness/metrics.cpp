//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scm/core/error.hpp"
#include "scm/harness/corpus.hpp"

namespace scm::harness {

using nlohmann::json;

Orientation orientation_from_name(std::string_view name) {
  if (name == "higher-better") return Orientation::HigherBetter;
  if (name == "lower-better") return Orientation::LowerBetter;
  throw Error(Errc::ConfigError, "unknown orientation '" + std::string(name) + "'");
}

std::string_view orientation_name(Orientation o) noexcept {
  return o == Orientation::HigherBetter ? "higher-better" : "lower-better";
}

void MetricReport::validate() const {
  if (count < 1) throw Error(Errc::InvalidRange, "metric " + name + " has no samples");
  if (!std::isfinite(value)) throw Error(Errc::InvalidRange, "metric " + name + " is not finite");
}

std::vector<double> minmax_normalize(std::span<const double> values, Orientation orientation) {
  if (values.empty()) throw Error(Errc::EmptyList, "minmax_normalize: no values");
  std::vector<double> x(values.begin(), values.end());
  if (orientation == Orientation::LowerBetter) {
    for (double& v : x) v = -v;
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double x_min = *lo, x_max = *hi;
  std::vector<double> out(x.size(), 50.0);
  if (x_max == x_min) return out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - x_min) / (x_max - x_min) * 100.0;
  return out;
}

Grouping default_grouping(std::span<const std::string> metric_names) {
  static const std::pair<const char*, const char*> prefixes[] = {
      {"knowledge", kDimensions[0]},    {"translation", kDimensions[1]},
      {"generation", kDimensions[2]},   {"quantitative", kDimensions[3]},
      {"synthesis", kDimensions[4]}};
  Grouping g;
  for (const std::string& name : metric_names) {
    const std::string prefix = name.substr(0, name.find('.'));
    for (const auto& [p, dim] : prefixes) {
      if (prefix == p) g[name] = dim;
    }
  }
  return g;
}

CapabilityResult aggregate_capability(std::span<const NormalizedMetric> metrics,
                                      const Grouping& grouping) {
  std::map<std::string, std::vector<double>> members;
  for (const char* d : kDimensions) members[d];
  for (const NormalizedMetric& m : metrics) {
    const auto it = grouping.find(m.name);
    if (it == grouping.end()) {
      throw Error(Errc::UngroupedMetric, "metric '" + m.name + "' has no capability dimension");
    }
    const auto dim = members.find(it->second);
    if (dim == members.end()) {
      throw Error(Errc::ConfigError, "unknown capability dimension '" + it->second + "'");
    }
    dim->second.push_back(m.score);
  }
  CapabilityResult out;
  for (const char* d : kDimensions) {
    std::vector<double>& v = members[d];
    if (v.empty()) {
      out.warnings.push_back(std::string("dimension '") + d + "' has no metrics; omitted");
      continue;
    }
    // Sorted so the sum does not depend on input order.
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double s : v) sum += s;
    out.scores.push_back({d, sum / static_cast<double>(v.size()), v.size()});
  }
  return out;
}

namespace {

double dcg(std::span<const double> gains) {
  double s = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    s += gains[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  return s;
}

}  // namespace

double ndcg(std::span<const double> gains) {
  if (gains.empty()) throw Error(Errc::EmptyList, "ndcg: empty ranking");
  for (double g : gains) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw Error(Errc::InvalidRange, "ndcg: gain must be >= 0");
  }
  std::vector<double> ideal(gains.begin(), gains.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double best = dcg(ideal);
  if (best == 0.0) return 1.0;
  return std::min(1.0, dcg(gains) / best);
}

double ndcg(std::span<const std::size_t> ranking, std::span<const double> relevance) {
  if (ranking.empty()) throw Error(Errc::EmptyList, "ndcg: empty ranking");
  if (ranking.size() != relevance.size()) {
    throw Error(Errc::LengthMismatch, "ndcg: ranking has " + std::to_string(ranking.size()) +
                                          " items, relevance " +
                                          std::to_string(relevance.size()));
  }
  std::vector<bool> seen(relevance.size(), false);
  std::vector<double> gains;
  for (std::size_t idx : ranking) {
    if (idx >= relevance.size()) {
      throw Error(Errc::IndexOutOfRange, "ndcg: item " + std::to_string(idx) + " out of range");
    }
    if (seen[idx]) throw Error(Errc::LengthMismatch, "ndcg: item " + std::to_string(idx) + " repeated");
    seen[idx] = true;
    gains.push_back(relevance[idx]);
  }
  return ndcg(gains);
}

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a == 0 && b == 0) throw Error(Errc::EmptyList, "no predictions");
  if (a != b) {
    throw Error(Errc::LengthMismatch, std::to_string(a) + " predictions for " +
                                          std::to_string(b) + " references");
  }
}

}  // namespace

RegressionMetrics regression_metrics(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred.size(), truth.size());
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const double n = static_cast<double>(pred.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

ClassificationMetrics classification_metrics(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred.size(), truth.size());
  std::size_t correct = 0, tp = 0, fp = 0, fn = 0;
  bool binary = true;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) ++correct;
    binary = binary && (pred[i] == 0 || pred[i] == 1) && (truth[i] == 0 || truth[i] == 1);
    if (pred[i] == 1 && truth[i] == 1) ++tp;
    if (pred[i] == 1 && truth[i] != 1) ++fp;
    if (pred[i] != 1 && truth[i] == 1) ++fn;
  }
  ClassificationMetrics out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
  if (binary) {
    const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    out.f1 = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  return out;
}

std::vector<ModelCapability> scorecard(std::span<const ModelReports> models,
                                       const Grouping& grouping) {
  if (models.size() < 2) {
    throw Error(Errc::EmptyList, "a scorecard needs reports from at least two models");
  }
  // metric -> (orientation, per-model index of its report)
  std::map<std::string, Orientation> orientation;
  std::map<std::string, std::vector<std::pair<std::size_t, double>>> columns;
  for (std::size_t m = 0; m < models.size(); ++m) {
    std::set<std::string> names;
    for (const MetricReport& r : models[m].reports) {
      r.validate();
      if (!names.insert(r.name).second) {
        throw Error(Errc::ConfigError,
                    "model " + models[m].model + " reports " + r.name + " twice");
      }
      const auto [it, fresh] = orientation.emplace(r.name, r.orientation);
      if (!fresh && it->second != r.orientation) {
        throw Error(Errc::ConfigError, "metric " + r.name + " has conflicting orientations");
      }
      columns[r.name].emplace_back(m, r.value);
    }
  }
  std::vector<std::vector<NormalizedMetric>> per_model(models.size());
  for (const auto& [name, column] : columns) {
    std::vector<double> raw;
    for (const auto& [m, v] : column) raw.push_back(v);
    const std::vector<double> s = minmax_normalize(raw, orientation.at(name));
    for (std::size_t k = 0; k < column.size(); ++k) {
      per_model[column[k].first].push_back({name, s[k]});
    }
  }
  std::vector<ModelCapability> out;
  for (std::size_t m = 0; m < models.size(); ++m) {
    out.push_back({models[m].model, aggregate_capability(per_model[m], grouping)});
  }
  return out;
}

std::string radar_json(std::span<const ModelCapability> card) {
  json j;
  j["axes"] = json::array();
  for (const char* d : kDimensions) j["axes"].push_back(d);
  j["models"] = json::array();
  j["warnings"] = json::array();
  for (const ModelCapability& mc : card) {
    json scores = json::object();
    for (const CapabilityScore& s : mc.capability.scores) scores[s.dimension] = s.score;
    j["models"].push_back({{"model", mc.model}, {"scores", scores}});
    for (const std::string& w : mc.capability.warnings) j["warnings"].push_back(mc.model + ": " + w);
  }
  return j.dump(2) + "\n";
}

std::string radar_svg(std::span<const ModelCapability> card) {
  constexpr double cx = 260, cy = 220, radius = 150;
  constexpr std::size_t n = std::size(kDimensions);
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto point = [&](std::size_t axis, double score) {
    const double a = -std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(axis) / n;
    return std::pair{cx + radius * score / 100.0 * std::cos(a),
                     cy + radius * score / 100.0 * std::sin(a)};
  };
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\""
     << 440 + 18 * card.size() << "\">\n";
  for (double level : {25.0, 50.0, 75.0, 100.0}) {
    os << "<polygon fill=\"none\" stroke=\"#ccc\" points=\"";
    for (std::size_t a = 0; a < n; ++a) {
      const auto [x, y] = point(a, level);
      os << x << ',' << y << ' ';
    }
    os << "\"/>\n";
  }
  for (std::size_t a = 0; a < n; ++a) {
    const auto [x, y] = point(a, 100.0);
    const auto [lx, ly] = point(a, 112.0);
    os << "<line x1=\"" << cx << "\" y1=\"" << cy << "\" x2=\"" << x << "\" y2=\"" << y
       << "\" stroke=\"#ccc\"/>\n";
    os << "<text x=\"" << lx << "\" y=\"" << ly
       << "\" font-size=\"11\" text-anchor=\"middle\">" << kDimensions[a] << "</text>\n";
  }
  for (std::size_t m = 0; m < card.size(); ++m) {
    const char* color = colors[m % std::size(colors)];
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"" << color
       << "\" points=\"";
    for (std::size_t a = 0; a < n; ++a) {
      double score = 0.0;
      for (const CapabilityScore& s : card[m].capability.scores) {
        if (s.dimension == kDimensions[a]) score = s.score;
      }
      const auto [x, y] = point(a, score);
      os << x << ',' << y << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"20\" y=\"" << 430 + 18 * m << "\" font-size=\"12\" fill=\"" << color
       << "\">" << card[m].model << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string report_json(const MetricReport& report) {
  const json j = {{"name", report.name},
                  {"orientation", std::string(orientation_name(report.orientation))},
                  {"value", report.value},
                  {"count", report.count}};
  return j.dump(2) + "\n";
}

namespace {

MetricReport report_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::ConfigError, where + ": report must be an object");
  MetricReport r;
  try {
    r.name = j.at("name").get<std::string>();
    r.orientation = j.contains("orientation")
                        ? orientation_from_name(j.at("orientation").get<std::string>())
                        : Orientation::HigherBetter;
    r.value = j.at("value").get<double>();
    r.count = j.contains("count") ? j.at("count").get<std::size_t>() : 1;
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, where + ": " + e.what());
  }
  r.validate();
  return r;
}

json parse_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
}

}  // namespace

ModelReports load_model_reports(const std::filesystem::path& path) {
  const json j = parse_json(path);
  ModelReports out;
  if (!j.is_object() || !j.contains("reports") || !j.at("reports").is_array()) {
    throw Error(Errc::ConfigError, path.string() + ": expected {\"model\", \"reports\": [...]}");
  }
  out.model = j.contains("model") && j.at("model").is_string() ? j.at("model").get<std::string>()
                                                                : path.stem().string();
  for (const json& r : j.at("reports")) out.reports.push_back(report_from(r, path.string()));
  return out;
}

std::pair<std::vector<ModelReports>, Grouping> load_report_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(Errc::IoError, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json" && entry.path().filename() != "grouping.json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ModelReports> models;
  for (const fs::path& f : files) models.push_back(load_model_reports(f));

  Grouping grouping;
  if (fs::exists(dir / "grouping.json")) {
    const json g = parse_json(dir / "grouping.json");
    if (!g.is_object()) throw Error(Errc::ConfigError, "grouping.json must map metric to dimension");
    for (const auto& [name, dim] : g.items()) {
      if (!dim.is_string()) throw Error(Errc::ConfigError, "grouping.json: " + name + " must map to a string");
      grouping[name] = dim.get<std::string>();
    }
  } else {
    std::vector<std::string> names;
    for (const ModelReports& m : models) {
      for (const MetricReport& r : m.reports) names.push_back(r.name);
    }
    grouping = default_grouping(names);
  }
  return {models, grouping};
}

}  // namespace scm::harness
