#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoweak/errors.hpp"

namespace geoweak {

// Raw AP tables for rendering: groups of (fraction rows x arms), each arm a
// value per IoU threshold. Values are fractions in [0,1] unless
// percent_scale is set (already x100, as printed in result tables).
struct ReportRow {
  std::string fraction;                            // display label, e.g. "1%"
  std::map<std::string, std::vector<double>> arms;  // arm -> per-threshold AP
};

struct ReportGroup {
  std::string dataset;
  std::vector<ReportRow> rows;
};

// Explicit delta between two table cells, rendered as a - b.
struct ReportComparison {
  std::string label;
  std::string a_dataset, a_fraction, a_arm;
  double a_threshold = 0.5;
  std::string b_dataset, b_fraction, b_arm;
  double b_threshold = 0.5;
};

struct ReportInput {
  bool percent_scale = false;
  std::vector<double> thresholds;
  std::vector<ReportGroup> groups;
  std::vector<ReportComparison> comparisons;
};

struct ReportOutput {
  std::string table_text;
  std::string csv_text;
};

namespace detail {

// Display convention: AP x100, one decimal, halves away from zero.
inline double display_value(double v, bool percent_scale) {
  return percent_scale ? v : v * 100.0;
}

inline double round_tenth(double v) { return std::round(v * 10.0) / 10.0; }

inline std::string fmt_tenth(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", round_tenth(v));
  // Avoid the "-0.0" rendering.
  if (std::string(buf) == "-0.0") return "0.0";
  return buf;
}

inline std::string fmt_signed_tenth(double v) {
  const double r = round_tenth(v);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.1f", r == 0.0 ? 0.0 : r);
  return buf;
}

inline std::string fmt_threshold(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

}  // namespace detail

// Renders the AP table plus delta lines: fraction-to-fraction deltas within
// each arm, arm-vs-arm deltas within each row, and any explicit comparisons.
// Deltas are arithmetic differences of the inputs rounded half-away-from-zero
// to one decimal.
inline ReportOutput render_report(const ReportInput& input) {
  const std::size_t n_thresholds = input.thresholds.size();
  if (n_thresholds == 0) {
    throw validation_error("report: at least one threshold required");
  }

  // Arm sets must agree across the rows of a group so deltas line up.
  for (const auto& group : input.groups) {
    for (const auto& row : group.rows) {
      if (row.arms.empty()) {
        throw validation_error("report: row '" + row.fraction + "' of '" +
                               group.dataset + "' has no arms");
      }
      for (const auto& [arm, values] : row.arms) {
        if (values.size() != n_thresholds) {
          throw validation_error("report: arm '" + arm + "' of '" +
                                 group.dataset + "' row '" + row.fraction +
                                 "' has wrong value count");
        }
      }
      if (row.arms.size() != group.rows.front().arms.size() ||
          !std::equal(row.arms.begin(), row.arms.end(),
                      group.rows.front().arms.begin(),
                      [](const auto& a, const auto& b) { return a.first == b.first; })) {
        throw validation_error("report: mismatched arm sets between rows of '" +
                               group.dataset + "'");
      }
    }
  }

  auto lookup = [&](const std::string& dataset, const std::string& fraction,
                    const std::string& arm, double threshold) -> double {
    for (const auto& group : input.groups) {
      if (group.dataset != dataset) continue;
      for (const auto& row : group.rows) {
        if (row.fraction != fraction) continue;
        auto it = row.arms.find(arm);
        if (it == row.arms.end()) break;
        for (std::size_t t = 0; t < n_thresholds; ++t) {
          if (input.thresholds[t] == threshold) return it->second[t];
        }
      }
    }
    throw validation_error("report: no cell (" + dataset + ", " + fraction +
                           ", " + arm + ", " + detail::fmt_threshold(threshold) +
                           ")");
  };

  std::ostringstream text;
  std::ostringstream csv;
  csv << "kind,dataset,fraction,arm,threshold,value\n";

  auto disp = [&](double v) { return detail::display_value(v, input.percent_scale); };

  text << "mAP by IoU threshold\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %-10s %-12s", "dataset", "fraction",
                "arm");
  text << line;
  for (double t : input.thresholds) {
    std::snprintf(line, sizeof(line), " %9s",
                  ("IoU=" + detail::fmt_threshold(t)).c_str());
    text << line;
  }
  text << "\n";

  for (const auto& group : input.groups) {
    for (const auto& row : group.rows) {
      for (const auto& [arm, values] : row.arms) {
        std::snprintf(line, sizeof(line), "%-28s %-10s %-12s",
                      group.dataset.c_str(), row.fraction.c_str(), arm.c_str());
        text << line;
        for (std::size_t t = 0; t < n_thresholds; ++t) {
          std::snprintf(line, sizeof(line), " %9s",
                        detail::fmt_tenth(disp(values[t])).c_str());
          text << line;
          csv << "ap," << group.dataset << ',' << row.fraction << ',' << arm
              << ',' << detail::fmt_threshold(input.thresholds[t]) << ','
              << detail::fmt_tenth(disp(values[t])) << "\n";
        }
        text << "\n";
      }
    }
  }

  // Fraction-to-fraction deltas per arm.
  bool header_done = false;
  for (const auto& group : input.groups) {
    for (std::size_t r = 0; r + 1 < group.rows.size(); ++r) {
      const auto& lo = group.rows[r];
      const auto& hi = group.rows[r + 1];
      for (const auto& [arm, lo_values] : lo.arms) {
        const auto& hi_values = hi.arms.at(arm);
        if (!header_done) {
          text << "\ndeltas between fractions\n";
          header_done = true;
        }
        std::snprintf(line, sizeof(line), "%-28s %-10s %-12s",
                      group.dataset.c_str(),
                      (lo.fraction + "->" + hi.fraction).c_str(), arm.c_str());
        text << line;
        for (std::size_t t = 0; t < n_thresholds; ++t) {
          const double delta = disp(hi_values[t]) - disp(lo_values[t]);
          std::snprintf(line, sizeof(line), " %9s",
                        detail::fmt_signed_tenth(delta).c_str());
          text << line;
          csv << "delta-fraction," << group.dataset << ',' << lo.fraction
              << "->" << hi.fraction << ',' << arm << ','
              << detail::fmt_threshold(input.thresholds[t]) << ','
              << detail::fmt_signed_tenth(delta) << "\n";
        }
        text << "\n";
      }
    }
  }

  // Arm-vs-arm deltas within each row (every ordered pair once).
  header_done = false;
  for (const auto& group : input.groups) {
    for (const auto& row : group.rows) {
      for (auto a = row.arms.begin(); a != row.arms.end(); ++a) {
        for (auto b = std::next(a); b != row.arms.end(); ++b) {
          if (!header_done) {
            text << "\ndeltas between arms\n";
            header_done = true;
          }
          const std::string pair = b->first + "-" + a->first;
          std::snprintf(line, sizeof(line), "%-28s %-10s %-12s",
                        group.dataset.c_str(), row.fraction.c_str(), pair.c_str());
          text << line;
          for (std::size_t t = 0; t < n_thresholds; ++t) {
            const double delta = disp(b->second[t]) - disp(a->second[t]);
            std::snprintf(line, sizeof(line), " %9s",
                          detail::fmt_signed_tenth(delta).c_str());
            text << line;
            csv << "delta-arm," << group.dataset << ',' << row.fraction << ','
                << pair << ',' << detail::fmt_threshold(input.thresholds[t])
                << ',' << detail::fmt_signed_tenth(delta) << "\n";
          }
          text << "\n";
        }
      }
    }
  }

  if (!input.comparisons.empty()) {
    text << "\ncomparisons\n";
    for (const auto& cmp : input.comparisons) {
      const double a = disp(lookup(cmp.a_dataset, cmp.a_fraction, cmp.a_arm,
                                   cmp.a_threshold));
      const double b = disp(lookup(cmp.b_dataset, cmp.b_fraction, cmp.b_arm,
                                   cmp.b_threshold));
      const std::string delta = detail::fmt_signed_tenth(a - b);
      std::snprintf(line, sizeof(line), "%-52s %9s\n", cmp.label.c_str(),
                    delta.c_str());
      text << line;
      csv << "comparison," << cmp.label << ",,,," << delta << "\n";
    }
  }

  return {text.str(), csv.str()};
}

// JSON form consumed by the report CLI. Shape:
// {"scale":"percent"|"fraction", "thresholds":[...],
//  "groups":[{"dataset":..., "rows":[{"fraction":..., "arms":{name:[...]}}]}],
//  "comparisons":[{"label":...,
//    "a":{"dataset":...,"fraction":...,"arm":...,"threshold":...}, "b":{...}}]}
inline ReportInput report_input_from_json(const nlohmann::ordered_json& doc) {
  ReportInput input;
  try {
    if (doc.contains("scale")) {
      const std::string scale = doc["scale"].get<std::string>();
      if (scale == "percent") {
        input.percent_scale = true;
      } else if (scale != "fraction") {
        throw format_error("report input: scale must be percent or fraction");
      }
    }
    for (const auto& t : doc.at("thresholds")) {
      input.thresholds.push_back(t.get<double>());
    }
    for (const auto& g : doc.at("groups")) {
      ReportGroup group;
      group.dataset = g.at("dataset").get<std::string>();
      for (const auto& r : g.at("rows")) {
        ReportRow row;
        row.fraction = r.at("fraction").get<std::string>();
        for (const auto& [arm, values] : r.at("arms").items()) {
          row.arms[arm] = values.get<std::vector<double>>();
        }
        group.rows.push_back(std::move(row));
      }
      input.groups.push_back(std::move(group));
    }
    if (doc.contains("comparisons")) {
      for (const auto& c : doc["comparisons"]) {
        ReportComparison cmp;
        cmp.label = c.at("label").get<std::string>();
        const auto& a = c.at("a");
        const auto& b = c.at("b");
        cmp.a_dataset = a.at("dataset").get<std::string>();
        cmp.a_fraction = a.at("fraction").get<std::string>();
        cmp.a_arm = a.at("arm").get<std::string>();
        cmp.a_threshold = a.at("threshold").get<double>();
        cmp.b_dataset = b.at("dataset").get<std::string>();
        cmp.b_fraction = b.at("fraction").get<std::string>();
        cmp.b_arm = b.at("arm").get<std::string>();
        cmp.b_threshold = b.at("threshold").get<double>();
        input.comparisons.push_back(std::move(cmp));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("report input: ") + e.what());
  }
  return input;
}

}  // namespace geoweak
