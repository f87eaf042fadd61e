#include "pad/metrics.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>

#include "pad/errors.hpp"

namespace pad {

std::string to_string(Task task) { return task == Task::Anomaly ? "anomaly" : "poa"; }

EvalReport evaluate(std::span<const double> probabilities, std::span<const int> labels,
                    double threshold, Task task) {
  if (probabilities.size() != labels.size()) {
    throw InputError("evaluate: " + std::to_string(probabilities.size()) + " probabilities vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (probabilities.empty()) throw InputError("evaluate: no windows");
  EvalReport r;
  r.task = task;
  r.threshold = threshold;
  r.probabilities.assign(probabilities.begin(), probabilities.end());
  r.labels.assign(labels.begin(), labels.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    if (labels[i] != 0 && labels[i] != 1) throw InputError("evaluate: labels must be 0 or 1");
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++r.tp;
    else if (predicted) ++r.fp;
    else if (actual) ++r.fn;
    else ++r.tn;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = (r.tp + r.fp) ? ratio(r.tp, r.tp + r.fp) : (r.tp + r.fn == 0 ? 1.0 : 0.0);
  r.recall = (r.tp + r.fn) ? ratio(r.tp, r.tp + r.fn) : (r.tp + r.fp == 0 ? 1.0 : 0.0);
  const double denom = r.precision + r.recall;
  r.f1 = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

nlohmann::json to_json(const EvalReport& report, bool include_windows) {
  nlohmann::json j = {
      {"task", to_string(report.task)},
      {"threshold", report.threshold},
      {"precision", report.precision},
      {"recall", report.recall},
      {"f1", report.f1},
      {"precision_pct", 100.0 * report.precision},
      {"recall_pct", 100.0 * report.recall},
      {"f1_pct", 100.0 * report.f1},
      {"counts", {{"tp", report.tp}, {"fp", report.fp}, {"tn", report.tn}, {"fn", report.fn}}},
  };
  if (include_windows) {
    j["probabilities"] = report.probabilities;
    j["labels"] = report.labels;
  }
  return j;
}

std::string format_table(std::span<const EvalReport> reports) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %6s %6s %6s %6s\n", "task", "precision",
                "recall", "f1", "tp", "fp", "tn", "fn");
  out += line;
  for (const EvalReport& r : reports) {
    std::snprintf(line, sizeof line, "%-10s %10.2f %10.2f %10.2f %6zu %6zu %6zu %6zu\n",
                  to_string(r.task).c_str(), 100.0 * r.precision, 100.0 * r.recall, 100.0 * r.f1,
                  r.tp, r.fp, r.tn, r.fn);
    out += line;
  }
  return out;
}

}  // namespace pad
