#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pad {

enum class Task { Anomaly, Poa };
std::string to_string(Task task);

struct EvalReport {
  Task task = Task::Anomaly;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double threshold = 0.5;
  std::vector<double> probabilities;
  std::vector<int> labels;
};

// Window-level metrics with prediction = (prob >= threshold). A zero
// denominator gives 1 when there was nothing to find and nothing was found,
// otherwise 0.
EvalReport evaluate(std::span<const double> probabilities, std::span<const int> labels,
                    double threshold = 0.5, Task task = Task::Anomaly);

nlohmann::json to_json(const EvalReport& report, bool include_windows = true);
// Aligned table, metrics in percent.
std::string format_table(std::span<const EvalReport> reports);

}  // namespace pad
