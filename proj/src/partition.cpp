#include "mecpart/partition.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "mecpart/error.hpp"

namespace mecpart {

std::size_t PartitionAction::num_partitions(std::size_t task) const {
  const auto& row = labels.at(task);
  if (row.empty()) return 0;
  return static_cast<std::size_t>(std::max(0, *std::max_element(row.begin(), row.end())));
}

std::size_t PartitionAction::total_partitions() const {
  std::size_t total = 0;
  for (std::size_t n = 0; n < labels.size(); ++n) total += num_partitions(n);
  return total;
}

std::vector<int> PartitionAction::flat() const {
  std::vector<int> out;
  for (const auto& row : labels) out.insert(out.end(), row.begin(), row.end());
  return out;
}

PartitionAction PartitionAction::from_flat(std::span<const int> flat,
                                           std::span<const std::size_t> results_per_task) {
  const std::size_t expected = std::accumulate(results_per_task.begin(), results_per_task.end(), std::size_t{0});
  if (flat.size() != expected) throw ValidationError("flat action length does not match result counts");
  PartitionAction a;
  std::size_t off = 0;
  for (std::size_t k : results_per_task) {
    a.labels.emplace_back(flat.begin() + off, flat.begin() + off + k);
    off += k;
  }
  return a;
}

std::vector<double> RelaxedAction::flat() const {
  std::vector<double> out;
  for (const auto& row : values) out.insert(out.end(), row.begin(), row.end());
  return out;
}

RelaxedAction RelaxedAction::from_flat(std::span<const double> flat,
                                       std::span<const std::size_t> results_per_task) {
  const std::size_t expected = std::accumulate(results_per_task.begin(), results_per_task.end(), std::size_t{0});
  if (flat.size() != expected) throw ValidationError("flat relaxed action length does not match result counts");
  RelaxedAction a;
  std::size_t off = 0;
  for (std::size_t k : results_per_task) {
    a.values.emplace_back(flat.begin() + off, flat.begin() + off + k);
    off += k;
  }
  return a;
}

const char* to_string(ActionViolation v) {
  switch (v) {
    case ActionViolation::None: return "ok";
    case ActionViolation::TaskCountMismatch: return "task count mismatch";
    case ActionViolation::ResultCountMismatch: return "result count mismatch";
    case ActionViolation::LabelOutOfRange: return "label out of range (8c)";
    case ActionViolation::EmptyPartition: return "empty partition (8d)";
    case ActionViolation::TooManyPartitions: return "more partitions than results (8e)";
    case ActionViolation::NotCanonical: return "labels not canonical";
    case ActionViolation::TaskColumnLimit: return "task exceeds M+2 locations";
    case ActionViolation::TotalColumnLimit: return "total partitions exceed 2N+M";
  }
  return "unknown";
}

namespace {

ActionVerdict reject(ActionViolation v, std::size_t task, std::string msg) {
  return {v, task, std::move(msg)};
}

}  // namespace

ActionVerdict validate_labels(std::span<const int> labels, std::size_t num_results) {
  if (labels.size() != num_results)
    return reject(ActionViolation::ResultCountMismatch, 0, "label vector length differs from result count");
  int max_label = 0;
  for (int l : labels) {
    if (l < 1) return reject(ActionViolation::LabelOutOfRange, 0, "labels must be >= 1");
    max_label = std::max(max_label, l);
  }
  std::vector<bool> used(static_cast<std::size_t>(max_label) + 1, false);
  for (int l : labels) used[static_cast<std::size_t>(l)] = true;
  for (int j = 1; j <= max_label; ++j)
    if (!used[static_cast<std::size_t>(j)])
      return reject(ActionViolation::EmptyPartition, 0, "partition " + std::to_string(j) + " outputs no result");
  if (static_cast<std::size_t>(max_label) > num_results)
    return reject(ActionViolation::TooManyPartitions, 0, "more partitions than results");
  // Canonical: the first occurrence of each label follows 1, 2, 3, ...
  int next = 1;
  for (int l : labels) {
    if (l > next) return reject(ActionViolation::NotCanonical, 0, "labels are not in canonical order");
    if (l == next) ++next;
  }
  return {};
}

ActionVerdict validate_action(const PartitionAction& action, std::span<const std::size_t> results_per_task,
                              std::size_t num_tds, std::size_t num_ads) {
  if (action.num_tasks() != num_tds || results_per_task.size() != num_tds)
    return reject(ActionViolation::TaskCountMismatch, 0, "action does not cover every task device");
  std::size_t total = 0;
  for (std::size_t n = 0; n < num_tds; ++n) {
    auto verdict = validate_labels(action.labels[n], results_per_task[n]);
    if (!verdict) {
      verdict.task = n;
      return verdict;
    }
    const std::size_t k = action.num_partitions(n);
    if (k > num_ads + 2)
      return reject(ActionViolation::TaskColumnLimit, n,
                    "task " + std::to_string(n) + " has " + std::to_string(k) + " partitions but only " +
                        std::to_string(num_ads + 2) + " locations");
    total += k;
  }
  if (total > 2 * num_tds + num_ads)
    return reject(ActionViolation::TotalColumnLimit, 0,
                  std::to_string(total) + " partitions exceed 2N+M = " + std::to_string(2 * num_tds + num_ads));
  return {};
}

ActionVerdict validate_action(const PartitionAction& action, std::span<const TaskSpec> tasks,
                              std::size_t num_ads) {
  const auto counts = results_per_task(tasks);
  return validate_action(action, counts, tasks.size(), num_ads);
}

std::vector<int> canonicalize(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  int next = 1;
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, next);
    if (inserted) ++next;
    out.push_back(it->second);
  }
  return out;
}

PartitionAction canonicalize(const PartitionAction& action) {
  PartitionAction out;
  out.labels.reserve(action.labels.size());
  for (const auto& row : action.labels) out.labels.push_back(canonicalize(row));
  return out;
}

PartitionSet derive_partitions(const TaskSpec& task, std::span<const int> labels) {
  if (auto verdict = validate_labels(labels, task.num_results()); !verdict)
    throw ValidationError("task " + std::to_string(task.id) + ": " + verdict.message);
  const auto k = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end()));
  std::vector<double> weight(k, 0.0);
  PartitionSet parts(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto p = static_cast<std::size_t>(labels[i] - 1);
    weight[p] += task.result_weights[i];
    parts[p].results |= std::uint64_t{1} << i;
  }
  for (std::size_t p = 0; p < k; ++p) {
    parts[p].cycles = task.shared_cycles_frac * task.cycles + (1.0 - task.shared_cycles_frac) * task.cycles * weight[p];
    parts[p].data_bits = task.shared_data_frac * task.data_bits + (1.0 - task.shared_data_frac) * task.data_bits * weight[p];
  }
  return parts;
}

std::vector<std::size_t> results_per_task(std::span<const TaskSpec> tasks) {
  std::vector<std::size_t> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) out.push_back(t.num_results());
  return out;
}

PartitionAction nosp_action(std::span<const TaskSpec> tasks) {
  PartitionAction a;
  for (const auto& t : tasks) a.labels.emplace_back(t.num_results(), 1);
  return a;
}

PartitionAction mingra_action(std::span<const TaskSpec> tasks) {
  PartitionAction a;
  for (const auto& t : tasks) {
    std::vector<int> row(t.num_results());
    std::iota(row.begin(), row.end(), 1);
    a.labels.push_back(std::move(row));
  }
  return a;
}

PartitionAction capped_mingra_action(std::span<const TaskSpec> tasks, std::size_t num_ads) {
  std::vector<std::size_t> caps;
  for (const auto& t : tasks) caps.push_back(std::min(t.num_results(), num_ads + 2));
  const std::size_t budget = 2 * tasks.size() + num_ads;
  std::size_t total = std::accumulate(caps.begin(), caps.end(), std::size_t{0});
  while (total > budget) {
    // Largest cap, lowest index on ties.
    auto it = std::max_element(caps.begin(), caps.end());
    --*it;
    --total;
  }
  PartitionAction a;
  for (std::size_t n = 0; n < tasks.size(); ++n) {
    std::vector<int> row(tasks[n].num_results());
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = static_cast<int>(std::min(i + 1, caps[n]));
    a.labels.push_back(std::move(row));
  }
  return a;
}

std::vector<std::vector<int>> set_partitions(std::size_t n) {
  std::vector<std::vector<int>> out;
  if (n == 0) return out;
  // Restricted growth string a[0] = 1, a[i] <= 1 + max(a[0..i-1]).
  std::vector<int> a(n, 1);
  std::vector<int> prefix_max(n, 1);
  while (true) {
    out.push_back(a);
    // Find rightmost position that can be incremented.
    std::size_t i = n - 1;
    while (i > 0 && a[i] > prefix_max[i - 1]) --i;
    if (i == 0) break;
    ++a[i];
    prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 1;
      prefix_max[j] = prefix_max[i];
    }
  }
  return out;
}

std::uint64_t bell_number(std::size_t n) {
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

void for_each_action(std::span<const TaskSpec> tasks, std::size_t num_ads, bool feasible_only,
                     const std::function<bool(const PartitionAction&)>& visit) {
  if (tasks.empty()) return;
  std::vector<std::vector<std::vector<int>>> per_task;
  per_task.reserve(tasks.size());
  for (const auto& t : tasks) per_task.push_back(set_partitions(t.num_results()));
  const auto counts = results_per_task(tasks);

  std::vector<std::size_t> idx(tasks.size(), 0);
  PartitionAction action;
  action.labels.resize(tasks.size());
  while (true) {
    for (std::size_t n = 0; n < tasks.size(); ++n) action.labels[n] = per_task[n][idx[n]];
    if (!feasible_only || validate_action(action, counts, tasks.size(), num_ads)) {
      if (!visit(action)) return;
    }
    // Odometer with the last task varying fastest.
    std::size_t n = tasks.size();
    while (n > 0) {
      --n;
      if (++idx[n] < per_task[n].size()) break;
      idx[n] = 0;
      if (n == 0) return;
    }
  }
}

std::vector<PartitionAction> enumerate_actions(std::span<const TaskSpec> tasks, std::size_t num_ads,
                                               bool feasible_only) {
  std::vector<PartitionAction> out;
  for_each_action(tasks, num_ads, feasible_only, [&](const PartitionAction& a) {
    out.push_back(a);
    return true;
  });
  return out;
}

}  // namespace mecpart
