#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mecpart/system_model.hpp"

namespace mecpart {

/// Per-task result -> partition labels, 1-based. `labels[n][i]` is the
/// partition that outputs result i of task n.
struct PartitionAction {
  std::vector<std::vector<int>> labels;

  std::size_t num_tasks() const { return labels.size(); }
  /// Largest label of task n (the partition count for canonical actions).
  std::size_t num_partitions(std::size_t task) const;
  std::size_t total_partitions() const;

  /// Flat layout grouped by task in result-index order.
  std::vector<int> flat() const;
  static PartitionAction from_flat(std::span<const int> flat, std::span<const std::size_t> results_per_task);

  friend bool operator==(const PartitionAction&, const PartitionAction&) = default;
};

/// Relaxed form of an action: one value in [0,1] per result.
struct RelaxedAction {
  std::vector<std::vector<double>> values;

  std::vector<double> flat() const;
  static RelaxedAction from_flat(std::span<const double> flat, std::span<const std::size_t> results_per_task);
};

struct Partition {
  std::uint64_t results = 0;  // bit i set => result i is output here
  double data_bits = 0.0;
  double cycles = 0.0;
};

using PartitionSet = std::vector<Partition>;

enum class ActionViolation {
  None,
  TaskCountMismatch,   // action does not cover every task
  ResultCountMismatch, // label vector length != N_res
  LabelOutOfRange,     // constraint (8c)
  EmptyPartition,      // constraint (8d)
  TooManyPartitions,   // constraint (8e)
  NotCanonical,
  TaskColumnLimit,     // more partitions than M + 2 locations of one TD
  TotalColumnLimit,    // more partitions than 2N + M columns
};

const char* to_string(ActionViolation v);

struct ActionVerdict {
  ActionViolation violation = ActionViolation::None;
  std::size_t task = 0;
  std::string message;

  bool ok() const { return violation == ActionViolation::None; }
  explicit operator bool() const { return ok(); }
};

/// Checks one task's label vector for constraints (8c)-(8e) and canonical order.
ActionVerdict validate_labels(std::span<const int> labels, std::size_t num_results);

/// Full feasibility check of an action against N TDs and M ADs.
ActionVerdict validate_action(const PartitionAction& action, std::span<const std::size_t> results_per_task,
                              std::size_t num_tds, std::size_t num_ads);
ActionVerdict validate_action(const PartitionAction& action, std::span<const TaskSpec> tasks,
                              std::size_t num_ads);

/// Relabels to 1..K keeping the grouping; partitions numbered by smallest member.
std::vector<int> canonicalize(std::span<const int> labels);
PartitionAction canonicalize(const PartitionAction& action);

/// Shared-prefix decomposition: each partition duplicates the shared fraction
/// and adds the exclusive shares of its results. Throws ValidationError.
PartitionSet derive_partitions(const TaskSpec& task, std::span<const int> labels);

std::vector<std::size_t> results_per_task(std::span<const TaskSpec> tasks);

/// Every task as a single partition.
PartitionAction nosp_action(std::span<const TaskSpec> tasks);
/// Result i alone in partition i.
PartitionAction mingra_action(std::span<const TaskSpec> tasks);

/// Finest partitioning that still fits the location budget: per-task counts
/// start at min(N_res, M + 2) and the largest is reduced until the total fits
/// 2N + M. Results past the cap join the last partition.
PartitionAction capped_mingra_action(std::span<const TaskSpec> tasks, std::size_t num_ads);

/// Restricted-growth strings of length n in lexicographic order (Bell(n) of them).
std::vector<std::vector<int>> set_partitions(std::size_t n);

std::uint64_t bell_number(std::size_t n);

/// Visits every canonical action (cartesian product of per-task set partitions).
/// With `feasible_only`, actions failing validate_action are skipped.
/// The visitor returns false to stop early.
void for_each_action(std::span<const TaskSpec> tasks, std::size_t num_ads, bool feasible_only,
                     const std::function<bool(const PartitionAction&)>& visit);

std::vector<PartitionAction> enumerate_actions(std::span<const TaskSpec> tasks, std::size_t num_ads,
                                               bool feasible_only);

}  // namespace mecpart
