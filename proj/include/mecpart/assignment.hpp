#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mecpart/delay.hpp"

namespace mecpart {

/// One-to-one partition -> column assignment with its realized metrics.
struct Schedule {
  std::vector<std::size_t> columns;  // per matrix row
  ExtendedDelay bottleneck;          // largest assigned entry
  double ratio_sum = 0.0;            // sum of assigned ratios
  std::size_t violated = 0;          // assigned DeadlineViolated entries
  TaskCompletion completion;         // per-TD L_n and eta_n

  /// (row, column, value) triples in row order.
  struct Entry {
    std::size_t row;
    std::size_t column;
    ExtendedDelay value;
  };
  std::vector<Entry> triples(const DelayMatrix& matrix) const;
};

/// Evaluates a column choice; throws InfeasibleError if it reuses a column or
/// touches a Forbidden cell.
Schedule make_schedule(const DelayMatrix& matrix, std::vector<std::size_t> columns);

/// Maximum bipartite matching by augmenting paths over the edges whose entry
/// is non-Forbidden and <= threshold. Returns row -> column when every row is
/// matched.
std::optional<std::vector<std::size_t>> hungarian_match(const DelayMatrix& matrix, const ExtendedDelay& threshold);

enum class ThresholdSearch { Linear, Binary };

/// Optimal bottleneck value only (no min-sum refinement).
ExtendedDelay bottleneck_threshold(const DelayMatrix& matrix, ThresholdSearch search = ThresholdSearch::Linear);

/// Threshold bottleneck assignment: raise c from the largest row minimum
/// through the distinct matrix values until a perfect matching exists, then
/// pick the min-sum matching among entries <= c.
Schedule fdmts(const DelayMatrix& matrix, ThresholdSearch search = ThresholdSearch::Linear);

/// Kuhn-Munkres minimum-sum assignment. Cost is lexicographic: fewest
/// DeadlineViolated entries first, then the smallest ratio sum.
Schedule min_sum_assignment(const DelayMatrix& matrix);

/// Rows in descending workload order each take the cheapest free column.
Schedule greedy_schedule(const DelayMatrix& matrix);

/// Sequential uniform draws among free non-Forbidden columns; restarts when a
/// row is left without a column.
Schedule random_schedule(const DelayMatrix& matrix, Rng& rng, std::size_t retry_budget = 1000);

/// Whole tasks on their own edge-server slice. `matrix` receives the NOSP
/// delay matrix the schedule refers to.
Schedule local_schedule(std::span<const TaskSpec> tasks, const SystemState& state, const RadioParams& radio,
                        DelayMatrix* matrix = nullptr);

}  // namespace mecpart
