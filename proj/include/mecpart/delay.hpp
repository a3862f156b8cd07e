#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mecpart/partition.hpp"
#include "mecpart/system_model.hpp"

namespace mecpart {

enum class DelayTier : unsigned char { Finite = 0, DeadlineViolated = 1, Forbidden = 2 };

/// Normalized delay L / T_max with the deadline and placement rules folded
/// into a tier. Ordered by tier, then ratio.
struct ExtendedDelay {
  DelayTier tier = DelayTier::Forbidden;
  double ratio = std::numeric_limits<double>::infinity();

  static ExtendedDelay from_ratio(double r) {
    return {r <= 1.0 ? DelayTier::Finite : DelayTier::DeadlineViolated, r};
  }
  static ExtendedDelay forbidden() { return {}; }

  bool is_forbidden() const { return tier == DelayTier::Forbidden; }

  friend bool operator==(const ExtendedDelay& a, const ExtendedDelay& b) {
    return a.tier == b.tier && (a.tier == DelayTier::Forbidden || a.ratio == b.ratio);
  }
  friend std::partial_ordering operator<=>(const ExtendedDelay& a, const ExtendedDelay& b) {
    if (a.tier != b.tier) return a.tier <=> b.tier;
    if (a.tier == DelayTier::Forbidden) return std::partial_ordering::equivalent;
    return a.ratio <=> b.ratio;
  }
};

std::string to_string(const ExtendedDelay& d);

/// Processing location of a partition, relative to its own TD.
struct Placement {
  enum class Kind : unsigned char { EdgeServer, Auxiliary, Local };
  Kind kind = Kind::EdgeServer;
  std::size_t ad = 0;  // valid for Auxiliary

  /// Index in 0..M+1: 0 = ES, m = AD m (1-based), M+1 = own TD.
  std::size_t index(std::size_t num_ads) const;
  static Placement from_index(std::size_t l, std::size_t num_ads);

  friend bool operator==(const Placement&, const Placement&) = default;
};

double shannon_rate(double bandwidth_hz, double tx_power_w, double gain, double noise_w);
double uplink_rate(std::size_t td, const SystemState& state, const RadioParams& radio);
double td_downlink_rate(std::size_t td, const SystemState& state, const RadioParams& radio);
double ad_downlink_rate(std::size_t ad, const SystemState& state, const RadioParams& radio);

/// Z_n / R_ul. A zero-rate link yields +inf.
double upload_delay(const TaskSpec& task, std::size_t td, const SystemState& state, const RadioParams& radio);

/// Completion time in seconds of one partition of TD `td` at `where`:
/// upload + transmission + computation.
double partition_seconds(const Partition& part, Placement where, const TaskSpec& task, std::size_t td,
                         const SystemState& state, const RadioParams& radio);

ExtendedDelay partition_delay(const Partition& part, Placement where, const TaskSpec& task, std::size_t td,
                              const SystemState& state, const RadioParams& radio);

struct RowInfo {
  std::size_t task = 0;
  std::size_t partition = 0;
  double cycles = 0.0;
  double data_bits = 0.0;
  double deadline_s = 1.0;
};

/// Rows are partitions grouped by TD; columns are N TD-local slots, M ADs,
/// then N per-TD edge-server slices.
class DelayMatrix {
 public:
  DelayMatrix() = default;
  DelayMatrix(std::size_t num_tds, std::size_t num_ads, std::vector<RowInfo> rows);

  /// Raw grid for solver tests and grid import: +inf marks Forbidden. Each row
  /// is its own task with deadline 1 and the column count is free.
  static DelayMatrix from_ratios(std::size_t rows, std::size_t cols, std::span<const double> ratios);

  std::size_t rows() const { return row_info_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t num_tds() const { return num_tds_; }
  std::size_t num_ads() const { return num_ads_; }

  const ExtendedDelay& at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  double seconds(std::size_t r, std::size_t c) const { return seconds_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, ExtendedDelay d, double seconds);

  const RowInfo& row(std::size_t r) const { return row_info_[r]; }
  std::span<const RowInfo> row_info() const { return row_info_; }

  /// Placement of column c relative to TD `td` (throws for a column that TD cannot use).
  Placement column_placement(std::size_t c, std::size_t td) const;
  std::size_t td_column(std::size_t td) const { return td; }
  std::size_t ad_column(std::size_t ad) const { return num_tds_ + ad; }
  std::size_t es_column(std::size_t td) const { return num_tds_ + num_ads_ + td; }

  /// Text grid: one row per line, "inf" for Forbidden, violated entries
  /// suffixed with '!'.
  void write_grid(std::ostream& os) const;
  /// Reads the same format ('!' suffix optional). Builds via from_ratios.
  static DelayMatrix read_grid(std::istream& is);

 private:
  std::size_t num_tds_ = 0;
  std::size_t num_ads_ = 0;
  std::size_t cols_ = 0;
  std::vector<RowInfo> row_info_;
  std::vector<ExtendedDelay> cells_;
  std::vector<double> seconds_;
};

/// Assembles the normalized delay matrix for the given partitions of every task.
DelayMatrix build_delay_matrix(std::span<const TaskSpec> tasks, std::span<const PartitionSet> partitions,
                               const SystemState& state, const RadioParams& radio);

DelayMatrix build_delay_matrix(std::span<const TaskSpec> tasks, const PartitionAction& action,
                               const SystemState& state, const RadioParams& radio);

struct TaskCompletion {
  std::vector<double> seconds;        // L_n
  std::vector<ExtendedDelay> eta;     // L_n / T_max with deadline tier
};

/// Per-TD completion is the slowest of its partitions. `columns[r]` is the
/// column of row r; an unassigned row (npos) throws.
TaskCompletion task_completion(const DelayMatrix& matrix, std::span<const std::size_t> columns);

}  // namespace mecpart
