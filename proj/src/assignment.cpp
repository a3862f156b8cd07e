#include "mecpart/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mecpart/error.hpp"

namespace mecpart {

namespace {

constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

class Matcher {
 public:
  Matcher(const DelayMatrix& m, const ExtendedDelay& threshold)
      : m_(m), threshold_(threshold), col_owner_(m.cols(), kUnassigned), visited_(m.cols(), 0) {}

  std::optional<std::vector<std::size_t>> run() {
    for (std::size_t r = 0; r < m_.rows(); ++r) {
      ++stamp_;
      if (!augment(r)) return std::nullopt;
    }
    std::vector<std::size_t> cols(m_.rows(), kUnassigned);
    for (std::size_t c = 0; c < m_.cols(); ++c)
      if (col_owner_[c] != kUnassigned) cols[col_owner_[c]] = c;
    return cols;
  }

 private:
  bool allowed(std::size_t r, std::size_t c) const {
    const auto& d = m_.at(r, c);
    return !d.is_forbidden() && !(threshold_ < d);
  }

  bool augment(std::size_t r) {
    for (std::size_t c = 0; c < m_.cols(); ++c) {
      if (visited_[c] == stamp_ || !allowed(r, c)) continue;
      visited_[c] = stamp_;
      if (col_owner_[c] == kUnassigned || augment(col_owner_[c])) {
        col_owner_[c] = r;
        return true;
      }
    }
    return false;
  }

  const DelayMatrix& m_;
  ExtendedDelay threshold_;
  std::vector<std::size_t> col_owner_;
  std::vector<unsigned> visited_;
  unsigned stamp_ = 0;
};

// Lexicographic assignment cost: forbidden cells, violated cells, ratio sum.
// Forms an ordered group, so Hungarian potentials work unchanged.
struct LexCost {
  double forbidden = 0.0;
  double violated = 0.0;
  double ratio = 0.0;

  friend LexCost operator+(LexCost a, LexCost b) {
    return {a.forbidden + b.forbidden, a.violated + b.violated, a.ratio + b.ratio};
  }
  friend LexCost operator-(LexCost a, LexCost b) {
    return {a.forbidden - b.forbidden, a.violated - b.violated, a.ratio - b.ratio};
  }
  friend bool operator<(const LexCost& a, const LexCost& b) {
    if (a.forbidden != b.forbidden) return a.forbidden < b.forbidden;
    if (a.violated != b.violated) return a.violated < b.violated;
    return a.ratio < b.ratio;
  }
};

constexpr double kRatioCap = 1e12;

LexCost cell_cost(const ExtendedDelay& d) {
  switch (d.tier) {
    case DelayTier::Finite: return {0.0, 0.0, d.ratio};
    case DelayTier::DeadlineViolated: return {0.0, 1.0, std::min(d.ratio, kRatioCap)};
    case DelayTier::Forbidden: return {1.0, 0.0, 0.0};
  }
  return {1.0, 0.0, 0.0};
}

// Rectangular Hungarian (rows <= cols), O(rows^2 * cols). `cap` turns every
// entry above it into a forbidden cell.
std::vector<std::size_t> min_cost_columns(const DelayMatrix& m, const ExtendedDelay* cap) {
  const std::size_t n = m.rows();
  const std::size_t k = m.cols();
  if (n > k) throw InfeasibleError("more partitions than processing locations");
  auto cost = [&](std::size_t r, std::size_t c) {
    const auto& d = m.at(r, c);
    if (cap && *cap < d) return LexCost{1.0, 0.0, 0.0};
    return cell_cost(d);
  };
  const LexCost inf{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  // 1-based arrays; index 0 is the virtual column/row.
  std::vector<LexCost> u(n + 1), v(k + 1);
  std::vector<std::size_t> p(k + 1, 0), way(k + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<LexCost> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      LexCost delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const LexCost cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] = u[p[j]] + delta;
          v[j] = v[j] - delta;
        } else {
          minv[j] = minv[j] - delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> cols(n, kUnassigned);
  for (std::size_t j = 1; j <= k; ++j)
    if (p[j] != 0) cols[p[j] - 1] = j - 1;
  return cols;
}

std::vector<ExtendedDelay> distinct_values(const DelayMatrix& m) {
  std::vector<ExtendedDelay> vals;
  vals.reserve(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (!m.at(r, c).is_forbidden()) vals.push_back(m.at(r, c));
  std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a < b; });
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return vals;
}

ExtendedDelay largest_row_minimum(const DelayMatrix& m) {
  ExtendedDelay c = ExtendedDelay::from_ratio(-std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    ExtendedDelay row_min = ExtendedDelay::forbidden();
    for (std::size_t col = 0; col < m.cols(); ++col)
      if (m.at(r, col) < row_min) row_min = m.at(r, col);
    if (row_min.is_forbidden()) throw InfeasibleError("row " + std::to_string(r) + " has no allowed location");
    if (c < row_min) c = row_min;
  }
  return c;
}

}  // namespace

std::vector<Schedule::Entry> Schedule::triples(const DelayMatrix& matrix) const {
  std::vector<Entry> out;
  out.reserve(columns.size());
  for (std::size_t r = 0; r < columns.size(); ++r) out.push_back({r, columns[r], matrix.at(r, columns[r])});
  return out;
}

Schedule make_schedule(const DelayMatrix& matrix, std::vector<std::size_t> columns) {
  if (columns.size() != matrix.rows()) throw InfeasibleError("schedule does not cover every partition");
  std::vector<char> used(matrix.cols(), 0);
  Schedule s;
  s.bottleneck = ExtendedDelay::from_ratio(-std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < columns.size(); ++r) {
    const std::size_t c = columns[r];
    if (c >= matrix.cols()) throw InfeasibleError("partition " + std::to_string(r) + " is unassigned");
    if (used[c]) throw InfeasibleError("column " + std::to_string(c) + " used twice");
    used[c] = 1;
    const auto& d = matrix.at(r, c);
    if (d.is_forbidden()) throw InfeasibleError("partition " + std::to_string(r) + " placed on a forbidden cell");
    if (s.bottleneck < d) s.bottleneck = d;
    s.ratio_sum += d.ratio;
    if (d.tier == DelayTier::DeadlineViolated) ++s.violated;
  }
  s.completion = task_completion(matrix, columns);
  s.columns = std::move(columns);
  return s;
}

std::optional<std::vector<std::size_t>> hungarian_match(const DelayMatrix& matrix, const ExtendedDelay& threshold) {
  if (matrix.rows() > matrix.cols()) return std::nullopt;
  return Matcher(matrix, threshold).run();
}

ExtendedDelay bottleneck_threshold(const DelayMatrix& matrix, ThresholdSearch search) {
  if (matrix.rows() == 0) throw InfeasibleError("empty delay matrix");
  if (matrix.rows() > matrix.cols()) throw InfeasibleError("more partitions than processing locations");
  const ExtendedDelay start = largest_row_minimum(matrix);
  const auto values = distinct_values(matrix);
  auto first = std::lower_bound(values.begin(), values.end(), start,
                                [](const auto& a, const auto& b) { return a < b; });
  if (search == ThresholdSearch::Linear) {
    for (auto it = first; it != values.end(); ++it)
      if (hungarian_match(matrix, *it)) return *it;
    throw InfeasibleError("no perfect matching over the allowed cells");
  }
  // Smallest feasible value; feasibility is monotone in the threshold.
  auto lo = first;
  auto hi = values.end();
  while (lo < hi) {
    auto mid = lo + (hi - lo) / 2;
    if (hungarian_match(matrix, *mid)) hi = mid;
    else lo = mid + 1;
  }
  if (lo == values.end()) throw InfeasibleError("no perfect matching over the allowed cells");
  return *lo;
}

Schedule fdmts(const DelayMatrix& matrix, ThresholdSearch search) {
  const ExtendedDelay c = bottleneck_threshold(matrix, search);
  return make_schedule(matrix, min_cost_columns(matrix, &c));
}

Schedule min_sum_assignment(const DelayMatrix& matrix) {
  if (matrix.rows() == 0) throw InfeasibleError("empty delay matrix");
  auto cols = min_cost_columns(matrix, nullptr);
  for (std::size_t r = 0; r < cols.size(); ++r)
    if (matrix.at(r, cols[r]).is_forbidden()) throw InfeasibleError("no assignment avoids forbidden cells");
  return make_schedule(matrix, std::move(cols));
}

Schedule greedy_schedule(const DelayMatrix& matrix) {
  std::vector<std::size_t> order(matrix.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return matrix.row(a).cycles > matrix.row(b).cycles; });
  std::vector<char> used(matrix.cols(), 0);
  std::vector<std::size_t> cols(matrix.rows(), kUnassigned);
  for (std::size_t r : order) {
    std::size_t best = kUnassigned;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (used[c] || matrix.at(r, c).is_forbidden()) continue;
      if (best == kUnassigned || matrix.at(r, c) < matrix.at(r, best)) best = c;
    }
    if (best == kUnassigned) throw InfeasibleError("greedy: partition " + std::to_string(r) + " has no free location");
    used[best] = 1;
    cols[r] = best;
  }
  return make_schedule(matrix, std::move(cols));
}

Schedule random_schedule(const DelayMatrix& matrix, Rng& rng, std::size_t retry_budget) {
  std::vector<std::size_t> free_cols;
  for (std::size_t attempt = 0; attempt < retry_budget; ++attempt) {
    std::vector<char> used(matrix.cols(), 0);
    std::vector<std::size_t> cols(matrix.rows(), kUnassigned);
    bool complete = true;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      free_cols.clear();
      for (std::size_t c = 0; c < matrix.cols(); ++c)
        if (!used[c] && !matrix.at(r, c).is_forbidden()) free_cols.push_back(c);
      if (free_cols.empty()) {
        complete = false;
        break;
      }
      std::uniform_int_distribution<std::size_t> pick(0, free_cols.size() - 1);
      cols[r] = free_cols[pick(rng)];
      used[cols[r]] = 1;
    }
    if (complete) return make_schedule(matrix, std::move(cols));
  }
  throw InfeasibleError("random schedule: retry budget exhausted");
}

Schedule local_schedule(std::span<const TaskSpec> tasks, const SystemState& state, const RadioParams& radio,
                        DelayMatrix* matrix) {
  DelayMatrix m = build_delay_matrix(tasks, nosp_action(tasks), state, radio);
  std::vector<std::size_t> cols(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) cols[r] = m.es_column(m.row(r).task);
  Schedule s = make_schedule(m, std::move(cols));
  if (matrix) *matrix = std::move(m);
  return s;
}

}  // namespace mecpart
