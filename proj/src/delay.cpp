#include "mecpart/delay.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "mecpart/error.hpp"

namespace mecpart {

std::string to_string(const ExtendedDelay& d) {
  std::ostringstream os;
  switch (d.tier) {
    case DelayTier::Finite: os << d.ratio; break;
    case DelayTier::DeadlineViolated: os << d.ratio << "!"; break;
    case DelayTier::Forbidden: os << "inf"; break;
  }
  return os.str();
}

std::size_t Placement::index(std::size_t num_ads) const {
  switch (kind) {
    case Kind::EdgeServer: return 0;
    case Kind::Auxiliary: return ad + 1;
    case Kind::Local: return num_ads + 1;
  }
  return 0;
}

Placement Placement::from_index(std::size_t l, std::size_t num_ads) {
  if (l == 0) return {Kind::EdgeServer, 0};
  if (l <= num_ads) return {Kind::Auxiliary, l - 1};
  if (l == num_ads + 1) return {Kind::Local, 0};
  throw ParameterError("placement index out of range");
}

double shannon_rate(double bandwidth_hz, double tx_power_w, double gain, double noise_w) {
  if (gain == 0.0) return 0.0;
  return bandwidth_hz * std::log2(1.0 + tx_power_w * gain / noise_w);
}

double uplink_rate(std::size_t td, const SystemState& state, const RadioParams& radio) {
  return shannon_rate(radio.bandwidth_hz, radio.td_tx_power_w, state.gains.td_uplink.at(td), radio.noise_w);
}

double td_downlink_rate(std::size_t td, const SystemState& state, const RadioParams& radio) {
  return shannon_rate(radio.bandwidth_hz, radio.bs_tx_power_w, state.gains.td_downlink.at(td), radio.noise_w);
}

double ad_downlink_rate(std::size_t ad, const SystemState& state, const RadioParams& radio) {
  return shannon_rate(radio.bandwidth_hz, radio.bs_tx_power_w, state.gains.ad_downlink.at(ad), radio.noise_w);
}

namespace {

double transfer_seconds(double bits, double rate) {
  if (bits == 0.0) return 0.0;
  if (rate == 0.0) return std::numeric_limits<double>::infinity();
  return bits / rate;
}

double compute_seconds(double cycles, double hz) {
  if (!(hz > 0.0)) throw ParameterError("cpu frequency must be positive");
  return cycles / hz;
}

}  // namespace

double upload_delay(const TaskSpec& task, std::size_t td, const SystemState& state, const RadioParams& radio) {
  return transfer_seconds(task.data_bits, uplink_rate(td, state, radio));
}

double partition_seconds(const Partition& part, Placement where, const TaskSpec& task, std::size_t td,
                         const SystemState& state, const RadioParams& radio) {
  const double upload = upload_delay(task, td, state, radio);
  switch (where.kind) {
    case Placement::Kind::EdgeServer:
      return upload + compute_seconds(part.cycles, state.es_hz.at(td));
    case Placement::Kind::Auxiliary:
      return upload + transfer_seconds(part.data_bits, ad_downlink_rate(where.ad, state, radio)) +
             compute_seconds(part.cycles, state.ad_hz.at(where.ad));
    case Placement::Kind::Local:
      return upload + transfer_seconds(part.data_bits, td_downlink_rate(td, state, radio)) +
             compute_seconds(part.cycles, state.td_hz.at(td));
  }
  return upload;
}

ExtendedDelay partition_delay(const Partition& part, Placement where, const TaskSpec& task, std::size_t td,
                              const SystemState& state, const RadioParams& radio) {
  return ExtendedDelay::from_ratio(partition_seconds(part, where, task, td, state, radio) / task.deadline_s);
}

DelayMatrix::DelayMatrix(std::size_t num_tds, std::size_t num_ads, std::vector<RowInfo> rows)
    : num_tds_(num_tds),
      num_ads_(num_ads),
      cols_(2 * num_tds + num_ads),
      row_info_(std::move(rows)),
      cells_(row_info_.size() * cols_),
      seconds_(row_info_.size() * cols_, std::numeric_limits<double>::infinity()) {}

DelayMatrix DelayMatrix::from_ratios(std::size_t rows, std::size_t cols, std::span<const double> ratios) {
  if (ratios.size() != rows * cols) throw ParameterError("grid size does not match rows x cols");
  DelayMatrix m;
  m.num_tds_ = 0;
  m.num_ads_ = cols;
  m.cols_ = cols;
  m.row_info_.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) m.row_info_[r].task = r;
  m.cells_.resize(rows * cols);
  m.seconds_.resize(rows * cols);
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double v = ratios[i];
    m.cells_[i] = std::isinf(v) && v > 0 ? ExtendedDelay::forbidden() : ExtendedDelay::from_ratio(v);
    m.seconds_[i] = v;
  }
  return m;
}

void DelayMatrix::set(std::size_t r, std::size_t c, ExtendedDelay d, double seconds) {
  cells_[r * cols_ + c] = d;
  seconds_[r * cols_ + c] = seconds;
}

Placement DelayMatrix::column_placement(std::size_t c, std::size_t td) const {
  if (c >= cols_) throw ParameterError("column out of range");
  if (c < num_tds_) {
    if (c != td) throw ParameterError("column belongs to another task device");
    return {Placement::Kind::Local, 0};
  }
  if (c < num_tds_ + num_ads_) return {Placement::Kind::Auxiliary, c - num_tds_};
  if (c - num_tds_ - num_ads_ != td) throw ParameterError("edge-server slice belongs to another task device");
  return {Placement::Kind::EdgeServer, 0};
}

void DelayMatrix::write_grid(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      if (c) os << ' ';
      os << to_string(at(r, c));
    }
    os << '\n';
  }
  os.precision(old_precision);
}

DelayMatrix DelayMatrix::read_grid(std::istream& is) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
      continue;
    std::istringstream ls(line);
    std::string tok;
    std::size_t count = 0;
    while (ls >> tok) {
      if (!tok.empty() && tok.back() == '!') tok.pop_back();
      if (tok == "inf" || tok == "Inf" || tok == "INF") {
        values.push_back(std::numeric_limits<double>::infinity());
      } else {
        try {
          std::size_t used = 0;
          values.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw ParameterError("bad grid token '" + tok + "'");
        }
      }
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw ParameterError("ragged grid: row " + std::to_string(rows + 1));
    ++rows;
  }
  if (rows == 0) throw ParameterError("empty grid");
  return from_ratios(rows, cols, values);
}

DelayMatrix build_delay_matrix(std::span<const TaskSpec> tasks, std::span<const PartitionSet> partitions,
                               const SystemState& state, const RadioParams& radio) {
  const std::size_t n_tds = tasks.size();
  const std::size_t n_ads = state.num_ads();
  if (partitions.size() != n_tds || state.num_tds() != n_tds)
    throw ParameterError("tasks, partitions and state disagree on the number of task devices");

  std::vector<RowInfo> rows;
  for (std::size_t n = 0; n < n_tds; ++n)
    for (std::size_t k = 0; k < partitions[n].size(); ++k)
      rows.push_back({n, k, partitions[n][k].cycles, partitions[n][k].data_bits, tasks[n].deadline_s});

  DelayMatrix m(n_tds, n_ads, std::move(rows));
  std::size_t r = 0;
  for (std::size_t n = 0; n < n_tds; ++n) {
    for (const auto& part : partitions[n]) {
      auto fill = [&](std::size_t col, Placement where) {
        const double s = partition_seconds(part, where, tasks[n], n, state, radio);
        m.set(r, col, ExtendedDelay::from_ratio(s / tasks[n].deadline_s), s);
      };
      fill(m.td_column(n), {Placement::Kind::Local, 0});
      for (std::size_t a = 0; a < n_ads; ++a) fill(m.ad_column(a), {Placement::Kind::Auxiliary, a});
      fill(m.es_column(n), {Placement::Kind::EdgeServer, 0});
      ++r;
    }
  }
  return m;
}

DelayMatrix build_delay_matrix(std::span<const TaskSpec> tasks, const PartitionAction& action,
                               const SystemState& state, const RadioParams& radio) {
  if (action.num_tasks() != tasks.size()) throw ValidationError("action does not cover every task device");
  std::vector<PartitionSet> sets;
  sets.reserve(tasks.size());
  for (std::size_t n = 0; n < tasks.size(); ++n) sets.push_back(derive_partitions(tasks[n], action.labels[n]));
  return build_delay_matrix(tasks, sets, state, radio);
}

TaskCompletion task_completion(const DelayMatrix& matrix, std::span<const std::size_t> columns) {
  if (columns.size() != matrix.rows()) throw ParameterError("every partition must be assigned");
  std::size_t n_tasks = matrix.num_tds();
  for (const auto& info : matrix.row_info()) n_tasks = std::max(n_tasks, info.task + 1);
  TaskCompletion out;
  out.seconds.assign(n_tasks, 0.0);
  out.eta.assign(n_tasks, ExtendedDelay::from_ratio(0.0));
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (columns[r] >= matrix.cols()) throw ParameterError("partition " + std::to_string(r) + " is unassigned");
    const std::size_t n = matrix.row(r).task;
    out.seconds[n] = std::max(out.seconds[n], matrix.seconds(r, columns[r]));
    const auto& d = matrix.at(r, columns[r]);
    if (out.eta[n] < d) out.eta[n] = d;
  }
  return out;
}

}  // namespace mecpart
