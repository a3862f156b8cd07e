#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mecpart/partition.hpp"

namespace mecpart {

/// Sliding threshold quantization. For q = 1..Q each task's [0,1] values are
/// binned with boundaries (j-1)/K + (q-1)/(Q K), j = 1..K-1 (K = N_res,
/// left-closed bins); values in no bin fall to bin K. Results sharing a bin
/// share a partition. Returns Q canonical actions in q order.
std::vector<PartitionAction> stq_quantize(const RelaxedAction& relaxed, std::size_t num_quantized);

/// One STQ pass for a single task at offset index q (0-based).
std::vector<int> stq_labels(std::span<const double> values, std::size_t q, std::size_t num_quantized);

/// Exact 1-D k-means of `values` into k groups contiguous in sorted order
/// (dynamic programming). Returns canonical labels in input order.
std::vector<int> kmeans_labels(std::span<const double> values, std::size_t k);

/// One action per k in `ks`, with k clamped to each task's N_res.
std::vector<PartitionAction> kmeans_quantize(const RelaxedAction& relaxed, std::span<const std::size_t> ks);

/// k = 1..max N_res.
std::vector<PartitionAction> kmeans_quantize(const RelaxedAction& relaxed);

struct Candidate {
  PartitionAction action;
  std::size_t source = 0;  // index of the raw action that produced it
};

/// Distinct (canonical equality), feasible actions in first-occurrence order.
std::vector<Candidate> filter_candidates(std::span<const PartitionAction> raw,
                                         std::span<const std::size_t> results_per_task, std::size_t num_ads);

/// Divides each label by its task's N_res.
RelaxedAction normalize_action(const PartitionAction& action);

}  // namespace mecpart
