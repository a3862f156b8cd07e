#include "mecpart/quantizer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mecpart/error.hpp"

namespace mecpart {

std::vector<int> stq_labels(std::span<const double> values, std::size_t q, std::size_t num_quantized) {
  const std::size_t k = values.size();
  if (k == 0) return {};
  if (num_quantized == 0) throw ParameterError("STQ needs Q >= 1");
  // bin[i] in 0..k-1; k-1 is the residue bin.
  std::vector<std::size_t> bin(k, k - 1);
  std::vector<bool> placed(k, false);
  const double denom = static_cast<double>(num_quantized * k);
  for (std::size_t j = 1; j < k; ++j) {
    // Single rounding: ((j-1) Q + q) / (Q K) and (j Q + q) / (Q K).
    const double lo = static_cast<double>((j - 1) * num_quantized + q) / denom;
    const double hi = static_cast<double>(j * num_quantized + q) / denom;
    for (std::size_t i = 0; i < k; ++i) {
      if (placed[i]) continue;
      if (lo <= values[i] && values[i] < hi) {
        bin[i] = j - 1;
        placed[i] = true;
      }
    }
  }
  // Each result takes the smallest result index in its bin, then renumber.
  std::vector<int> smallest(k, std::numeric_limits<int>::max());
  for (std::size_t i = 0; i < k; ++i) smallest[bin[i]] = std::min(smallest[bin[i]], static_cast<int>(i) + 1);
  std::vector<int> raw(k);
  for (std::size_t i = 0; i < k; ++i) raw[i] = smallest[bin[i]];
  return canonicalize(raw);
}

std::vector<PartitionAction> stq_quantize(const RelaxedAction& relaxed, std::size_t num_quantized) {
  if (num_quantized == 0) throw ParameterError("STQ needs Q >= 1");
  std::vector<PartitionAction> out(num_quantized);
  for (std::size_t q = 0; q < num_quantized; ++q) {
    out[q].labels.reserve(relaxed.values.size());
    for (const auto& task : relaxed.values) out[q].labels.push_back(stq_labels(task, q, num_quantized));
  }
  return out;
}

std::vector<int> kmeans_labels(std::span<const double> values, std::size_t k) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  if (k == 0) throw ParameterError("k-means needs k >= 1");
  k = std::min(k, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[order[i]];
    prefix[i + 1] = prefix[i] + v;
    prefix_sq[i + 1] = prefix_sq[i] + v * v;
  }
  // Within-cluster squared deviation of sorted[a..b).
  auto sse = [&](std::size_t a, std::size_t b) {
    const double cnt = static_cast<double>(b - a);
    const double s = prefix[b] - prefix[a];
    return std::max(0.0, (prefix_sq[b] - prefix_sq[a]) - s * s / cnt);
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  // cost[c][i]: best split of the first i sorted values into c clusters.
  std::vector<std::vector<double>> cost(k + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(k + 1, std::vector<std::size_t>(n + 1, 0));
  cost[0][0] = 0.0;
  for (std::size_t c = 1; c <= k; ++c) {
    for (std::size_t i = c; i <= n; ++i) {
      for (std::size_t s = c - 1; s < i; ++s) {
        if (cost[c - 1][s] == inf) continue;
        const double v = cost[c - 1][s] + sse(s, i);
        if (v < cost[c][i]) {  // strict: earliest split wins ties
          cost[c][i] = v;
          cut[c][i] = s;
        }
      }
    }
  }
  std::vector<int> raw(n, 0);
  std::size_t end = n;
  for (std::size_t c = k; c >= 1; --c) {
    const std::size_t start = cut[c][end];
    for (std::size_t i = start; i < end; ++i) raw[order[i]] = static_cast<int>(c);
    end = start;
  }
  return canonicalize(raw);
}

std::vector<PartitionAction> kmeans_quantize(const RelaxedAction& relaxed, std::span<const std::size_t> ks) {
  std::vector<PartitionAction> out;
  out.reserve(ks.size());
  for (std::size_t k : ks) {
    PartitionAction a;
    for (const auto& task : relaxed.values) a.labels.push_back(kmeans_labels(task, std::min(k, task.size())));
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<PartitionAction> kmeans_quantize(const RelaxedAction& relaxed) {
  std::size_t kmax = 1;
  for (const auto& task : relaxed.values) kmax = std::max(kmax, task.size());
  std::vector<std::size_t> ks(kmax);
  std::iota(ks.begin(), ks.end(), std::size_t{1});
  return kmeans_quantize(relaxed, ks);
}

std::vector<Candidate> filter_candidates(std::span<const PartitionAction> raw,
                                         std::span<const std::size_t> results_per_task, std::size_t num_ads) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    PartitionAction a = canonicalize(raw[i]);
    if (!validate_action(a, results_per_task, results_per_task.size(), num_ads)) continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Candidate& c) { return c.action == a; });
    if (!seen) out.push_back({std::move(a), i});
  }
  return out;
}

RelaxedAction normalize_action(const PartitionAction& action) {
  RelaxedAction out;
  out.values.reserve(action.labels.size());
  for (const auto& row : action.labels) {
    std::vector<double> v(row.size());
    const double k = static_cast<double>(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) v[i] = static_cast<double>(row[i]) / k;
    out.values.push_back(std::move(v));
  }
  return out;
}

}  // namespace mecpart
