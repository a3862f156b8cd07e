#include "mecpart/metrics.hpp"

#include <cmath>

#include "mecpart/error.hpp"

namespace mecpart {

double jain_index(std::span<const double> delays) {
  if (delays.empty()) throw ParameterError("fairness index needs at least one delay");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double d : delays) {
    if (!(d > 0.0)) throw ParameterError("fairness index needs positive delays");
    sum += d;
    sum_sq += d * d;
  }
  return sum * sum / (static_cast<double>(delays.size()) * sum_sq);
}

std::optional<double> try_jain_index(std::span<const double> delays) {
  if (delays.empty()) return std::nullopt;
  for (double d : delays)
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
  return jain_index(delays);
}

}  // namespace mecpart
