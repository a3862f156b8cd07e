#pragma once

#include <optional>
#include <span>

namespace mecpart {

/// Jain fairness (sum L)^2 / (N sum L^2). Throws ParameterError for an empty
/// input or a nonpositive delay.
double jain_index(std::span<const double> delays);

/// jain_index, or nullopt when some delay is not finite and positive.
std::optional<double> try_jain_index(std::span<const double> delays);

}  // namespace mecpart
