#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "decomp/types.hpp"

// Brute-force reference implementations. Deliberately naive and independent
// of the core library; sizes are capped so they stay cheap.
namespace decomp::oracle {

inline constexpr std::size_t kMaxSequence = 8;
inline constexpr std::size_t kMaxStates = 5;
inline constexpr std::size_t kMaxDim = 5;

using Matrix = std::vector<std::vector<double>>;

struct PathResult {
    std::vector<int> path;
    double probability = 0.0;  // joint probability of path and observations
};

/// Enumerates every mode path. Paths within 1e-10 (relative) of the best are
/// tied; the tie goes to the path smallest when read from the last frame back.
/// Throws ValidationError beyond kMaxSequence observations or kMaxStates modes.
PathResult exhaustive_viterbi(const std::vector<int>& obs, const Matrix& T, const Matrix& Z,
                              const std::vector<double>& prior);

struct EulerState {
    double x = 0, y = 0, psi = 0, v = 0;
};

/// Forward Euler with held inputs; psi is left unwrapped. Records the state
/// every `record_every` seconds (0: only the final state).
std::vector<std::pair<double, EulerState>> euler_reference(EulerState s0, double u_lat, double u_lon,
                                                           const VehicleParams& p, double dt, double duration,
                                                           double record_every = 0.0);

/// Unbiased covariance by explicit double sums. At most kMaxDim columns.
Matrix hand_covariance(const Matrix& rows);

/// Constraint code of one sample, each channel's band `fraction` of its range.
std::array<int, 4> relabel(const TrajectorySample& s, const VehicleParams& p, double fraction = 0.02);

}  // namespace decomp::oracle
