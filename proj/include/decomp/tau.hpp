#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decomp/types.hpp"

namespace decomp {

enum class GapKind { psi, theta, d, v, k };

const char* to_string(GapKind k);
GapKind gap_kind_from_string(const std::string& s);

struct GapSeries {
    std::string name;
    std::vector<double> t;
    std::vector<double> g;
    std::vector<double> gdot;
    std::vector<double> tau;
    std::vector<bool> defined;  // g (and gdot) available
    std::vector<bool> valid;    // tau available: defined and |gdot| >= gdot_floor

    std::size_t size() const { return t.size(); }
};

/// Builds a series from raw gap values: central differences inside,
/// second-order one-sided at the ends and next to undefined samples.
GapSeries make_gap_series(std::string name, std::span<const double> t, std::span<const double> g,
                          std::span<const bool> defined, double gdot_floor = 1e-3);
GapSeries make_gap_series(std::string name, std::span<const double> t, std::span<const double> g,
                          double gdot_floor = 1e-3);

struct GapOptions {
    double gdot_floor = 1e-3;
    double k_steer = 1.76;
    double v_ref = 0.0;
    /// The steering ratio is only formed where |theta_G| exceeds this.
    double theta_min = 1e-2;
    /// Bearing-based gaps (theta, k) are undefined closer to the goal than this.
    double d_min = 1.0;
};

/// psi: wrap(psi - psi_G); theta: theta_G; d: d_G; v: v - v_ref;
/// k: psi-gap / theta_G - k_steer.
GapSeries gap_series(std::span<const TrajectorySample> samples, const GoalRef& goal, GapKind kind,
                     const GapOptions& opt = {});

enum class FitQuantity { tau, gap };

struct CouplingFit {
    std::string a;
    std::string b;
    FitQuantity quantity = FitQuantity::tau;
    double k_hat = 0.0;
    double r2 = 0.0;
    double window = 0.5;
    std::size_t n = 0;
};

/// Intercept-free least squares of A on B over the final `window` fraction of
/// B's closure: samples from B's peak |g| onward with |g| <= window * peak.
/// Throws ValidationError with fewer than `min_samples` usable points.
CouplingFit fit_coupling(const GapSeries& a, const GapSeries& b, double window = 0.5,
                         FitQuantity quantity = FitQuantity::tau, std::size_t min_samples = 10);

/// Points (A, B) entering the fit above.
std::vector<std::pair<double, double>> coupling_points(const GapSeries& a, const GapSeries& b, double window,
                                                       FitQuantity quantity);

/// First index where the steering-ratio gap, decreasing after having been
/// above the band, is within `tolerance` of zero or predicted to close
/// within `horizon` seconds (default: one sample period).
std::optional<std::size_t> detect_turn_onset(const GapSeries& k_gap, double tolerance = 0.02,
                                             std::optional<double> horizon = std::nullopt);

nlohmann::json coupling_to_json(const CouplingFit& f);

}  // namespace decomp
