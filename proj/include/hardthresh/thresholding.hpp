#pragma once

#include "hardthresh/estimators.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hardthresh {

enum class ThresholdMode { Step, Spline };

inline constexpr double kDefaultSplineWidth = 1e-6;

// Candidate thresholds delta_1 > delta_2 > ... > delta_K > 0.
struct ThresholdPath {
    std::vector<double> deltas;
    double spline_width = kDefaultSplineWidth;
    ThresholdMode mode = ThresholdMode::Step;

    std::size_t size() const { return deltas.size(); }
    void validate() const;
};

// Penalty alpha(delta) * log(n) / sqrt(n) with alpha(delta) = c / delta^r.
struct PenaltySpec {
    double c = 1.0;
    double r = 0.5;

    void validate() const;
    // "c:r", shortest round-trip formatting of each number.
    std::string label() const;
};

// Parses "c:r[,c:r...]".
std::vector<PenaltySpec> parse_penalty_list(const std::string& text);

struct RiskEntry {
    double delta = 0.0;
    double risk = 0.0;
    double penalty = 0.0;
    double criterion = 0.0;  // risk + penalty, stored once
    std::vector<Index> excluded;
    bool rank_deficient = false;
};

struct RiskProfile {
    std::vector<RiskEntry> per_k;
};

struct SelectionResult {
    std::size_t k_hat = 0;  // 1-based position on the path
    double delta_hat = 0.0;
    PenaltySpec penalty;
    std::vector<Index> irrelevant_set;
    Vector beta_hat;  // the initial estimate that was thresholded
    Vector beta_bar;  // hard-thresholded estimate
    RiskProfile profile;

    std::vector<Index> relevant_set() const;
};

// Cubic spline ramp from 0 at b = delta to 1 at b = delta + h.
double tau_spline(double b, double delta, double h);

// Thresholding weight of a coefficient value; symmetric in b.
double t_threshold(double b, double delta, double h, ThresholdMode mode);

// Distinct nonzero |beta_j| sorted strictly decreasing. Throws AllZero when
// every coefficient is zero.
ThresholdPath build_empirical_path(const Vector& beta_hat);
ThresholdPath build_empirical_path(const CoefficientVector& beta_hat);

struct SupportSplit {
    std::vector<Index> excluded;  // { j : |beta_j| <= delta }
    Support retained;
};

SupportSplit support_at_threshold(const Vector& beta_hat, double delta);

// Minimum over b of (1/n)||Y - X diag(t(beta_hat)) b||^2.
//
// Step mode refits OLS on the retained columns. Spline mode minimizes over the
// design with each column scaled by its spline weight; the scaled columns span
// the same space, so both modes agree up to rounding.
double min_thresholded_risk(const Dataset& data, const Vector& beta_hat, double delta,
                            ThresholdMode mode = ThresholdMode::Step,
                            double h = kDefaultSplineWidth);

double penalty_value(double delta, Index n, const PenaltySpec& spec);

// Penalty-free part of the profile: one restricted fit per path entry. The fits
// are independent, `threads` > 1 evaluates them concurrently with identical
// results.
std::vector<RiskEntry> thresholded_risks(const Dataset& data, const Vector& beta_hat,
                                         const ThresholdPath& path, unsigned threads = 1);

// Smallest index attaining the minimum (0-based). Exact comparison, so ties go
// to the earliest entry.
std::size_t first_argmin(std::span<const double> values);

// Attaches penalties to precomputed risks and picks the threshold.
SelectionResult select_from_risks(const Vector& beta_hat, std::vector<RiskEntry> risks, Index n,
                                  const PenaltySpec& spec);

SelectionResult select_threshold(const Dataset& data, const Vector& beta_hat,
                                 const ThresholdPath& path, const PenaltySpec& spec,
                                 unsigned threads = 1);
SelectionResult select_threshold(const Dataset& data, const CoefficientVector& beta_hat,
                                 const ThresholdPath& path, const PenaltySpec& spec,
                                 unsigned threads = 1);

struct SelectionMetrics {
    double fnr = 0.0;
    std::optional<double> tnr;  // empty when the true irrelevant set is empty
};

// FNR = 1 - |selected relevant ∩ true relevant| / |true relevant|,
// TNR = |selected irrelevant ∩ true irrelevant| / |true irrelevant|.
SelectionMetrics metrics_fnr_tnr(std::span<const Index> selected_irrelevant,
                                 std::span<const Index> true_irrelevant, Index p);

}  // namespace hardthresh
