#pragma once

#include "hardthresh/estimators.hpp"
#include "hardthresh/thresholding.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hardthresh {

// Gaussian linear model Y = X beta0 + eps with equicorrelated N(0, Sigma) rows
// and N(0, noise_sd^2) errors.
struct ScenarioSpec {
    std::string name = "custom";
    Index n = 0;
    Vector beta0;
    double rho = 0.2;
    double noise_sd = 1.0;

    Index p() const { return beta0.size(); }
    std::vector<Index> true_irrelevant() const;
    void validate() const;

    // Strong signal: beta0 = (0.2, 0.4, ..., 2.0, 0, ..., 0).
    static ScenarioSpec s1(Index n, Index p);
    // Weak signal: beta0 = (0.05, 0.1, ..., 0.5, 0, ..., 0).
    static ScenarioSpec s2(Index n, Index p);
};

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::OLS;
    std::optional<double> ridge_lambda;  // unset means sqrt(n)
    double xi = 1.0;
    int steps = 5;

    double resolved_lambda(Index n) const;
    CoefficientVector fit(const Dataset& data) const;
    // e.g. "ols", "ridge(lambda=sqrt_n)", "ar(lambda=sqrt_n,xi=1,steps=5)".
    std::string label() const;
};

// Lower-triangular L with L L' = (1 - rho) I + rho 11'.
Matrix equicorrelated_factor(Index p, double rho);

struct GeneratedData {
    Dataset data;
    std::vector<Index> true_irrelevant;
};

// Bitwise deterministic in `seed`.
GeneratedData generate_dataset(const ScenarioSpec& spec, std::uint64_t seed);

// Seed of replication `index` under `base_seed` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

struct ReplicationOutcome {
    std::uint64_t seed = 0;
    PenaltySpec penalty;
    std::size_t k_hat = 0;
    double delta_hat = 0.0;
    double fnr = 0.0;
    std::optional<double> tnr;
    std::vector<Index> selected_set;  // estimated irrelevant set
    // Smallest true nonzero |beta0_j| is not above the finest threshold, so the
    // path cannot separate signal from noise for this draw.
    bool beta_min_warning = false;
    std::chrono::duration<double> wall_time{0};
};

ReplicationOutcome run_replication(const ScenarioSpec& spec, const EstimatorConfig& estimator,
                                   const PenaltySpec& penalty, std::uint64_t seed);

// One dataset and one fit shared by all penalties; outcome i belongs to penalties[i].
std::vector<ReplicationOutcome> run_replication(const ScenarioSpec& spec,
                                                const EstimatorConfig& estimator,
                                                std::span<const PenaltySpec> penalties,
                                                std::uint64_t seed);

struct AggregateReport {
    std::string scenario;
    Index n = 0;
    Index p = 0;
    EstimatorConfig estimator;
    PenaltySpec penalty;
    std::uint64_t base_seed = 0;
    std::size_t replications = 0;
    double mean_delta_hat = 0.0;
    double mean_fnr_pct = 0.0;
    double mean_tnr_pct = 0.0;  // NaN when TNR is undefined for the scenario
    std::vector<ReplicationOutcome> outcomes;
};

// Means over `outcomes`, summed in stored order.
AggregateReport aggregate(const ScenarioSpec& spec, const EstimatorConfig& estimator,
                          const PenaltySpec& penalty, std::uint64_t base_seed,
                          std::vector<ReplicationOutcome> outcomes);

// `threads` == 0 uses every hardware thread. Results do not depend on it.
AggregateReport run_scenario(const ScenarioSpec& spec, const EstimatorConfig& estimator,
                             const PenaltySpec& penalty, std::size_t replications,
                             std::uint64_t base_seed, unsigned threads = 0);

std::vector<AggregateReport> run_scenario(const ScenarioSpec& spec,
                                          const EstimatorConfig& estimator,
                                          std::span<const PenaltySpec> penalties,
                                          std::size_t replications, std::uint64_t base_seed,
                                          unsigned threads = 0);

}  // namespace hardthresh
