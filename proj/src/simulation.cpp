#include "hardthresh/simulation.hpp"

#include "hardthresh/errors.hpp"
#include "hardthresh/format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace hardthresh {

namespace {

ScenarioSpec ladder_scenario(std::string name, Index n, Index p, double step) {
    if (p < 10) throw InvalidArgument(name + " needs p >= 10");
    ScenarioSpec spec;
    spec.name = std::move(name);
    spec.n = n;
    spec.beta0 = Vector::Zero(p);
    for (Index j = 0; j < 10; ++j) spec.beta0[j] = step * static_cast<double>(j + 1);
    spec.validate();
    return spec;
}

}  // namespace

ScenarioSpec ScenarioSpec::s1(Index n, Index p) { return ladder_scenario("S1", n, p, 0.2); }

ScenarioSpec ScenarioSpec::s2(Index n, Index p) { return ladder_scenario("S2", n, p, 0.05); }

std::vector<Index> ScenarioSpec::true_irrelevant() const {
    std::vector<Index> out;
    for (Index j = 0; j < p(); ++j) {
        if (beta0[j] == 0.0) out.push_back(j);
    }
    return out;
}

void ScenarioSpec::validate() const {
    if (n < 2) throw InvalidArgument("scenario needs n >= 2");
    if (p() < 1) throw InvalidArgument("scenario needs p >= 1");
    if (!beta0.allFinite()) throw InvalidArgument("beta0 has non-finite entries");
    if (static_cast<Index>(true_irrelevant().size()) == p()) {
        throw InvalidArgument("beta0 must have at least one nonzero entry");
    }
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) {
        throw InvalidArgument("noise_sd must be positive");
    }
    const double lower = p() > 1 ? -1.0 / static_cast<double>(p() - 1) : -1.0;
    if (!(rho > lower && rho < 1.0)) {
        throw InvalidArgument("rho outside (" + format_double(lower) + ", 1)");
    }
}

double EstimatorConfig::resolved_lambda(Index n) const {
    return ridge_lambda.value_or(std::sqrt(static_cast<double>(n)));
}

CoefficientVector EstimatorConfig::fit(const Dataset& data) const {
    switch (kind) {
        case EstimatorKind::OLS: return fit_ols(data);
        case EstimatorKind::Ridge: return fit_ridge(data, resolved_lambda(data.n()));
        case EstimatorKind::AdaptiveRidge:
            return fit_adaptive_ridge(data, xi, steps, resolved_lambda(data.n()));
    }
    throw InvalidArgument("unknown estimator");
}

std::string EstimatorConfig::label() const {
    const std::string lambda = ridge_lambda ? format_double(*ridge_lambda) : "sqrt_n";
    switch (kind) {
        case EstimatorKind::OLS: return "ols";
        case EstimatorKind::Ridge: return "ridge(lambda=" + lambda + ")";
        case EstimatorKind::AdaptiveRidge:
            return "ar(lambda=" + lambda + ",xi=" + format_double(xi) +
                   ",steps=" + std::to_string(steps) + ")";
    }
    return "unknown";
}

Matrix equicorrelated_factor(Index p, double rho) {
    if (p < 1) throw InvalidArgument("p must be positive");
    const double lower = p > 1 ? -1.0 / static_cast<double>(p - 1) : -1.0;
    if (!(rho > lower && rho < 1.0)) {
        throw NotPositiveDefinite("equicorrelation rho=" + format_double(rho) +
                                  " is outside (" + format_double(lower) + ", 1)");
    }
    Matrix sigma = Matrix::Constant(p, p, rho);
    sigma.diagonal().setOnes();
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("Cholesky factorization failed");
    }
    return llt.matrixL();
}

GeneratedData generate_dataset(const ScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    const Index n = spec.n;
    const Index p = spec.p();
    const Matrix factor = equicorrelated_factor(p, spec.rho);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(n, p);
    Vector eps(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) z(i, j) = normal(rng);
        eps[i] = spec.noise_sd * normal(rng);
    }

    Matrix x = z * factor.transpose();
    Vector y = x * spec.beta0 + eps;
    return {Dataset(std::move(x), std::move(y)), spec.true_irrelevant()};
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(base_seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

std::vector<ReplicationOutcome> run_replication(const ScenarioSpec& spec,
                                                const EstimatorConfig& estimator,
                                                std::span<const PenaltySpec> penalties,
                                                std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    try {
        auto generated = generate_dataset(spec, seed);
        const auto beta_hat = estimator.fit(generated.data);
        const auto path = build_empirical_path(beta_hat);
        const auto risks = thresholded_risks(generated.data, beta_hat.values, path);

        double min_signal = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < spec.p(); ++j) {
            if (spec.beta0[j] != 0.0) min_signal = std::min(min_signal, std::abs(spec.beta0[j]));
        }
        const bool warn = min_signal <= path.deltas.back();

        std::vector<ReplicationOutcome> out;
        out.reserve(penalties.size());
        for (const auto& penalty : penalties) {
            const auto sel = select_from_risks(beta_hat.values, risks, generated.data.n(), penalty);
            const auto metrics =
                metrics_fnr_tnr(sel.irrelevant_set, generated.true_irrelevant, spec.p());
            ReplicationOutcome o;
            o.seed = seed;
            o.penalty = penalty;
            o.k_hat = sel.k_hat;
            o.delta_hat = sel.delta_hat;
            o.fnr = metrics.fnr;
            o.tnr = metrics.tnr;
            o.selected_set = sel.irrelevant_set;
            o.beta_min_warning = warn;
            out.push_back(std::move(o));
        }
        const auto elapsed = std::chrono::steady_clock::now() - start;
        for (auto& o : out) o.wall_time = elapsed;
        return out;
    } catch (const ReplicationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ReplicationError(e.what(), seed);
    }
}

ReplicationOutcome run_replication(const ScenarioSpec& spec, const EstimatorConfig& estimator,
                                   const PenaltySpec& penalty, std::uint64_t seed) {
    return run_replication(spec, estimator, std::span<const PenaltySpec>(&penalty, 1), seed)
        .front();
}

AggregateReport aggregate(const ScenarioSpec& spec, const EstimatorConfig& estimator,
                          const PenaltySpec& penalty, std::uint64_t base_seed,
                          std::vector<ReplicationOutcome> outcomes) {
    if (outcomes.empty()) throw InvalidArgument("cannot aggregate zero replications");
    AggregateReport report;
    report.scenario = spec.name;
    report.n = spec.n;
    report.p = spec.p();
    report.estimator = estimator;
    report.penalty = penalty;
    report.base_seed = base_seed;
    report.replications = outcomes.size();

    double sum_delta = 0.0, sum_fnr = 0.0, sum_tnr = 0.0;
    std::size_t tnr_count = 0;
    for (const auto& o : outcomes) {
        sum_delta += o.delta_hat;
        sum_fnr += o.fnr;
        if (o.tnr) {
            sum_tnr += *o.tnr;
            ++tnr_count;
        }
    }
    const double reps = static_cast<double>(outcomes.size());
    report.mean_delta_hat = sum_delta / reps;
    report.mean_fnr_pct = 100.0 * sum_fnr / reps;
    report.mean_tnr_pct = tnr_count > 0 ? 100.0 * sum_tnr / static_cast<double>(tnr_count)
                                        : std::numeric_limits<double>::quiet_NaN();
    report.outcomes = std::move(outcomes);
    return report;
}

std::vector<AggregateReport> run_scenario(const ScenarioSpec& spec,
                                          const EstimatorConfig& estimator,
                                          std::span<const PenaltySpec> penalties,
                                          std::size_t replications, std::uint64_t base_seed,
                                          unsigned threads) {
    if (replications < 1) throw InvalidArgument("replications must be at least 1");
    if (penalties.empty()) throw InvalidArgument("no penalties given");
    spec.validate();
    for (const auto& pen : penalties) pen.validate();

    // per_rep[i][m] is replication i under penalty m.
    std::vector<std::vector<ReplicationOutcome>> per_rep(replications);
    std::vector<std::exception_ptr> errors(replications);

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, replications));

    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next++; i < replications; i = next++) {
            try {
                per_rep[i] = run_replication(spec, estimator, penalties, derive_seed(base_seed, i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(drain);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<AggregateReport> reports;
    reports.reserve(penalties.size());
    for (std::size_t m = 0; m < penalties.size(); ++m) {
        std::vector<ReplicationOutcome> outcomes;
        outcomes.reserve(replications);
        for (auto& rep : per_rep) outcomes.push_back(rep[m]);
        reports.push_back(aggregate(spec, estimator, penalties[m], base_seed, std::move(outcomes)));
    }
    return reports;
}

AggregateReport run_scenario(const ScenarioSpec& spec, const EstimatorConfig& estimator,
                             const PenaltySpec& penalty, std::size_t replications,
                             std::uint64_t base_seed, unsigned threads) {
    return run_scenario(spec, estimator, std::span<const PenaltySpec>(&penalty, 1), replications,
                        base_seed, threads)
        .front();
}

}  // namespace hardthresh
