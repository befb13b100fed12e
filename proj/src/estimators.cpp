#include "hardthresh/estimators.hpp"

#include "hardthresh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hardthresh {

Dataset::Dataset(Matrix x, Vector y, std::vector<std::string> names)
    : design(std::move(x)), response(std::move(y)), labels(std::move(names)) {
    validate();
}

Dataset::Dataset(Matrix x, Vector y)
    : design(std::move(x)), response(std::move(y)), labels(default_labels(design.cols())) {
    validate();
}

void Dataset::validate() const {
    if (n() < 1 || p() < 1) {
        throw InvalidArgument("dataset needs at least one row and one column");
    }
    if (response.size() != n()) {
        throw InvalidArgument("response length " + std::to_string(response.size()) +
                              " does not match " + std::to_string(n()) + " design rows");
    }
    if (static_cast<Index>(labels.size()) != p()) {
        throw InvalidArgument("expected " + std::to_string(p()) + " column labels, got " +
                              std::to_string(labels.size()));
    }
    if (!design.allFinite()) throw InvalidArgument("design contains non-finite entries");
    if (!response.allFinite()) throw InvalidArgument("response contains non-finite entries");
    std::set<std::string> seen;
    for (const auto& label : labels) {
        if (!seen.insert(label).second) throw InvalidArgument("duplicate column label: " + label);
    }
}

std::vector<std::string> default_labels(Index p) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) out.push_back("X" + std::to_string(j + 1));
    return out;
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::OLS: return "ols";
        case EstimatorKind::Ridge: return "ridge";
        case EstimatorKind::AdaptiveRidge: return "ar";
    }
    return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& token) {
    if (token == "ols") return EstimatorKind::OLS;
    if (token == "ridge") return EstimatorKind::Ridge;
    if (token == "ar") return EstimatorKind::AdaptiveRidge;
    throw InvalidArgument("unknown estimator '" + token + "' (expected ols, ridge or ar)");
}

Support::Support(std::vector<Index> indices, Index p) : retained_(std::move(indices)) {
    std::sort(retained_.begin(), retained_.end());
    if (std::adjacent_find(retained_.begin(), retained_.end()) != retained_.end()) {
        throw InvalidArgument("support contains duplicate indices");
    }
    if (!retained_.empty() && (retained_.front() < 0 || retained_.back() >= p)) {
        throw InvalidArgument("support index out of range [0, " + std::to_string(p) + ")");
    }
}

Support Support::all(Index p) {
    std::vector<Index> idx(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
    return Support(std::move(idx), p);
}

bool Support::contains(Index j) const {
    return std::binary_search(retained_.begin(), retained_.end(), j);
}

Vector solve_least_squares(const Matrix& design, const Vector& rhs, Index* rank) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    if (rank != nullptr) *rank = cod.rank();
    return cod.solve(rhs);
}

CoefficientVector fit_ols(const Dataset& data) {
    CoefficientVector out;
    out.method = EstimatorKind::OLS;
    out.values = solve_least_squares(data.design, data.response, &out.rank);
    return out;
}

namespace {

// Solves the Tikhonov system (X'X + D) b = X'Y for a positive diagonal D by
// least squares on the stacked system [X; sqrt(D)] b = [Y; 0], which avoids
// forming X'X.
Vector solve_diagonal_tikhonov(const Matrix& x, const Vector& y, const Vector& diag) {
    const Index n = x.rows();
    const Index p = x.cols();
    Matrix stacked(n + p, p);
    stacked.topRows(n) = x;
    stacked.bottomRows(p) = diag.cwiseSqrt().asDiagonal();
    Vector rhs = Vector::Zero(n + p);
    rhs.head(n) = y;
    return stacked.colPivHouseholderQr().solve(rhs);
}

}  // namespace

CoefficientVector fit_ridge(const Dataset& data, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument("ridge lambda must be finite and nonnegative");
    }
    CoefficientVector out;
    out.method = EstimatorKind::Ridge;
    out.lambda = lambda;
    if (lambda == 0.0) {
        out.values = solve_least_squares(data.design, data.response, &out.rank);
        if (out.rank < data.p()) {
            throw SingularSystem("X'X is singular (rank " + std::to_string(out.rank) + " < " +
                                 std::to_string(data.p()) + ") and lambda is zero");
        }
        return out;
    }
    out.values = solve_diagonal_tikhonov(data.design, data.response,
                                         Vector::Constant(data.p(), lambda));
    out.rank = data.p();
    return out;
}

CoefficientVector fit_adaptive_ridge(const Dataset& data, double xi, int steps,
                                     double ridge_lambda) {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw InvalidArgument("AR xi must be positive");
    if (steps < 1) throw InvalidArgument("AR steps must be at least 1");

    Vector beta = fit_ridge(data, ridge_lambda).values;
    Vector weights(data.p());
    for (int s = 0; s < steps; ++s) {
        for (Index j = 0; j < data.p(); ++j) {
            const double mag = std::max(std::abs(beta[j]), kAdaptiveRidgeFloor);
            weights[j] = xi / (mag * mag);
        }
        beta = solve_diagonal_tikhonov(data.design, data.response, weights);
    }

    CoefficientVector out;
    out.method = EstimatorKind::AdaptiveRidge;
    out.values = std::move(beta);
    out.lambda = ridge_lambda;
    out.xi = xi;
    out.steps = steps;
    out.rank = data.p();
    return out;
}

CoefficientVector fit_adaptive_ridge(const Dataset& data, double xi, int steps) {
    return fit_adaptive_ridge(data, xi, steps, std::sqrt(static_cast<double>(data.n())));
}

RestrictedFit least_squares_on_support(const Dataset& data, const Support& support) {
    RestrictedFit out;
    const double n = static_cast<double>(data.n());
    if (support.empty()) {
        out.coefficients = Vector(0);
        out.risk = data.response.squaredNorm() / n;
        return out;
    }
    if (support.indices().back() >= data.p()) {
        throw InvalidArgument("support index out of range for dataset");
    }
    const Matrix restricted = data.design(Eigen::all, support.indices());
    out.coefficients = solve_least_squares(restricted, data.response, &out.rank);
    out.rank_deficient = out.rank < restricted.cols();
    out.risk = (data.response - restricted * out.coefficients).squaredNorm() / n;
    return out;
}

}  // namespace hardthresh
