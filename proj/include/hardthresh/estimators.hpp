#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hardthresh {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Design matrix, response and column labels. No intercept column is implied.
struct Dataset {
    Matrix design;
    Vector response;
    std::vector<std::string> labels;

    Dataset() = default;
    Dataset(Matrix x, Vector y, std::vector<std::string> names);
    // Labels default to "X1".."Xp".
    Dataset(Matrix x, Vector y);

    Index n() const { return design.rows(); }
    Index p() const { return design.cols(); }

    // Throws InvalidArgument if shapes, finiteness or label uniqueness fail.
    void validate() const;
};

std::vector<std::string> default_labels(Index p);

enum class EstimatorKind { OLS, Ridge, AdaptiveRidge };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& token);

struct CoefficientVector {
    Vector values;
    EstimatorKind method = EstimatorKind::OLS;
    double lambda = 0.0;  // ridge penalty; also the AR initializer's
    double xi = 0.0;      // AR only
    int steps = 0;        // AR only

    // Numerical rank of the system that produced `values`. Equal to p unless
    // the OLS design was rank deficient, in which case `values` is the
    // minimum-norm least-squares solution.
    Index rank = 0;
    bool rank_deficient() const { return rank < values.size(); }

    Index p() const { return values.size(); }
};

// Sorted, duplicate-free column indices in [0, p).
class Support {
public:
    Support() = default;
    Support(std::vector<Index> indices, Index p);

    static Support all(Index p);

    const std::vector<Index>& indices() const { return retained_; }
    std::size_t size() const { return retained_.size(); }
    bool empty() const { return retained_.empty(); }
    bool contains(Index j) const;

private:
    std::vector<Index> retained_;
};

struct RestrictedFit {
    Vector coefficients;  // one entry per retained column, in support order
    double risk = 0.0;    // (1/n) ||Y - X_R b_R||^2
    Index rank = 0;
    bool rank_deficient = false;
};

// Stability floor applied to |beta_j| before forming 1/beta_j^2 in the adaptive
// ridge weights.
inline constexpr double kAdaptiveRidgeFloor = 1e-8;

CoefficientVector fit_ols(const Dataset& data);

// (X'X + lambda I)^{-1} X'Y. Throws SingularSystem when lambda == 0 and X'X is
// singular.
CoefficientVector fit_ridge(const Dataset& data, double lambda);

// `steps` fixed-point iterations of
//   b(s) = (X'X + xi * diag(1 / max(|b(s-1)_j|, floor)^2))^{-1} X'Y
// started from fit_ridge(data, ridge_lambda).
CoefficientVector fit_adaptive_ridge(const Dataset& data, double xi, int steps,
                                     double ridge_lambda);

// Same, with the initializer penalty at its default sqrt(n).
CoefficientVector fit_adaptive_ridge(const Dataset& data, double xi, int steps);

// OLS restricted to the retained columns. An empty support gives the
// intercept-free null model with risk (1/n)||Y||^2.
RestrictedFit least_squares_on_support(const Dataset& data, const Support& support);

// Minimum-norm least-squares solve of design * b = rhs via a complete
// orthogonal decomposition. `rank` receives the numerical rank.
Vector solve_least_squares(const Matrix& design, const Vector& rhs, Index* rank = nullptr);

}  // namespace hardthresh
