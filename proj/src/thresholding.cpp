#include "hardthresh/thresholding.hpp"

#include "hardthresh/errors.hpp"
#include "hardthresh/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

namespace hardthresh {

void ThresholdPath::validate() const {
    if (deltas.empty()) throw InvalidArgument("threshold path is empty");
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] > 0.0) || !std::isfinite(deltas[k])) {
            throw InvalidArgument("thresholds must be finite and positive");
        }
        if (k > 0 && !(deltas[k] < deltas[k - 1])) {
            throw InvalidArgument("thresholds must be strictly decreasing");
        }
    }
    if (mode == ThresholdMode::Spline && !(spline_width > 0.0)) {
        throw InvalidArgument("spline width must be positive");
    }
}

void PenaltySpec::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("penalty c must be positive");
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("penalty r must be positive");
}

std::string PenaltySpec::label() const { return format_double(c) + ":" + format_double(r); }

namespace {

double parse_number(std::string_view token, const std::string& context) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw InvalidArgument("cannot parse number '" + std::string(token) + "' in " + context);
    }
    return value;
}

}  // namespace

std::vector<PenaltySpec> parse_penalty_list(const std::string& text) {
    std::vector<PenaltySpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw InvalidArgument("penalty '" + item + "' is not of the form c:r");
        }
        PenaltySpec spec{parse_number(std::string_view(item).substr(0, colon), "penalty list"),
                         parse_number(std::string_view(item).substr(colon + 1), "penalty list")};
        spec.validate();
        out.push_back(spec);
    }
    if (out.empty()) throw InvalidArgument("penalty list is empty");
    return out;
}

std::vector<Index> SelectionResult::relevant_set() const {
    std::vector<Index> out;
    std::size_t pos = 0;
    for (Index j = 0; j < beta_bar.size(); ++j) {
        if (pos < irrelevant_set.size() && irrelevant_set[pos] == j) {
            ++pos;
        } else {
            out.push_back(j);
        }
    }
    return out;
}

double tau_spline(double b, double delta, double h) {
    if (!(delta > 0.0) || !(h > 0.0)) throw InvalidArgument("tau_spline needs delta > 0, h > 0");
    if (b <= delta) return 0.0;
    const double scale = 4.0 / (h * h * h);
    if (b <= delta + 0.5 * h) {
        const double u = b - delta;
        return scale * u * u * u;
    }
    if (b < delta + h) {
        const double u = b - delta - h;
        return scale * u * u * u + 1.0;
    }
    return 1.0;
}

double t_threshold(double b, double delta, double h, ThresholdMode mode) {
    if (mode == ThresholdMode::Spline) return tau_spline(std::abs(b), delta, h);
    if (!(delta > 0.0)) throw InvalidArgument("threshold must be positive");
    return std::abs(b) <= delta ? 0.0 : 1.0;
}

ThresholdPath build_empirical_path(const Vector& beta_hat) {
    if (beta_hat.size() < 1) throw InvalidArgument("coefficient vector is empty");
    std::vector<double> mags;
    mags.reserve(static_cast<std::size_t>(beta_hat.size()));
    for (Index j = 0; j < beta_hat.size(); ++j) {
        const double m = std::abs(beta_hat[j]);
        if (m > 0.0) mags.push_back(m);
    }
    if (mags.empty()) throw AllZero("every coefficient is zero; no positive threshold exists");
    std::sort(mags.begin(), mags.end(), std::greater<>());
    mags.erase(std::unique(mags.begin(), mags.end()), mags.end());
    ThresholdPath path;
    path.deltas = std::move(mags);
    return path;
}

ThresholdPath build_empirical_path(const CoefficientVector& beta_hat) {
    return build_empirical_path(beta_hat.values);
}

SupportSplit support_at_threshold(const Vector& beta_hat, double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("threshold must be positive");
    SupportSplit out;
    std::vector<Index> retained;
    for (Index j = 0; j < beta_hat.size(); ++j) {
        if (std::abs(beta_hat[j]) <= delta) {
            out.excluded.push_back(j);
        } else {
            retained.push_back(j);
        }
    }
    out.retained = Support(std::move(retained), beta_hat.size());
    return out;
}

namespace {

struct RiskEval {
    double risk = 0.0;
    bool rank_deficient = false;
};

RiskEval evaluate_risk(const Dataset& data, const Vector& beta_hat, double delta,
                       ThresholdMode mode, double h) {
    if (beta_hat.size() != data.p()) {
        throw InvalidArgument("coefficient vector length does not match the design");
    }
    if (mode == ThresholdMode::Step) {
        const auto split = support_at_threshold(beta_hat, delta);
        const auto fit = least_squares_on_support(data, split.retained);
        return {fit.risk, fit.rank_deficient};
    }

    std::vector<Index> active;
    std::vector<double> weights;
    for (Index j = 0; j < beta_hat.size(); ++j) {
        const double w = t_threshold(beta_hat[j], delta, h, ThresholdMode::Spline);
        if (w > 0.0) {
            active.push_back(j);
            weights.push_back(w);
        }
    }
    const double n = static_cast<double>(data.n());
    if (active.empty()) return {data.response.squaredNorm() / n, false};

    Matrix scaled = data.design(Eigen::all, active);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        scaled.col(static_cast<Index>(i)) *= weights[i];
    }
    Index rank = 0;
    const Vector b = solve_least_squares(scaled, data.response, &rank);
    return {(data.response - scaled * b).squaredNorm() / n, rank < scaled.cols()};
}

}  // namespace

double min_thresholded_risk(const Dataset& data, const Vector& beta_hat, double delta,
                            ThresholdMode mode, double h) {
    return evaluate_risk(data, beta_hat, delta, mode, h).risk;
}

double penalty_value(double delta, Index n, const PenaltySpec& spec) {
    if (!(delta > 0.0)) throw InvalidArgument("penalty undefined for nonpositive threshold");
    if (n < 2) throw InvalidArgument("penalty needs n >= 2");
    spec.validate();
    const double dn = static_cast<double>(n);
    return spec.c / std::pow(delta, spec.r) * std::log(dn) / std::sqrt(dn);
}

std::vector<RiskEntry> thresholded_risks(const Dataset& data, const Vector& beta_hat,
                                         const ThresholdPath& path, unsigned threads) {
    path.validate();
    std::vector<RiskEntry> out(path.size());
    auto work = [&](std::size_t k) {
        RiskEntry& e = out[k];
        e.delta = path.deltas[k];
        e.excluded = support_at_threshold(beta_hat, e.delta).excluded;
        const auto eval = evaluate_risk(data, beta_hat, e.delta, path.mode, path.spline_width);
        e.risk = eval.risk;
        e.rank_deficient = eval.rank_deficient;
    };

    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1u), out.size());
    if (workers <= 1) {
        for (std::size_t k = 0; k < out.size(); ++k) work(k);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = w; k < out.size(); k += workers) work(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::size_t first_argmin(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("argmin of an empty sequence");
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] < values[best]) best = k;
    }
    return best;
}

SelectionResult select_from_risks(const Vector& beta_hat, std::vector<RiskEntry> risks, Index n,
                                  const PenaltySpec& spec) {
    if (risks.empty()) throw InvalidArgument("threshold path is empty");
    spec.validate();
    std::vector<double> criteria(risks.size());
    for (std::size_t k = 0; k < risks.size(); ++k) {
        risks[k].penalty = penalty_value(risks[k].delta, n, spec);
        risks[k].criterion = risks[k].risk + risks[k].penalty;
        criteria[k] = risks[k].criterion;
    }
    const std::size_t best = first_argmin(criteria);

    SelectionResult out;
    out.k_hat = best + 1;
    out.delta_hat = risks[best].delta;
    out.penalty = spec;
    out.irrelevant_set = risks[best].excluded;
    out.beta_hat = beta_hat;
    out.beta_bar = beta_hat;
    for (Index j : out.irrelevant_set) out.beta_bar[j] = 0.0;
    out.profile.per_k = std::move(risks);
    return out;
}

SelectionResult select_threshold(const Dataset& data, const Vector& beta_hat,
                                 const ThresholdPath& path, const PenaltySpec& spec,
                                 unsigned threads) {
    if (data.n() < 2) throw InvalidArgument("selection needs n >= 2");
    return select_from_risks(beta_hat, thresholded_risks(data, beta_hat, path, threads),
                             data.n(), spec);
}

SelectionResult select_threshold(const Dataset& data, const CoefficientVector& beta_hat,
                                 const ThresholdPath& path, const PenaltySpec& spec,
                                 unsigned threads) {
    return select_threshold(data, beta_hat.values, path, spec, threads);
}

SelectionMetrics metrics_fnr_tnr(std::span<const Index> selected_irrelevant,
                                 std::span<const Index> true_irrelevant, Index p) {
    if (p < 1) throw InvalidArgument("p must be positive");
    std::vector<char> selected(static_cast<std::size_t>(p), 0);
    std::vector<char> truth(static_cast<std::size_t>(p), 0);
    auto mark = [p](std::span<const Index> set, std::vector<char>& flags) {
        for (Index j : set) {
            if (j < 0 || j >= p) throw InvalidArgument("set index out of range");
            flags[static_cast<std::size_t>(j)] = 1;
        }
    };
    mark(selected_irrelevant, selected);
    mark(true_irrelevant, truth);

    std::size_t relevant = 0, relevant_kept = 0, irrelevant = 0, irrelevant_dropped = 0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j) {
        if (truth[j]) {
            ++irrelevant;
            if (selected[j]) ++irrelevant_dropped;
        } else {
            ++relevant;
            if (!selected[j]) ++relevant_kept;
        }
    }
    if (relevant == 0) throw InvalidArgument("FNR undefined: no truly relevant coordinates");

    SelectionMetrics out;
    out.fnr = 1.0 - static_cast<double>(relevant_kept) / static_cast<double>(relevant);
    if (irrelevant > 0) {
        out.tnr = static_cast<double>(irrelevant_dropped) / static_cast<double>(irrelevant);
    }
    return out;
}

}  // namespace hardthresh
