// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//
//   acceptance [--prostate path.csv] [--workdir dir] [--only N,...] [--expect-fail N,...]
//
// Exit status is 0 when the failing criteria are exactly the --expect-fail set,
// so a known red line stays red without hiding new regressions or fixes.

#include "hardthresh/cli.hpp"
#include "hardthresh/dataio.hpp"
#include "hardthresh/errors.hpp"
#include "hardthresh/format.hpp"
#include "hardthresh/simulation.hpp"
#include "hardthresh/thresholding.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

using namespace hardthresh;
namespace fs = std::filesystem;

namespace {

// Tolerances, in percentage points unless noted.
constexpr double kLargeFnrMax = 0.5;
constexpr double kLargeTnrMin = 99.5;
constexpr double kLargeDeltaLo = 0.005;
constexpr double kLargeDeltaHi = 0.06;
constexpr double kScreeningShare = 0.99;
constexpr double kSmallFnr = 10.2, kSmallFnrTol = 5.0;
constexpr double kSmallTnr = 96.4, kSmallTnrTol = 5.0;
constexpr double kWeakFnr = 18.8, kWeakFnrTol = 6.0;
constexpr double kWeakTnr = 99.675, kWeakTnrTol = 2.0;
constexpr double kArTnr = 94.2, kArTnrTol = 5.0;
constexpr double kArFnr = 6.0, kArFnrTol = 4.0;
constexpr double kTrendSlack = 3.0;
constexpr double kOracleTol = 1e-10;
constexpr double kSplineTol = 1e-9;
constexpr double kScalingTol = 1e-10;

constexpr std::size_t kReps = 100;
constexpr std::uint64_t kBaseSeed = 1;

const std::vector<PenaltySpec> kAllPenalties = {{0.5, 0.25}, {0.75, 0.4}, {1.0, 0.5}};

struct Verdict {
    enum class State { Pass, Fail, Skip } state;
    std::string detail;
};

Verdict pass(std::string d) { return {Verdict::State::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Verdict::State::Fail, std::move(d)}; }

Verdict judge(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

std::string pen_label(const PenaltySpec& p) {
    return "(" + format_double(p.c) + "," + format_double(p.r) + ")";
}

bool within(double value, double centre, double tol) { return std::abs(value - centre) <= tol; }

// Runs are shared between criteria that ask for the same cell.
using CellKey = std::tuple<std::string, Index, Index, std::string>;
std::map<CellKey, std::vector<AggregateReport>> g_cells;

const std::vector<AggregateReport>& cell(const ScenarioSpec& spec, const EstimatorConfig& est) {
    const CellKey key{spec.name, spec.n, spec.p(), est.label()};
    auto it = g_cells.find(key);
    if (it == g_cells.end()) {
        it = g_cells.emplace(key, run_scenario(spec, est, kAllPenalties, kReps, kBaseSeed, 0)).first;
    }
    return it->second;
}

const AggregateReport& report_for(const std::vector<AggregateReport>& reports, const PenaltySpec& pen) {
    for (const auto& r : reports) {
        if (r.penalty.c == pen.c && r.penalty.r == pen.r) return r;
    }
    throw std::logic_error("penalty not in cell");
}

std::string rates(const AggregateReport& r) {
    return "FNR=" + fmt(r.mean_fnr_pct) + " TNR=" + fmt(r.mean_tnr_pct) +
           " delta=" + fmt(r.mean_delta_hat);
}

Verdict criterion_1() {
    const auto spec = ScenarioSpec::s1(10000, 20);
    const auto& reports = cell(spec, EstimatorConfig{});
    bool ok = true;
    std::string detail;
    for (const auto& r : reports) {
        std::size_t screened = 0;
        const auto truth = spec.true_irrelevant();
        for (const auto& o : r.outcomes) {
            screened += std::includes(truth.begin(), truth.end(), o.selected_set.begin(),
                                      o.selected_set.end())
                            ? 1
                            : 0;
        }
        const double share = static_cast<double>(screened) / static_cast<double>(r.outcomes.size());
        ok = ok && r.mean_fnr_pct <= kLargeFnrMax && r.mean_tnr_pct >= kLargeTnrMin &&
             r.mean_delta_hat > kLargeDeltaLo && r.mean_delta_hat < kLargeDeltaHi &&
             share >= kScreeningShare;
        detail += pen_label(r.penalty) + " " + rates(r) + " screened=" + fmt(100 * share) + "%; ";
    }
    return judge(ok, detail);
}

Verdict criterion_2() {
    const auto& r = report_for(cell(ScenarioSpec::s1(100, 20), EstimatorConfig{}), {1.0, 0.5});
    return judge(within(r.mean_fnr_pct, kSmallFnr, kSmallFnrTol) &&
                     within(r.mean_tnr_pct, kSmallTnr, kSmallTnrTol),
                 rates(r) + " (target FNR " + fmt(kSmallFnr) + "+-" + fmt(kSmallFnrTol) + ", TNR " +
                     fmt(kSmallTnr) + "+-" + fmt(kSmallTnrTol) + ")");
}

Verdict criterion_3() {
    const auto& r = report_for(cell(ScenarioSpec::s2(1000, 50), EstimatorConfig{}), {0.75, 0.4});
    return judge(within(r.mean_fnr_pct, kWeakFnr, kWeakFnrTol) &&
                     within(r.mean_tnr_pct, kWeakTnr, kWeakTnrTol),
                 rates(r) + " (target FNR " + fmt(kWeakFnr) + "+-" + fmt(kWeakFnrTol) + ", TNR " +
                     fmt(kWeakTnr) + "+-" + fmt(kWeakTnrTol) + ")");
}

Verdict criterion_4() {
    EstimatorConfig ar;
    ar.kind = EstimatorKind::AdaptiveRidge;
    const auto& r = report_for(cell(ScenarioSpec::s1(100, 20), ar), {0.5, 0.25});
    return judge(within(r.mean_fnr_pct, kArFnr, kArFnrTol) && within(r.mean_tnr_pct, kArTnr, kArTnrTol),
                 rates(r) + " (target FNR " + fmt(kArFnr) + "+-" + fmt(kArFnrTol) + ", TNR " +
                     fmt(kArTnr) + "+-" + fmt(kArTnrTol) + ")");
}

Verdict criterion_5(const std::string& path) {
    if (path.empty() || !fs::exists(path)) {
        return {Verdict::State::Skip,
                "prostate data not found" + (path.empty() ? std::string() : " at " + path) +
                    "; supply the 97 x 9 CSV to run this check"};
    }
    const std::vector<std::string> covariates = {"lcavol", "lweight", "age",     "lbph",
                                                 "svi",    "lcp",     "gleason", "pgg45"};
    // Keep the eight covariates and lpsa, whatever else the file carries.
    std::vector<std::string> drop;
    {
        const auto text = read_text_file(path);
        std::string header = text.substr(0, text.find('\n'));
        if (!header.empty() && header.back() == '\r') header.pop_back();
        std::stringstream ss(header);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (name.size() >= 2 && name.front() == '"' && name.back() == '"') {
                name = name.substr(1, name.size() - 2);
            }
            if (name != "lpsa" && std::find(covariates.begin(), covariates.end(), name) == covariates.end()) {
                drop.push_back(name);
            }
        }
    }
    const auto data = preprocess(load_csv(path, "lpsa", drop), PreprocessOptions{});
    if (data.n() != 97 || data.p() != 8) {
        return fail("expected 97 x 8 covariates, got " + std::to_string(data.n()) + " x " +
                    std::to_string(data.p()));
    }

    EstimatorConfig ols, ridge, ar;
    ridge.kind = EstimatorKind::Ridge;
    ar.kind = EstimatorKind::AdaptiveRidge;
    const std::set<std::string> three = {"lcavol", "lweight", "svi"};
    const std::set<std::string> one = {"lcavol"};
    struct Case {
        std::string name;
        EstimatorConfig est;
        PenaltySpec pen;
        std::set<std::string> expected;
    };
    const std::vector<Case> cases = {
        {"ols", ols, {0.75, 0.4}, three},   {"ridge", ridge, {0.5, 0.25}, three},
        {"ar", ar, {0.75, 0.4}, one},       {"ols", ols, {1.0, 0.5}, one},
        {"ridge", ridge, {1.0, 0.5}, one},  {"ar", ar, {1.0, 0.5}, one},
    };
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto beta = c.est.fit(data);
        const auto result = select_threshold(data, beta, build_empirical_path(beta), c.pen);
        std::set<std::string> got;
        for (Index j : result.relevant_set()) got.insert(data.labels[static_cast<std::size_t>(j)]);
        const bool match = got == c.expected;
        ok = ok && match;
        detail += c.name + pen_label(c.pen) + (match ? " ok" : " MISMATCH") + " {";
        bool first = true;
        for (const auto& g : got) {
            detail += (first ? "" : ",") + g;
            first = false;
        }
        detail += "}; ";
    }
    return judge(ok, detail);
}

// Property suite. Each check appends to `failures` on violation.
struct Properties {
    std::vector<std::string> failures;
    std::size_t selections = 0;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }

    void check_selection(const Vector& beta, const SelectionResult& sel, const std::string& tag) {
        ++selections;
        std::vector<char> in_s(static_cast<std::size_t>(beta.size()), 0);
        for (Index j : sel.irrelevant_set) in_s[static_cast<std::size_t>(j)] = 1;
        for (Index j = 0; j < beta.size(); ++j) {
            const bool structural = in_s[static_cast<std::size_t>(j)]
                                        ? sel.beta_bar[j] == 0.0
                                        : sel.beta_bar[j] == beta[j];
            expect(structural, tag + ": beta_bar structure at " + std::to_string(j));
        }
        const auto& prof = sel.profile.per_k;
        for (std::size_t k = 1; k < prof.size(); ++k) {
            expect(prof[k].risk <= prof[k - 1].risk * (1 + 1e-12) + 1e-14,
                   tag + ": nested risk at k=" + std::to_string(k + 1));
            expect(prof[k].penalty > prof[k - 1].penalty,
                   tag + ": penalty monotone at k=" + std::to_string(k + 1));
        }
    }

    void spline_knots() {
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> ud(0.01, 2.0), uh(1e-4, 0.5);
        for (int i = 0; i < 20; ++i) {
            const double d = ud(rng), h = uh(rng);
            expect(tau_spline(d, d, h) == 0.0, "spline value at delta");
            expect(std::abs(tau_spline(d + h / 2, d, h) - 0.5) <= 1e-12, "spline value at midpoint");
            expect(std::abs(tau_spline(d + h, d, h) - 1.0) <= 1e-12, "spline value at delta+h");
            const double e = h * 1e-6;
            for (double knot : {d, d + h}) {
                const double left = (tau_spline(knot, d, h) - tau_spline(knot - e, d, h)) / e;
                const double right = (tau_spline(knot + e, d, h) - tau_spline(knot, d, h)) / e;
                expect(std::abs(left - right) <= 1e-4 / h, "spline C1 at knot");
            }
        }
    }

    void spline_vs_step() {
        std::mt19937_64 rng(202);
        for (int i = 0; i < 50; ++i) {
            const Index p = 2 + static_cast<Index>(i % 5);
            const auto data = testing_support::random_dataset(rng, 15 + 2 * p, p);
            const auto beta = fit_ols(data).values;
            for (double delta : build_empirical_path(beta).deltas) {
                const double step = min_thresholded_risk(data, beta, delta, ThresholdMode::Step);
                const double spline = min_thresholded_risk(data, beta, delta, ThresholdMode::Spline);
                expect(std::abs(step - spline) <= kSplineTol, "spline vs step");
            }
        }
    }

    void scaling_invariance() {
        std::mt19937_64 rng(303);
        std::uniform_real_distribution<double> scale(0.1, 10.0);
        for (int i = 0; i < 20; ++i) {
            const auto data = testing_support::random_dataset(rng, 30, 5);
            Dataset scaled = data;
            for (Index j = 0; j < 5; ++j) scaled.design.col(j) *= scale(rng);
            const Support s({0, 2, 3}, 5);
            const double a = least_squares_on_support(data, s).risk;
            const double b = least_squares_on_support(scaled, s).risk;
            expect(std::abs(a - b) <= kScalingTol, "column scaling invariance");
        }
    }

    void brute_force_and_profiles() {
        std::mt19937_64 rng(404);
        for (int i = 0; i < 30; ++i) {
            const Index p = 1 + static_cast<Index>(i % 6);
            const auto data = testing_support::random_dataset(rng, 40, p, 0.4);
            const auto x = testing_support::rows_of(data.design);
            const auto y = testing_support::vec_of(data.response);
            EstimatorConfig ests[3];
            ests[1].kind = EstimatorKind::Ridge;
            ests[2].kind = EstimatorKind::AdaptiveRidge;
            for (const auto& est : ests) {
                const auto beta = est.fit(data).values;
                const auto path = build_empirical_path(beta);
                const auto risks = thresholded_risks(data, beta, path);
                for (const auto& entry : risks) {
                    std::vector<std::size_t> kept;
                    for (Index j = 0; j < p; ++j) {
                        if (std::abs(beta[j]) > entry.delta) kept.push_back(static_cast<std::size_t>(j));
                    }
                    expect(std::abs(entry.risk - oracle::subset_risk(x, y, kept)) <= kOracleTol,
                           "path risk vs subset oracle");
                }
                for (const auto& pen : kAllPenalties) {
                    check_selection(beta, select_from_risks(beta, risks, data.n(), pen),
                                    est.label() + pen_label(pen));
                }
            }
        }
    }

    void tie_breaking() {
        const std::vector<double> tied = {0.9, 0.7, 0.7, 0.8};
        expect(first_argmin(tied) == 1, "first_argmin tie");
        const std::vector<double> all_equal = {2.0, 2.0, 2.0};
        expect(first_argmin(all_equal) == 0, "first_argmin constant");

        // Criterion values tied exactly at k = 2 and k = 3.
        const Vector beta{{3.0, 2.0, 1.0}};
        const Index n = 50;
        const PenaltySpec pen{1.0, 0.5};
        std::vector<RiskEntry> risks(3);
        const double deltas[] = {3.0, 2.0, 1.0};
        for (std::size_t k = 0; k < 3; ++k) {
            risks[k].delta = deltas[k];
            risks[k].excluded = {};
            for (Index j = 0; j < 3; ++j) {
                if (std::abs(beta[j]) <= deltas[k]) risks[k].excluded.push_back(j);
            }
        }
        const double target = 10.0;
        risks[0].risk = 100.0;
        for (std::size_t k = 1; k < 3; ++k) risks[k].risk = target - penalty_value(deltas[k], n, pen);
        const double c1 = risks[1].risk + penalty_value(deltas[1], n, pen);
        const double c2 = risks[2].risk + penalty_value(deltas[2], n, pen);
        if (c1 == c2) {
            const auto sel = select_from_risks(beta, risks, n, pen);
            expect(sel.k_hat == 2, "criterion tie resolves to the smallest k");
            check_selection(beta, sel, "tie");
        }
    }

    void metrics() {
        const std::vector<Index> truth = {2, 3};
        auto m = metrics_fnr_tnr(std::vector<Index>{2, 3}, truth, 4);
        expect(m.fnr == 0.0 && m.tnr && *m.tnr == 1.0, "perfect selection");
        m = metrics_fnr_tnr(std::vector<Index>{0, 2}, truth, 4);
        expect(m.fnr == 0.5 && m.tnr && *m.tnr == 0.5, "half right");
        m = metrics_fnr_tnr(std::vector<Index>{}, truth, 4);
        expect(m.fnr == 0.0 && m.tnr && *m.tnr == 0.0, "nothing excluded");
        m = metrics_fnr_tnr(std::vector<Index>{0, 1, 2, 3}, truth, 4);
        expect(m.fnr == 1.0 && m.tnr && *m.tnr == 1.0, "everything excluded");
        m = metrics_fnr_tnr(std::vector<Index>{1}, std::vector<Index>{}, 3);
        expect(std::abs(m.fnr - 1.0 / 3.0) <= 1e-15 && !m.tnr, "empty truth");
    }
};

Verdict criterion_6() {
    Properties props;
    std::vector<std::pair<std::string, std::function<void()>>> parts = {
        {"spline knots", [&] { props.spline_knots(); }},
        {"spline vs step", [&] { props.spline_vs_step(); }},
        {"scaling", [&] { props.scaling_invariance(); }},
        {"oracle+profiles", [&] { props.brute_force_and_profiles(); }},
        {"ties", [&] { props.tie_breaking(); }},
        {"fnr/tnr", [&] { props.metrics(); }},
    };
    std::string slow;
    for (auto& [name, fn] : parts) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn();
        } catch (const std::exception& e) {
            props.failures.push_back(name + " threw: " + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= 1.0) slow += name + " took " + fmt(secs, 3) + "s; ";
    }
    if (!slow.empty()) props.failures.push_back(slow);
    std::string detail = std::to_string(props.selections) + " selections checked";
    if (!props.failures.empty()) {
        detail += "; " + std::to_string(props.failures.size()) + " violation(s), first: " +
                  props.failures.front();
    }
    return judge(props.failures.empty(), detail);
}

Verdict criterion_7() {
    const PenaltySpec pen{1.0, 0.5};
    std::vector<double> fnr, miss;
    std::string detail;
    for (Index n : {100, 1000, 10000}) {
        const auto& r = report_for(cell(ScenarioSpec::s1(n, 20), EstimatorConfig{}), pen);
        fnr.push_back(r.mean_fnr_pct);
        miss.push_back(100.0 - r.mean_tnr_pct);
        detail += "n=" + std::to_string(n) + " FNR=" + fmt(r.mean_fnr_pct) +
                  " 100-TNR=" + fmt(100.0 - r.mean_tnr_pct) + "; ";
    }
    bool ok = true;
    for (std::size_t i = 1; i < fnr.size(); ++i) {
        ok = ok && fnr[i] <= fnr[i - 1] + kTrendSlack && miss[i] <= miss[i - 1] + kTrendSlack;
    }
    return judge(ok, detail);
}

Verdict criterion_8(const fs::path& workdir) {
    fs::create_directories(workdir);
    auto run_once = [&](const std::string& tag, const std::string& threads, const std::string& format) {
        const auto out = (workdir / ("det_" + tag + "." + format)).string();
        const auto audit = (workdir / ("det_" + tag + "_audit.csv")).string();
        std::ostringstream sink, err;
        const int code = cli::run({"simulate", "--scenario", "S1", "--n", "100", "--p", "20",
                                   "--penalties", "1:0.5", "--reps", std::to_string(kReps), "--seed",
                                   std::to_string(kBaseSeed), "--threads", threads, "--format",
                                   format, "--out", out, "--audit", audit},
                                  sink, err);
        if (code != 0) throw std::runtime_error("cli exited " + std::to_string(code) + ": " + err.str());
        return std::make_pair(read_text_file(out), read_text_file(audit));
    };
    bool ok = true;
    std::string detail;
    for (const std::string format : {"csv", "json"}) {
        const auto a = run_once("a", "1", format);
        const auto b = run_once("b", "1", format);
        const auto c = run_once("c", "4", format);
        const auto d = run_once("d", "0", format);
        const bool same = a == b && a == c && a == d;
        ok = ok && same;
        detail += format + (same ? " identical" : " DIFFER") + " (" +
                  std::to_string(a.first.size()) + " + " + std::to_string(a.second.size()) + " bytes); ";
    }
    return judge(ok, detail + "threads 1,1,4,auto");
}

}  // namespace

int main(int argc, char** argv) {
    std::string prostate;
    fs::path workdir = fs::temp_directory_path() / "hardthresh_acceptance";
    std::set<int> only;
    std::set<int> expected_fail;
    auto parse_ids = [](const char* text, std::set<int>& into) {
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) into.insert(std::stoi(tok));
    };
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--prostate" && i + 1 < argc) {
            prostate = argv[++i];
        } else if (arg == "--workdir" && i + 1 < argc) {
            workdir = argv[++i];
        } else if (arg == "--only" && i + 1 < argc) {
            parse_ids(argv[++i], only);
        } else if (arg == "--expect-fail" && i + 1 < argc) {
            parse_ids(argv[++i], expected_fail);
        } else {
            std::cerr << "usage: acceptance [--prostate file] [--workdir dir] [--only N,...]"
                         " [--expect-fail N,...]\n";
            return 2;
        }
    }

    const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
        {1, criterion_1},
        {2, criterion_2},
        {3, criterion_3},
        {4, criterion_4},
        {5, [&] { return criterion_5(prostate); }},
        {6, criterion_6},
        {7, criterion_7},
        {8, [&] { return criterion_8(workdir); }},
    };

    std::vector<int> failed, surprises;
    for (const auto& [id, fn] : criteria) {
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = v.state == Verdict::State::Pass   ? "PASS"
                          : v.state == Verdict::State::Skip ? "SKIP"
                                                            : "FAIL";
        const bool is_fail = v.state == Verdict::State::Fail;
        if (is_fail) failed.push_back(id);
        const bool expected = expected_fail.count(id) > 0;
        if (is_fail != expected && v.state != Verdict::State::Skip) surprises.push_back(id);
        std::cout << "[" << tag << "] criterion " << id << " (" << fmt(secs, 3) << "s): " << v.detail
                  << (is_fail && expected ? " [known failure]" : "")
                  << (!is_fail && expected && v.state == Verdict::State::Pass ? " [expected to fail]" : "")
                  << std::endl;
    }
    auto list = [](const std::vector<int>& ids) {
        std::string s;
        for (int id : ids) s += (s.empty() ? "" : ",") + std::to_string(id);
        return s.empty() ? std::string("none") : s;
    };
    std::cout << "failed: " << list(failed) << "; status differs from expectation: " << list(surprises)
              << std::endl;
    return surprises.empty() ? 0 : 1;
}
