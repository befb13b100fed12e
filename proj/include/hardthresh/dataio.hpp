#pragma once

#include "hardthresh/estimators.hpp"
#include "hardthresh/simulation.hpp"
#include "hardthresh/thresholding.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hardthresh {

// ---------------------------------------------------------------------------
// CSV datasets
// ---------------------------------------------------------------------------

// Reads a header-first CSV whose cells are all numeric. `response_column`
// becomes the response, columns listed in `drop_columns` are ignored, and the
// rest form the design in file order.
//
// Throws ParseError (with 1-based file line and column name), MissingColumn,
// or IoError.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 const std::vector<std::string>& drop_columns = {});

// Writes the design columns followed by the response, full round-trip precision.
void write_dataset_csv(const Dataset& data, const std::string& path,
                       const std::string& response_name = "y");

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

struct StandardizationRecord {
    std::vector<Index> columns;  // which design columns were transformed
    std::vector<double> means;   // parallel to `columns`
    std::vector<double> scales;  // sample sd, divisor n - 1
    bool response_standardized = false;
    double response_mean = 0.0;
    double response_scale = 1.0;
};

// Centers and scales every design column (and the response when asked) to
// sample mean 0, sample sd 1. Throws ZeroVariance naming the column.
std::pair<Dataset, StandardizationRecord> standardize(const Dataset& data,
                                                      bool include_response);

// As above, restricted to `columns`.
std::pair<Dataset, StandardizationRecord> standardize_columns(const Dataset& data,
                                                              std::span<const Index> columns,
                                                              bool include_response);

struct InteractionTerm {
    Index first = 0;
    std::optional<Index> second;  // empty for an original column
};

struct InteractionMap {
    std::vector<InteractionTerm> terms;  // one per expanded column
};

// Appends X_i * X_j for every i < j, labeled "<label_i>:<label_j>", after the
// original columns.
std::pair<Dataset, InteractionMap> interaction_expand(const Dataset& data);

struct PreprocessOptions {
    bool standardize = true;
    bool standardize_response = true;
    bool interactions = false;
    bool intercept = false;
};

// standardize -> (expand, then standardize the product columns) -> (prepend
// an all-ones "(Intercept)" column).
Dataset preprocess(const Dataset& raw, const PreprocessOptions& options);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

enum class ReportFormat { CSV, JSON };

ReportFormat parse_report_format(const std::string& token);

// SelectionResult as JSON (fixed key order; column indices are 0-based) or as a
// risk-profile table with columns k, delta, risk, penalty, criterion, n_excluded.
std::string selection_to_json(const SelectionResult& result,
                              const std::vector<std::string>& labels);
std::string selection_to_csv(const SelectionResult& result);
SelectionResult selection_from_json(const std::string& text);

// Aggregate reports as JSON, or as the measure x (n, p) x penalty table:
//   measure,n,p,<c:r>,<c:r>,...
// with measure blocks delta_hat, fnr_pct, tnr_pct.
std::string aggregates_to_json(std::span<const AggregateReport> reports);
std::string aggregates_to_csv(std::span<const AggregateReport> reports);

// Per-replication audit rows: n,p,c,r,replication,seed,k_hat,delta_hat,fnr,tnr,selected_set.
std::string replications_to_csv(std::span<const AggregateReport> reports);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

void write_report(const SelectionResult& result, const std::vector<std::string>& labels,
                  const std::string& path, ReportFormat format);
void write_report(std::span<const AggregateReport> reports, const std::string& path,
                  ReportFormat format);

}  // namespace hardthresh
