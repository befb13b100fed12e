#include "hardthresh/dataio.hpp"

#include "hardthresh/errors.hpp"
#include "hardthresh/format.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hardthresh {

using ojson = nlohmann::ordered_json;

namespace {

// Splits one CSV record starting at `pos`. Handles quoted fields with doubled
// quotes and embedded separators/newlines. Advances `pos` past the record
// terminator and `line` by the number of newlines consumed.
std::vector<std::string> next_record(const std::string& text, std::size_t& pos,
                                     std::size_t& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    while (pos < text.size()) {
        const char ch = text[pos];
        if (quoted) {
            if (ch == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            ++pos;
            continue;
        }
        if (ch == '"') {
            quoted = true;
            ++pos;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
            ++pos;
        } else if (ch == '\r' || ch == '\n') {
            if (ch == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            ++line;
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(ch);
            ++pos;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field at line " + std::to_string(line), line, "");
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool parse_cell(const std::string& raw, double& value) {
    const std::string cell = trim(raw);
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc{} && ptr == last && std::isfinite(value);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

template <typename Range>
std::string join_indices(const Range& idx, char sep) {
    std::string out;
    bool first = true;
    for (auto j : idx) {
        if (!first) out.push_back(sep);
        out += std::to_string(j);
        first = false;
    }
    return out;
}

double column_mean(const Eigen::Ref<const Vector>& col) { return col.mean(); }

double column_sd(const Eigen::Ref<const Vector>& col, double mean) {
    const double n = static_cast<double>(col.size());
    return std::sqrt((col.array() - mean).square().sum() / (n - 1.0));
}

// A column is constant when its spread is at rounding level relative to its size.
bool is_constant(const Eigen::Ref<const Vector>& col, double sd) {
    return !(sd > 1e-12 * std::max(1.0, col.cwiseAbs().maxCoeff()));
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column,
                 const std::vector<std::string>& drop_columns) {
    std::string text = read_text_file(path);
    if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);

    std::size_t pos = 0;
    std::size_t line = 1;
    if (text.empty()) throw ParseError("file is empty: " + path, 1, "");
    std::vector<std::string> header = next_record(text, pos, line);
    for (auto& h : header) h = trim(h);

    const auto response_it = std::find(header.begin(), header.end(), response_column);
    if (response_it == header.end()) throw MissingColumn(response_column);
    const std::size_t response_idx = static_cast<std::size_t>(response_it - header.begin());
    for (const auto& d : drop_columns) {
        if (std::find(header.begin(), header.end(), d) == header.end()) throw MissingColumn(d);
    }

    std::vector<std::size_t> design_idx;
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == response_idx) continue;
        if (std::find(drop_columns.begin(), drop_columns.end(), header[c]) != drop_columns.end()) {
            continue;
        }
        design_idx.push_back(c);
        labels.push_back(header[c]);
    }

    std::vector<std::vector<double>> rows;
    while (pos < text.size()) {
        const std::size_t row_line = line;
        auto fields = next_record(text, pos, line);
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
        if (fields.size() != header.size()) {
            throw ParseError("line " + std::to_string(row_line) + " has " +
                                 std::to_string(fields.size()) + " fields, header has " +
                                 std::to_string(header.size()),
                             row_line, "");
        }
        std::vector<double> values(header.size(), 0.0);
        for (std::size_t c = 0; c < header.size(); ++c) {
            const bool used =
                c == response_idx || std::find(design_idx.begin(), design_idx.end(), c) != design_idx.end();
            if (!used) continue;
            if (!parse_cell(fields[c], values[c])) {
                throw ParseError("non-numeric cell '" + fields[c] + "' at row " +
                                     std::to_string(row_line) + ", column \"" + header[c] + "\"",
                                 row_line, header[c]);
            }
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError("no data rows in " + path, line, "");

    const Index n = static_cast<Index>(rows.size());
    Matrix x(n, static_cast<Index>(design_idx.size()));
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        y[i] = r[response_idx];
        for (std::size_t c = 0; c < design_idx.size(); ++c) x(i, static_cast<Index>(c)) = r[design_idx[c]];
    }
    return Dataset(std::move(x), std::move(y), std::move(labels));
}

void write_dataset_csv(const Dataset& data, const std::string& path,
                       const std::string& response_name) {
    std::string out;
    for (const auto& label : data.labels) out += csv_escape(label) + ",";
    out += csv_escape(response_name) + "\n";
    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.p(); ++j) out += format_double(data.design(i, j)) + ",";
        out += format_double(data.response[i]) + "\n";
    }
    write_text_file(path, out);
}

std::pair<Dataset, StandardizationRecord> standardize_columns(const Dataset& data,
                                                              std::span<const Index> columns,
                                                              bool include_response) {
    if (data.n() < 2) throw InvalidArgument("standardization needs at least two rows");
    Dataset out = data;
    StandardizationRecord rec;
    for (Index j : columns) {
        if (j < 0 || j >= data.p()) throw InvalidArgument("column index out of range");
        const double mean = column_mean(data.design.col(j));
        const double sd = column_sd(data.design.col(j), mean);
        if (is_constant(data.design.col(j), sd)) throw ZeroVariance(data.labels[static_cast<std::size_t>(j)]);
        out.design.col(j) = (data.design.col(j).array() - mean) / sd;
        rec.columns.push_back(j);
        rec.means.push_back(mean);
        rec.scales.push_back(sd);
    }
    if (include_response) {
        const double mean = column_mean(data.response);
        const double sd = column_sd(data.response, mean);
        if (is_constant(data.response, sd)) throw ZeroVariance("response");
        out.response = (data.response.array() - mean) / sd;
        rec.response_standardized = true;
        rec.response_mean = mean;
        rec.response_scale = sd;
    }
    return {std::move(out), std::move(rec)};
}

std::pair<Dataset, StandardizationRecord> standardize(const Dataset& data, bool include_response) {
    std::vector<Index> all(static_cast<std::size_t>(data.p()));
    for (Index j = 0; j < data.p(); ++j) all[static_cast<std::size_t>(j)] = j;
    return standardize_columns(data, all, include_response);
}

std::pair<Dataset, InteractionMap> interaction_expand(const Dataset& data) {
    const Index p = data.p();
    if (p < 2) throw InvalidArgument("interaction expansion needs p >= 2");
    const Index extra = p * (p - 1) / 2;

    Matrix x(data.n(), p + extra);
    x.leftCols(p) = data.design;
    std::vector<std::string> labels = data.labels;
    InteractionMap map;
    for (Index j = 0; j < p; ++j) map.terms.push_back({j, std::nullopt});

    Index col = p;
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j, ++col) {
            x.col(col) = data.design.col(i).cwiseProduct(data.design.col(j));
            labels.push_back(data.labels[static_cast<std::size_t>(i)] + ":" +
                             data.labels[static_cast<std::size_t>(j)]);
            map.terms.push_back({i, j});
        }
    }
    return {Dataset(std::move(x), data.response, std::move(labels)), std::move(map)};
}

Dataset preprocess(const Dataset& raw, const PreprocessOptions& options) {
    Dataset data = raw;
    if (options.standardize) {
        data = standardize(data, options.standardize_response).first;
    }
    if (options.interactions) {
        const Index p0 = data.p();
        data = interaction_expand(data).first;
        if (options.standardize) {
            std::vector<Index> products;
            for (Index j = p0; j < data.p(); ++j) products.push_back(j);
            data = standardize_columns(data, products, false).first;
        }
    }
    if (options.intercept) {
        Matrix x(data.n(), data.p() + 1);
        x.col(0).setOnes();
        x.rightCols(data.p()) = data.design;
        std::vector<std::string> labels{"(Intercept)"};
        labels.insert(labels.end(), data.labels.begin(), data.labels.end());
        data = Dataset(std::move(x), data.response, std::move(labels));
    }
    return data;
}

ReportFormat parse_report_format(const std::string& token) {
    if (token == "csv") return ReportFormat::CSV;
    if (token == "json") return ReportFormat::JSON;
    throw InvalidArgument("unknown report format '" + token + "' (expected csv or json)");
}

namespace {

ojson number_or_null(double v) {
    if (std::isfinite(v)) return ojson(v);
    return ojson(nullptr);
}

ojson vector_json(const Vector& v) {
    ojson arr = ojson::array();
    for (Index j = 0; j < v.size(); ++j) arr.push_back(v[j]);
    return arr;
}

ojson index_json(const std::vector<Index>& idx) {
    ojson arr = ojson::array();
    for (Index j : idx) arr.push_back(j);
    return arr;
}

}  // namespace

std::string selection_to_json(const SelectionResult& result,
                              const std::vector<std::string>& labels) {
    ojson doc;
    doc["k_hat"] = result.k_hat;
    doc["delta_hat"] = result.delta_hat;
    doc["penalty"] = {{"c", result.penalty.c}, {"r", result.penalty.r}};
    doc["irrelevant_set"] = index_json(result.irrelevant_set);
    const auto relevant = result.relevant_set();
    doc["relevant_set"] = index_json(relevant);
    ojson names = ojson::array();
    for (Index j : relevant) {
        names.push_back(static_cast<std::size_t>(j) < labels.size()
                            ? labels[static_cast<std::size_t>(j)]
                            : "X" + std::to_string(j + 1));
    }
    doc["relevant_labels"] = std::move(names);
    doc["beta_hat"] = vector_json(result.beta_hat);
    doc["beta_bar"] = vector_json(result.beta_bar);
    ojson table = ojson::array();
    for (std::size_t k = 0; k < result.profile.per_k.size(); ++k) {
        const auto& e = result.profile.per_k[k];
        ojson row;
        row["k"] = k + 1;
        row["delta"] = e.delta;
        row["risk"] = e.risk;
        row["penalty"] = e.penalty;
        row["criterion"] = e.criterion;
        row["n_excluded"] = e.excluded.size();
        row["excluded"] = index_json(e.excluded);
        row["rank_deficient"] = e.rank_deficient;
        table.push_back(std::move(row));
    }
    doc["profile"] = std::move(table);
    return doc.dump(2) + "\n";
}

SelectionResult selection_from_json(const std::string& text) {
    SelectionResult out;
    try {
        const auto doc = ojson::parse(text);
        out.k_hat = doc.at("k_hat").get<std::size_t>();
        out.delta_hat = doc.at("delta_hat").get<double>();
        out.penalty = {doc.at("penalty").at("c").get<double>(),
                       doc.at("penalty").at("r").get<double>()};
        out.irrelevant_set = doc.at("irrelevant_set").get<std::vector<Index>>();
        const auto beta_hat = doc.at("beta_hat").get<std::vector<double>>();
        const auto beta_bar = doc.at("beta_bar").get<std::vector<double>>();
        out.beta_hat = Eigen::Map<const Vector>(beta_hat.data(), static_cast<Index>(beta_hat.size()));
        out.beta_bar = Eigen::Map<const Vector>(beta_bar.data(), static_cast<Index>(beta_bar.size()));
        for (const auto& row : doc.at("profile")) {
            RiskEntry e;
            e.delta = row.at("delta").get<double>();
            e.risk = row.at("risk").get<double>();
            e.penalty = row.at("penalty").get<double>();
            e.criterion = row.at("criterion").get<double>();
            e.excluded = row.at("excluded").get<std::vector<Index>>();
            e.rank_deficient = row.at("rank_deficient").get<bool>();
            out.profile.per_k.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed selection JSON: ") + e.what(), 0, "");
    }
    return out;
}

std::string selection_to_csv(const SelectionResult& result) {
    std::string out = "k,delta,risk,penalty,criterion,n_excluded\n";
    for (std::size_t k = 0; k < result.profile.per_k.size(); ++k) {
        const auto& e = result.profile.per_k[k];
        out += std::to_string(k + 1) + "," + format_double(e.delta) + "," +
               format_double(e.risk) + "," + format_double(e.penalty) + "," +
               format_double(e.criterion) + "," + std::to_string(e.excluded.size()) + "\n";
    }
    return out;
}

std::string aggregates_to_json(std::span<const AggregateReport> reports) {
    ojson arr = ojson::array();
    for (const auto& r : reports) {
        ojson doc;
        doc["scenario"] = r.scenario;
        doc["n"] = r.n;
        doc["p"] = r.p;
        doc["estimator"] = r.estimator.label();
        doc["penalty"] = {{"c", r.penalty.c}, {"r", r.penalty.r}};
        doc["base_seed"] = r.base_seed;
        doc["replications"] = r.replications;
        doc["mean_delta_hat"] = number_or_null(r.mean_delta_hat);
        doc["mean_fnr_pct"] = number_or_null(r.mean_fnr_pct);
        doc["mean_tnr_pct"] = number_or_null(r.mean_tnr_pct);
        arr.push_back(std::move(doc));
    }
    ojson root;
    root["reports"] = std::move(arr);
    return root.dump(2) + "\n";
}

std::string aggregates_to_csv(std::span<const AggregateReport> reports) {
    std::vector<std::pair<Index, Index>> cells;
    std::vector<std::string> penalties;
    std::map<std::pair<std::pair<Index, Index>, std::string>, const AggregateReport*> lookup;
    for (const auto& r : reports) {
        const auto cell = std::make_pair(r.n, r.p);
        const auto pen = r.penalty.label();
        if (std::find(cells.begin(), cells.end(), cell) == cells.end()) cells.push_back(cell);
        if (std::find(penalties.begin(), penalties.end(), pen) == penalties.end()) {
            penalties.push_back(pen);
        }
        lookup[{cell, pen}] = &r;
    }

    std::string out = "measure,n,p";
    for (const auto& pen : penalties) out += "," + csv_escape(pen);
    out += "\n";
    struct Measure {
        const char* name;
        double AggregateReport::*field;
    };
    const Measure measures[] = {{"delta_hat", &AggregateReport::mean_delta_hat},
                                {"fnr_pct", &AggregateReport::mean_fnr_pct},
                                {"tnr_pct", &AggregateReport::mean_tnr_pct}};
    for (const auto& m : measures) {
        for (const auto& cell : cells) {
            out += std::string(m.name) + "," + std::to_string(cell.first) + "," +
                   std::to_string(cell.second);
            for (const auto& pen : penalties) {
                out += ",";
                const auto it = lookup.find({cell, pen});
                if (it != lookup.end()) out += format_double(it->second->*m.field);
            }
            out += "\n";
        }
    }
    return out;
}

std::string replications_to_csv(std::span<const AggregateReport> reports) {
    std::string out = "n,p,c,r,replication,seed,k_hat,delta_hat,fnr,tnr,selected_set\n";
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
            const auto& o = r.outcomes[i];
            out += std::to_string(r.n) + "," + std::to_string(r.p) + "," +
                   format_double(r.penalty.c) + "," + format_double(r.penalty.r) + "," +
                   std::to_string(i) + "," + std::to_string(o.seed) + "," +
                   std::to_string(o.k_hat) + "," + format_double(o.delta_hat) + "," +
                   format_double(o.fnr) + "," + (o.tnr ? format_double(*o.tnr) : "") + "," +
                   join_indices(o.selected_set, ' ') + "\n";
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing", path);
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed", path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_report(const SelectionResult& result, const std::vector<std::string>& labels,
                  const std::string& path, ReportFormat format) {
    write_text_file(path, format == ReportFormat::JSON ? selection_to_json(result, labels)
                                                       : selection_to_csv(result));
}

void write_report(std::span<const AggregateReport> reports, const std::string& path,
                  ReportFormat format) {
    write_text_file(path, format == ReportFormat::JSON ? aggregates_to_json(reports)
                                                       : aggregates_to_csv(reports));
}

}  // namespace hardthresh
