#include "covsel/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace covsel::io {

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

double parse_double(const std::string& cell, const std::string& column, std::size_t data_row) {
    std::size_t begin = cell.find_first_not_of(" \t");
    if (begin == std::string::npos) throw NonNumericCell(column, data_row, cell);
    std::size_t end = cell.find_last_not_of(" \t") + 1;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data() + begin, cell.data() + end, value);
    if (ec != std::errc{} || ptr != cell.data() + end) {
        throw NonNumericCell(column, data_row, cell);
    }
    return value;
}

}  // namespace

int CsvTable::column_index(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.empty()) throw EmptyFile(path);

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;

    auto end_field = [&]() {
        fields.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&]() {
        end_field();
        records.push_back(std::move(fields));
        fields.clear();
        row_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': in_quotes = true; row_started = true; break;
            case ',': end_field(); row_started = true; break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_record();
                break;
            case '\n': end_record(); break;
            default: field += c; row_started = true; break;
        }
    }
    if (row_started || !fields.empty() || !field.empty()) end_record();
    if (records.empty()) throw EmptyFile(path);

    CsvTable table;
    table.header = std::move(records.front());
    table.rows.assign(std::make_move_iterator(records.begin() + 1),
                      std::make_move_iterator(records.end()));
    return table;
}

std::string csv_quote(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    auto write_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_quote(row[i]);
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) write_row(row);
}

std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string format_exact(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

MultiSampleCollection load_collection(const std::string& path, const CollectionSchema& schema,
                                      LoadReport* report) {
    CsvTable table = read_csv(path);

    const int id_col = table.column_index(schema.id_column);
    if (id_col < 0) throw MissingColumn(schema.id_column);
    const int y_col = table.column_index(schema.response_column);
    if (y_col < 0) throw MissingColumn(schema.response_column);
    std::vector<int> x_cols;
    for (const std::string& name : schema.covariate_columns) {
        const int c = table.column_index(name);
        if (c < 0) throw MissingColumn(name);
        x_cols.push_back(c);
    }

    // group rows by id, ascending
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != table.header.size()) {
            throw DataError("data row " + std::to_string(r + 1) + " has " +
                            std::to_string(table.rows[r].size()) + " fields, expected " +
                            std::to_string(table.header.size()));
        }
        groups[table.rows[r][static_cast<std::size_t>(id_col)]].push_back(r);
    }

    std::vector<std::string> names{"intercept"};
    names.insert(names.end(), schema.covariate_columns.begin(), schema.covariate_columns.end());

    std::vector<RegressionDataset> datasets;
    if (report) {
        report->rows_read = static_cast<int>(table.rows.size());
        report->dropped.clear();
    }
    for (const auto& [id, rows] : groups) {
        if (static_cast<int>(rows.size()) < schema.min_rows) {
            if (report) report->dropped.emplace_back(id, static_cast<int>(rows.size()));
            continue;
        }
        RegressionDataset ds;
        ds.id = id;
        ds.covariate_names = names;
        ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(1 + x_cols.size()));
        ds.y.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& record = table.rows[rows[i]];
            ds.X(static_cast<Eigen::Index>(i), 0) = 1.0;
            ds.y(static_cast<Eigen::Index>(i)) =
                parse_double(record[static_cast<std::size_t>(y_col)], schema.response_column,
                             rows[i] + 1);
            for (std::size_t j = 0; j < x_cols.size(); ++j) {
                ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) =
                    parse_double(record[static_cast<std::size_t>(x_cols[j])],
                                 schema.covariate_columns[j], rows[i] + 1);
            }
        }
        datasets.push_back(std::move(ds));
    }
    return MultiSampleCollection(std::move(datasets));
}

void write_collection_csv(const std::string& path, const MultiSampleCollection& collection,
                          const std::string& id_column, const std::string& response_column) {
    if (collection.empty()) throw DataError("cannot write an empty collection");
    const auto& names = collection.at(0).covariate_names;
    for (const RegressionDataset& ds : collection.datasets()) {
        if (ds.covariate_names != names) {
            throw DataError("datasets disagree on covariate names; cannot serialize");
        }
    }

    CsvTable table;
    table.header.push_back(id_column);
    table.header.push_back(response_column);
    for (std::size_t j = 1; j < names.size(); ++j) table.header.push_back(names[j]);

    for (const RegressionDataset& ds : collection.datasets()) {
        for (Eigen::Index i = 0; i < ds.rows(); ++i) {
            std::vector<std::string> row;
            row.push_back(ds.id);
            row.push_back(format_exact(ds.y(i)));
            for (Eigen::Index j = 1; j < ds.cols(); ++j) row.push_back(format_exact(ds.X(i, j)));
            table.rows.push_back(std::move(row));
        }
    }
    write_csv(path, table);
}

const std::vector<std::string>& LongTable::header() {
    static const std::vector<std::string> kHeader{"experiment", "n",       "model", "metric",
                                                  "value",      "se_or_sd", "j_used", "flags"};
    return kHeader;
}

CsvTable LongTable::to_csv() const {
    CsvTable table;
    table.header = header();
    for (const LongRow& r : rows_) {
        table.rows.push_back({r.experiment, r.n, r.model, r.metric, r.value, r.se_or_sd, r.j_used,
                              r.flags});
    }
    return table;
}

void LongTable::write(const std::string& path) const { write_csv(path, to_csv()); }

CsvTable LongTable::to_wide() const {
    // rows keyed by (experiment, n), columns by (model, metric), both in
    // first-appearance order
    std::vector<std::pair<std::string, std::string>> row_keys;
    std::vector<std::pair<std::string, std::string>> col_keys;
    std::map<std::pair<std::string, std::string>, std::size_t> row_pos;
    std::map<std::pair<std::string, std::string>, std::size_t> col_pos;

    for (const LongRow& r : rows_) {
        auto rk = std::make_pair(r.experiment, r.n);
        if (row_pos.emplace(rk, row_keys.size()).second) row_keys.push_back(rk);
        auto ck = std::make_pair(r.model, r.metric);
        if (col_pos.emplace(ck, col_keys.size()).second) col_keys.push_back(ck);
    }

    CsvTable out;
    out.header = {"experiment", "n"};
    for (const auto& [model, metric] : col_keys) {
        out.header.push_back(model.empty() ? metric : model + ":" + metric);
    }
    out.rows.assign(row_keys.size(),
                    std::vector<std::string>(out.header.size(), std::string{}));
    for (std::size_t i = 0; i < row_keys.size(); ++i) {
        out.rows[i][0] = row_keys[i].first;
        out.rows[i][1] = row_keys[i].second;
    }
    for (const LongRow& r : rows_) {
        const std::size_t i = row_pos[{r.experiment, r.n}];
        const std::size_t j = 2 + col_pos[{r.model, r.metric}];
        out.rows[i][j] = r.se_or_sd.empty() ? r.value : r.value + " (" + r.se_or_sd + ")";
    }
    return out;
}

void LongTable::write_wide(const std::string& path) const { write_csv(path, to_wide()); }

}  // namespace covsel::io
