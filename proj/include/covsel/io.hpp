#pragma once

#include "covsel/criterion.hpp"
#include "covsel/types.hpp"

#include <string>
#include <vector>

namespace covsel::io {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 when absent
};

/// RFC-4180-compatible reader: quoted fields, escaped quotes, CRLF or LF.
/// Throws EmptyFile when the file has no header row.
CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const CsvTable& table);

std::string csv_quote(const std::string& field);

/// Numeric formatting for output tables; non-finite values become the
/// literals "inf", "-inf", "nan".
std::string format_value(double v);

/// Full-precision formatting that round-trips IEEE doubles exactly.
std::string format_exact(double v);

struct CollectionSchema {
    std::string id_column;
    std::string response_column;
    std::vector<std::string> covariate_columns;
    int min_rows = 1;  // datasets with fewer rows are dropped (and reported)
};

struct LoadReport {
    int rows_read = 0;
    std::vector<std::pair<std::string, int>> dropped;  // (id, rows) below min_rows
};

/// Groups the file's rows by the id column into one dataset per id, in
/// ascending id order, prepending the constant intercept column. Columns
/// must be numeric (categoricals pre-encoded).
MultiSampleCollection load_collection(const std::string& path, const CollectionSchema& schema,
                                      LoadReport* report = nullptr);

/// Inverse of load_collection: one row per observation with the dataset id,
/// response, and the non-intercept covariates, at full precision.
void write_collection_csv(const std::string& path, const MultiSampleCollection& collection,
                          const std::string& id_column = "id",
                          const std::string& response_column = "y");

/// Long-format result table with a fixed column order.
struct LongRow {
    std::string experiment;
    std::string n;
    std::string model;
    std::string metric;
    std::string value;
    std::string se_or_sd;
    std::string j_used;
    std::string flags;
};

class LongTable {
public:
    static const std::vector<std::string>& header();

    void add(LongRow row) { rows_.push_back(std::move(row)); }
    const std::vector<LongRow>& rows() const { return rows_; }

    CsvTable to_csv() const;
    void write(const std::string& path) const;

    /// Pivot to one row per n and one column per (model, metric); the
    /// se_or_sd accompanies the value as "value (sd)".
    CsvTable to_wide() const;
    void write_wide(const std::string& path) const;

private:
    std::vector<LongRow> rows_;
};

}  // namespace covsel::io
