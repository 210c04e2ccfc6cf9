#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace covsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a design (or a leave-one-out/resampled design) fails the
/// invertibility guard. Callers treat the offending (dataset, model) pair
/// as unusable rather than recovering.
class SingularDesign : public std::runtime_error {
public:
    explicit SingularDesign(const std::string& what) : std::runtime_error(what) {}
};

/// No dataset in a collection passes the guard for the requested model.
class NoUsableDatasets : public std::runtime_error {
public:
    explicit NoUsableDatasets(const std::string& what) : std::runtime_error(what) {}
};

/// Subset enumeration would exceed the hard cap.
class TooManySubsets : public std::runtime_error {
public:
    explicit TooManySubsets(const std::string& what) : std::runtime_error(what) {}
};

/// Base for input-data problems (CSV schema, malformed cells, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class MissingColumn : public DataError {
public:
    explicit MissingColumn(const std::string& column)
        : DataError("missing column: " + column), column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class NonNumericCell : public DataError {
public:
    NonNumericCell(const std::string& column, std::size_t row, const std::string& cell)
        : DataError("non-numeric cell in column '" + column + "', data row " +
                    std::to_string(row) + ": '" + cell + "'"),
          column_(column),
          row_(row) {}
    const std::string& column() const { return column_; }
    std::size_t row() const { return row_; }

private:
    std::string column_;
    std::size_t row_;
};

class EmptyFile : public DataError {
public:
    explicit EmptyFile(const std::string& path) : DataError("empty file: " + path) {}
};

/// One regression sample: a design matrix with the convention that column 0
/// is the constant 1, a response vector, and column names for resolution of
/// models by covariate name.
struct RegressionDataset {
    std::string id;
    Matrix X;  // rows x d; column 0 identically 1 under the intercept convention
    Vector y;  // length rows
    std::vector<std::string> covariate_names;  // size d

    Eigen::Index rows() const { return X.rows(); }
    Eigen::Index cols() const { return X.cols(); }

    /// Throws DataError on NaN/Inf entries, size mismatches, or an empty sample.
    void validate() const;
};

/// A set of design-matrix column indices identifying a candidate model.
/// Indices are stored sorted; the set is immutable after construction.
class ModelSubset {
public:
    explicit ModelSubset(std::vector<int> indices);

    const std::vector<int>& indices() const { return indices_; }
    int size() const { return static_cast<int>(indices_.size()); }
    bool contains(int column) const;

    /// "[0,1,4]" -- stable identifier used in outputs when no label is given.
    std::string label() const;

    bool operator==(const ModelSubset& other) const { return indices_ == other.indices_; }
    bool operator!=(const ModelSubset& other) const { return !(*this == other); }

    /// Parsimony order: fewer columns first, then lexicographic on indices.
    /// This is also the tie-break order used by the selector.
    bool operator<(const ModelSubset& other) const;

private:
    std::vector<int> indices_;
};

}  // namespace covsel
