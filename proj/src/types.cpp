#include "covsel/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace covsel {

void RegressionDataset::validate() const {
    if (X.rows() < 1) throw DataError("dataset '" + id + "': no rows");
    if (y.size() != X.rows()) {
        throw DataError("dataset '" + id + "': response length " + std::to_string(y.size()) +
                        " does not match " + std::to_string(X.rows()) + " design rows");
    }
    if (!covariate_names.empty() &&
        covariate_names.size() != static_cast<std::size_t>(X.cols())) {
        throw DataError("dataset '" + id + "': " + std::to_string(covariate_names.size()) +
                        " covariate names for " + std::to_string(X.cols()) + " columns");
    }
    if (!X.allFinite()) throw DataError("dataset '" + id + "': non-finite design entry");
    if (!y.allFinite()) throw DataError("dataset '" + id + "': non-finite response entry");
}

ModelSubset::ModelSubset(std::vector<int> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) throw std::invalid_argument("ModelSubset: empty index set");
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
        throw std::invalid_argument("ModelSubset: duplicate column index");
    }
    if (indices_.front() < 0) throw std::invalid_argument("ModelSubset: negative column index");
}

bool ModelSubset::contains(int column) const {
    return std::binary_search(indices_.begin(), indices_.end(), column);
}

std::string ModelSubset::label() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (i) os << ',';
        os << indices_[i];
    }
    os << ']';
    return os.str();
}

bool ModelSubset::operator<(const ModelSubset& other) const {
    if (indices_.size() != other.indices_.size()) {
        return indices_.size() < other.indices_.size();
    }
    return indices_ < other.indices_;
}

}  // namespace covsel
