#include "roga/batch.hpp"

#include <cmath>
#include <string>

#include "roga/errors.hpp"

namespace roga {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("Matrix: " + std::to_string(data_.size()) + " values for " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

void DomainBatch::validate() const {
  if (labels.empty()) throw InputError("batch of domain " + std::to_string(domain_id) + " is empty");
  if (features.rows() != labels.size()) {
    throw DimensionError("batch has " + std::to_string(features.rows()) + " feature rows but " +
                         std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw InputError("label " + std::to_string(y) + " is not 0 or 1");
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw InputError("non-finite feature value");
  }
}

DomainBatch pool_batches(std::span<const DomainBatch> batches) {
  if (batches.empty()) throw InputError("pool_batches: no batches");
  const std::size_t cols = batches.front().features.cols();
  std::size_t rows = 0;
  for (const auto& b : batches) {
    if (b.features.cols() != cols) throw DimensionError("pool_batches: feature widths differ");
    rows += b.size();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  DomainBatch pooled;
  pooled.labels.reserve(rows);
  for (const auto& b : batches) {
    data.insert(data.end(), b.features.data().begin(), b.features.data().end());
    pooled.labels.insert(pooled.labels.end(), b.labels.begin(), b.labels.end());
  }
  pooled.features = Matrix(rows, cols, std::move(data));
  pooled.domain_id = batches.front().domain_id;
  return pooled;
}

}  // namespace roga
