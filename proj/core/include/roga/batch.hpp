#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roga {

/// Dense row-major matrix of features, one row per example.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A minibatch of labelled examples drawn from one domain.
struct DomainBatch {
  Matrix features;
  std::vector<int> labels;
  int domain_id = 0;

  std::size_t size() const noexcept { return labels.size(); }

  /// Throws InputError unless N >= 1, labels are 0/1, rows match labels
  /// and every feature is finite.
  void validate() const;

  bool operator==(const DomainBatch&) const = default;
};

/// Concatenates batches in the given order. The pooled batch keeps the
/// domain_id of the first batch.
DomainBatch pool_batches(std::span<const DomainBatch> batches);

}  // namespace roga
