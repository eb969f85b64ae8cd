#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace roga {

/// Flat parameter-space vector. Holds parameters, gradients and
/// perturbations alike; its length is fixed once constructed.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t size, double fill = 0.0) : values_(size, fill) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}

  static ParamVector zeros(std::size_t size) { return ParamVector(size); }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Sum of a_i * b_i. Throws DimensionError on length mismatch.
double dot(const ParamVector& a, const ParamVector& b);

/// Euclidean norm.
double norm(const ParamVector& a);

/// a + s * b, componentwise. Throws DimensionError on length mismatch.
ParamVector axpy(const ParamVector& a, double s, const ParamVector& b);

ParamVector scaled(const ParamVector& a, double s);

bool all_finite(const ParamVector& a) noexcept;

/// Largest |a_i - b_i|.
double max_abs_diff(const ParamVector& a, const ParamVector& b);

}  // namespace roga
