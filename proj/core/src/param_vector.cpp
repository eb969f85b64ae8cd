#include "roga/param_vector.hpp"

#include <cmath>
#include <string>

#include "roga/errors.hpp"

namespace roga {
namespace {

void require_same_length(const ParamVector& a, const ParamVector& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

}  // namespace

double dot(const ParamVector& a, const ParamVector& b) {
  require_same_length(a, b, "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(const ParamVector& a) {
  // Scaled accumulation so huge or tiny entries do not overflow/underflow.
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (double v : a) {
    const double r = v / scale;
    sum += r * r;
  }
  return scale * std::sqrt(sum);
}

ParamVector axpy(const ParamVector& a, double s, const ParamVector& b) {
  require_same_length(a, b, "axpy");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
  return out;
}

ParamVector scaled(const ParamVector& a, double s) {
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

bool all_finite(const ParamVector& a) noexcept {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  require_same_length(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace roga
