#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace roga {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vectors, batches or parameter counts that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid caller-supplied input (empty score list, zero direction, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A metric was asked for on data that lacks one of the two classes.
class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

/// Configuration problems. `key_path` names the offending key when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string key_path = {})
      : Error(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// A loss, gradient or update became NaN/Inf.
class NumericError : public Error {
 public:
  NumericError(const std::string& message, std::optional<int> domain_id = std::nullopt,
               std::optional<long> step = std::nullopt)
      : Error(decorate(message, domain_id, step)),
        base_message_(message),
        domain_id_(domain_id),
        step_(step) {}

  /// The message without the domain/step suffix.
  const std::string& base_message() const noexcept { return base_message_; }
  std::optional<int> domain_id() const noexcept { return domain_id_; }
  std::optional<long> step() const noexcept { return step_; }

 private:
  static std::string decorate(const std::string& message, std::optional<int> domain_id,
                              std::optional<long> step) {
    std::string out = message;
    if (domain_id) out += " (domain " + std::to_string(*domain_id) + ")";
    if (step) out += " (step " + std::to_string(*step) + ")";
    return out;
  }

  std::string base_message_;
  std::optional<int> domain_id_;
  std::optional<long> step_;
};

/// File system failures; the message always carries the path.
class IoError : public Error {
 public:
  IoError(const std::string& message, const std::string& path)
      : Error(message + ": " + path), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace roga
