#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sentssl {

// Bad or insufficient input data (unreadable corpus, too few reviews, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}

  // The offending configuration key, when one is known.
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace sentssl
