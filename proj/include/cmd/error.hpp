#pragma once

#include <stdexcept>
#include <string>

namespace cmd {

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Configuration rejection, carrying the dotted path of the offending field
// (e.g. "selection.eta").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field_path, const std::string& message)
      : std::runtime_error(field_path + ": " + message),
        field_path_(std::move(field_path)) {}
  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

// Non-finite loss during training; names the epoch where it happened.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(int epoch, const std::string& message)
      : std::runtime_error("epoch " + std::to_string(epoch) + ": " + message),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace cmd
