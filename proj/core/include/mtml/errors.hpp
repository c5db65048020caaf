#pragma once

#include <stdexcept>
#include <string>

namespace mtml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unparseable experiment configuration. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config: " + field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ChannelError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

/// A training stage was requested before its prerequisite stages completed.
class StageOrderError : public Error {
 public:
  using Error::Error;
};

/// Loss became non-finite during optimisation.
class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtml
