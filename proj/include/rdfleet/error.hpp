#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rdfleet {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mesh construction or loading violated a geometric invariant.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Text input (mesh file, model file, propensity expression) could not be parsed.
/// `line` is 1-based (0 when not applicable); `column` is a 0-based offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A model is structurally invalid (undeclared names, forbidden placements).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A model misbehaved while being simulated, e.g. a custom propensity went negative.
class ModelRuntimeError : public Error {
 public:
  ModelRuntimeError(const std::string& what, std::size_t voxel, std::string reaction, double time)
      : Error(what), voxel_(voxel), reaction_(std::move(reaction)), time_(time) {}

  std::size_t voxel() const noexcept { return voxel_; }
  const std::string& reaction() const noexcept { return reaction_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t voxel_;
  std::string reaction_;
  double time_;
};

/// The solver hit its event-count safety cap.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// An enumerated state space or other bounded resource is too large.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Statistics were requested for fewer than two realizations.
class VarianceUndefined : public Error {
 public:
  using Error::Error;
};

/// A post-processor is unknown, misconfigured, or returned the wrong arity.
class PostProcessorError : public Error {
 public:
  using Error::Error;
};

/// A realization task failed after its retry; carries the realization index and seed.
class TaskError : public Error {
 public:
  TaskError(const std::string& what, std::uint64_t index, std::uint64_t seed)
      : Error(what), index_(index), seed_(seed) {}

  std::uint64_t index() const noexcept { return index_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t index_;
  std::uint64_t seed_;
};

}  // namespace rdfleet
