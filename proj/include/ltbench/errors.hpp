#pragma once

#include <stdexcept>
#include <string>

namespace lt {

/// Base of every error raised by the library. Each subclass corresponds to one
/// failure class of the public operations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value outside its admissible range. `field()` names the offending field.
class RangeError : public Error {
 public:
  RangeError(std::string field, const std::string& detail)
      : Error("RangeError(" + field + "): " + detail), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

#define LT_DEFINE_ERROR(Name)                         \
  class Name : public Error {                         \
   public:                                            \
    explicit Name(const std::string& what)            \
        : Error(std::string(#Name ": ") + what) {}    \
  };

LT_DEFINE_ERROR(ParamError)
LT_DEFINE_ERROR(ShapeError)
LT_DEFINE_ERROR(NonFinite)
LT_DEFINE_ERROR(FormatError)
LT_DEFINE_ERROR(RankDeficient)
LT_DEFINE_ERROR(Saturated)
LT_DEFINE_ERROR(CyclicGraph)
LT_DEFINE_ERROR(UnknownTarget)
LT_DEFINE_ERROR(OutOfBounds)
LT_DEFINE_ERROR(ConstantColumn)
LT_DEFINE_ERROR(NotBinary)
LT_DEFINE_ERROR(DegenerateSplit)
LT_DEFINE_ERROR(ChecksumError)
LT_DEFINE_ERROR(NetworkError)
LT_DEFINE_ERROR(IntegrityError)
LT_DEFINE_ERROR(NotFound)

#undef LT_DEFINE_ERROR

/// Missing (or otherwise malformed) columns in a tabular file.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("SchemaError: " + what) {}
};

}  // namespace lt
