#pragma once

#include <stdexcept>
#include <string>

namespace docsynth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on a domain value (bad sheet size, bad uv rect, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

enum class SpecErrorKind {
  kSyntax,
  kUnknownParameter,
  kRangeOrder,
  kNonPositiveWeight,
  kDuplicatePath,
  kInvalidValue,
};

const char* to_string(SpecErrorKind kind);

class SpecError : public Error {
 public:
  SpecError(SpecErrorKind kind, std::string path, const std::string& message)
      : Error(std::string(to_string(kind)) + ": " + message), kind_(kind), path_(std::move(path)) {}

  SpecErrorKind kind() const { return kind_; }
  /// Parameter path or key the error refers to; empty for syntax errors.
  const std::string& path() const { return path_; }

 private:
  SpecErrorKind kind_;
  std::string path_;
};

enum class GeometryErrorKind {
  kPointBehindCamera,
  kNonPlanarSheet,
  kDegenerateCamera,
  kDegenerateView,
  kZeroVector,
};

class GeometryError : public Error {
 public:
  GeometryError(GeometryErrorKind kind, const std::string& message) : Error(message), kind_(kind) {}
  GeometryErrorKind kind() const { return kind_; }

 private:
  GeometryErrorKind kind_;
};

enum class ImageErrorKind { kUnsupportedFormat, kCorrupt, kZeroDimension, kIo };

class ImageError : public Error {
 public:
  ImageError(ImageErrorKind kind, const std::string& message) : Error(message), kind_(kind) {}
  ImageErrorKind kind() const { return kind_; }

 private:
  ImageErrorKind kind_;
};

enum class IoErrorKind { kWriteFailed, kPathCollision, kReadFailed, kMalformed };

class IoError : public Error {
 public:
  IoError(IoErrorKind kind, const std::string& message) : Error(message), kind_(kind) {}
  IoErrorKind kind() const { return kind_; }

 private:
  IoErrorKind kind_;
};

}  // namespace docsynth
