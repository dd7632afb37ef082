#pragma once

#include <stdexcept>
#include <string>

namespace demogp {

struct DegenerateKnots : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SurfaceFitFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingAgeModel : std::runtime_error {
  explicit MissingAgeModel(int age)
      : std::runtime_error("no fitted model for age " + std::to_string(age)),
        age(age) {}
  int age;
};

struct IncompleteSurface : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WindowOverrun : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DuplicateCell : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line(line) {}
  std::size_t line;
};

struct MissingAgeRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace demogp
