#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace opera {

enum class ErrorCode {
  parse,
  schema,
  type_conflict,
  timestamp,
  unknown_object_type,
  invalid_window,
  malformed_binding,
  not_enabled,
  invalid_model,
  empty_log,
  non_fitting_trace,
  non_fitting_log,
  missing_visit,
  unknown_measure,
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse: return "ParseError";
    case ErrorCode::schema: return "SchemaError";
    case ErrorCode::type_conflict: return "TypeConflict";
    case ErrorCode::timestamp: return "TimestampError";
    case ErrorCode::unknown_object_type: return "UnknownObjectType";
    case ErrorCode::invalid_window: return "InvalidWindow";
    case ErrorCode::malformed_binding: return "MalformedBinding";
    case ErrorCode::not_enabled: return "NotEnabled";
    case ErrorCode::invalid_model: return "InvalidModel";
    case ErrorCode::empty_log: return "EmptyLog";
    case ErrorCode::non_fitting_trace: return "NonFittingTrace";
    case ErrorCode::non_fitting_log: return "NonFittingLog";
    case ErrorCode::missing_visit: return "MissingVisit";
    case ErrorCode::unknown_measure: return "UnknownMeasure";
  }
  return "Error";
}

// Base of every error raised by the library. `code()` is what the CLI and
// the HTTP layer dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

// Malformed input. `position` is a byte offset (JSON/XML) or a 1-based line
// number (CSV); `position_unit` says which.
class ParseError : public Error {
 public:
  ParseError(const std::string& detail, std::optional<std::size_t> position = {},
             std::string position_unit = "byte")
      : Error(ErrorCode::parse, detail),
        position(position),
        position_unit(std::move(position_unit)) {}

  std::optional<std::size_t> position;
  std::string position_unit;
};

#define OPERA_DEFINE_ERROR(Name, Code)                                   \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& detail) : Error(Code, detail) {}    \
  };

OPERA_DEFINE_ERROR(SchemaError, ErrorCode::schema)
OPERA_DEFINE_ERROR(TypeConflict, ErrorCode::type_conflict)
OPERA_DEFINE_ERROR(TimestampError, ErrorCode::timestamp)
OPERA_DEFINE_ERROR(UnknownObjectType, ErrorCode::unknown_object_type)
OPERA_DEFINE_ERROR(InvalidWindow, ErrorCode::invalid_window)
OPERA_DEFINE_ERROR(MalformedBinding, ErrorCode::malformed_binding)
OPERA_DEFINE_ERROR(NotEnabled, ErrorCode::not_enabled)
OPERA_DEFINE_ERROR(InvalidModel, ErrorCode::invalid_model)
OPERA_DEFINE_ERROR(EmptyLog, ErrorCode::empty_log)
OPERA_DEFINE_ERROR(MissingVisit, ErrorCode::missing_visit)
OPERA_DEFINE_ERROR(UnknownMeasure, ErrorCode::unknown_measure)

#undef OPERA_DEFINE_ERROR

// Raised when a required token is absent and no silent firing sequence can
// produce it. Carries the offending object, event and place.
class NonFittingTrace : public Error {
 public:
  NonFittingTrace(std::string object, std::string event, std::string place,
                  ErrorCode code = ErrorCode::non_fitting_trace)
      : Error(code, "object '" + object + "' cannot replay event '" + event +
                        "': no token in place '" + place + "'"),
        object(std::move(object)),
        event(std::move(event)),
        place(std::move(place)) {}

  std::string object;
  std::string event;
  std::string place;
};

class NonFittingLog : public NonFittingTrace {
 public:
  explicit NonFittingLog(const NonFittingTrace& cause)
      : NonFittingTrace(cause.object, cause.event, cause.place,
                        ErrorCode::non_fitting_log) {}
};

}  // namespace opera
