#pragma once

#include <stdexcept>
#include <string>

namespace oascen {

/// Broad failure category; the CLI maps these onto process exit codes.
enum class ErrorCategory { Validation, Solver, Io };

class Error : public std::runtime_error {
public:
    Error(std::string kind, ErrorCategory category, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)), category_(category) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }
    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    std::string kind_;
    ErrorCategory category_;
};

#define OASCEN_DEFINE_ERROR(Name, Category)                                   \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what)                                \
            : Error(#Name, ErrorCategory::Category, what) {}                  \
    };

OASCEN_DEFINE_ERROR(ParseError, Validation)
OASCEN_DEFINE_ERROR(ValidationError, Validation)
OASCEN_DEFINE_ERROR(UnknownNode, Validation)
OASCEN_DEFINE_ERROR(DegenerateDay, Validation)
OASCEN_DEFINE_ERROR(InsufficientData, Validation)
OASCEN_DEFINE_ERROR(DimensionMismatch, Validation)
OASCEN_DEFINE_ERROR(ConfigError, Validation)
OASCEN_DEFINE_ERROR(InfeasibleDispatch, Solver)
OASCEN_DEFINE_ERROR(InfeasibleReserve, Solver)
OASCEN_DEFINE_ERROR(SolverFailure, Solver)
OASCEN_DEFINE_ERROR(IoError, Io)

#undef OASCEN_DEFINE_ERROR

}  // namespace oascen
