#pragma once

#include <stdexcept>
#include <string>

namespace ted {

// Numeric failure modes surfaced by the library. Everything derives from
// std::runtime_error so callers can catch coarsely; the CLI maps the
// detection-type failures to exit code 2 and input problems to exit 1.

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct WindowMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Restricted forward map on a claimed unstable fiber is numerically singular.
struct SingularRestriction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankDeficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotAProjection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IllConditionedBackward : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoGap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoReturn : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Degenerate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Carries the name and value of the certificate defect that broke detection.
struct DetectionFailure : std::runtime_error {
    std::string defect;
    double value;
    double tolerance;
    DetectionFailure(std::string defect_, double value_, double tolerance_)
        : std::runtime_error("detection failed: " + defect_ + " = " +
                             std::to_string(value_) + " exceeds " +
                             std::to_string(tolerance_)),
          defect(std::move(defect_)), value(value_), tolerance(tolerance_) {}
};

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_, const std::string& what_)
        : std::runtime_error(field_ + ": " + what_), field(std::move(field_)) {}
};

}  // namespace ted
