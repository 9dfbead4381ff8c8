#pragma once

// Node-by-hour value fields shared by the OPF, data preparation and
// evaluation code. Rows are nodes (grid order), columns are hours.

#include <Eigen/Dense>

#include <string>

#include "oascen/errors.hpp"

namespace oascen {

/// Net load d_{i,t} in MW.
struct NetLoadProfile {
    Eigen::MatrixXd mw;

    [[nodiscard]] Eigen::Index nodes() const { return mw.rows(); }
    [[nodiscard]] Eigen::Index hours() const { return mw.cols(); }
};

enum class ErrorKind { Normalized, PhysicalMW };

inline const char* to_string(ErrorKind k) { return k == ErrorKind::Normalized ? "normalized" : "physical_mw"; }

/// Forecast error field; the kind travels with the values.
struct ErrorField {
    Eigen::MatrixXd values;
    ErrorKind kind{ErrorKind::Normalized};

    [[nodiscard]] Eigen::Index nodes() const { return values.rows(); }
    [[nodiscard]] Eigen::Index hours() const { return values.cols(); }

    void require(ErrorKind expected, const char* where) const {
        if (kind != expected)
            throw ValidationError(std::string(where) + ": expected " + to_string(expected) + " error field, got " +
                                  to_string(kind));
    }
};

}  // namespace oascen
