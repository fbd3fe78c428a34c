#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace levelset {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an evaluation (parametric point outside a
/// knot range or reference simplex, malformed input, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap.
class IterationLimitError : public Error {
public:
    IterationLimitError(const std::string& what, int iterations, double residual)
        : Error(what + " (iterations=" + std::to_string(iterations) +
                ", residual=" + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

class InvalidWeightsError : public Error {
public:
    using Error::Error;
};

class InvertedElementError : public Error {
public:
    InvertedElementError(int element, double det)
        : Error("inverted or singular element " + std::to_string(element) +
                " (det J = " + std::to_string(det) + ")"),
          element_(element) {}

    [[nodiscard]] int element() const noexcept { return element_; }

private:
    int element_;
};

/// Mesh size requested along a zero gradient.
class DegenerateDirectionError : public Error {
public:
    using Error::Error;
};

class InvalidGradingError : public Error {
public:
    using Error::Error;
};

/// Projected inverse scaling produced a coefficient below the positivity floor.
class PositivityError : public Error {
public:
    PositivityError(int element, int point, double value, double floor)
        : Error("scaling coefficient " + std::to_string(value) + " below floor " +
                std::to_string(floor) + " at element " + std::to_string(element) +
                ", quadrature point " + std::to_string(point)),
          element_(element), point_(point), value_(value) {}

    [[nodiscard]] int element() const noexcept { return element_; }
    [[nodiscard]] int point() const noexcept { return point_; }
    [[nodiscard]] double value() const noexcept { return value_; }

private:
    int element_;
    int point_;
    double value_;
};

/// Volume correction could not bracket the target volume.
class ConservationError : public Error {
public:
    using Error::Error;
};

/// Picard iteration of the transport step did not converge; carries the
/// relative nonlinear residual of every iterate.
class PicardError : public Error {
public:
    explicit PicardError(std::vector<double> trace)
        : Error(describe(trace)), trace_(std::move(trace)) {}

    [[nodiscard]] const std::vector<double>& trace() const noexcept { return trace_; }

private:
    static std::string describe(const std::vector<double>& trace) {
        std::string s = "Picard iteration did not converge; relative residuals:";
        char buf[32];
        for (double r : trace) {
            std::snprintf(buf, sizeof buf, " %.2e", r);
            s += buf;
        }
        return s;
    }

    std::vector<double> trace_;
};

}  // namespace levelset
