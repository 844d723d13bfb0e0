#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qvar {

// Argument outside the mathematical domain of an operation (q >= 3, p == 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Input data is well-formed but unusable (duplicates, too short, zero variance).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input record. Row numbers are 1-based file lines.
class ParseError : public DataError {
public:
    ParseError(std::size_t row, const std::string& what)
        : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Quadrature or root finding did not converge, or a matrix was not positive definite.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Likelihood maximization did not converge; carries the best point seen.
class EstimationError : public NumericError {
public:
    EstimationError(const std::string& what, double best_q, double best_sigma, double best_loglik)
        : NumericError(what), best_q_(best_q), best_sigma_(best_sigma), best_loglik_(best_loglik) {}

    double best_q() const noexcept { return best_q_; }
    double best_sigma() const noexcept { return best_sigma_; }
    double best_loglik() const noexcept { return best_loglik_; }

private:
    double best_q_;
    double best_sigma_;
    double best_loglik_;
};

}  // namespace qvar
