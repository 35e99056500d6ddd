#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pftl/errors.hpp"

namespace pftl::linalg {

/// Largest system handed to the dense solver.
inline constexpr std::size_t kDenseCutoff = 10000;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Solves a x = b by LU with partial pivoting and rejects numerically singular systems.
inline std::vector<double> solve(const Matrix& a, const Vector& b, const char* what) {
    if (a.rows() == 0) return {};
    if (static_cast<std::size_t>(a.rows()) > kDenseCutoff) {
        throw NumericError(std::string(what) + ": system of size " + std::to_string(a.rows()) +
                           " exceeds the dense solver cutoff");
    }
    const Eigen::PartialPivLU<Matrix> lu(a);
    const Vector x = lu.solve(b);
    const double residual = (a * x - b).lpNorm<Eigen::Infinity>();
    if (!x.allFinite() || residual > 1e-8 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
        throw NumericError(std::string(what) + ": singular linear system (residual " + std::to_string(residual) + ")");
    }
    return {x.data(), x.data() + x.size()};
}

}  // namespace pftl::linalg
