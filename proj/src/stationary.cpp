#include "eolsec/ctmc.hpp"

#include "eolsec/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace eolsec {

namespace {

constexpr std::size_t dense_limit = 2000;
constexpr int max_refinements = 4;
constexpr double negative_clamp = 1e-12;

// A = Q^T with row 0 replaced by the normalization constraint.
Eigen::SparseMatrix<double> normalized_system(const RateMatrix& m) {
    using Triplet = Eigen::Triplet<double, Eigen::Index>;
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(m.q.nonZeros()) + m.size());
    for (Eigen::Index i = 0; i < m.q.outerSize(); ++i) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m.q, i); it; ++it) {
            if (it.col() != 0) entries.emplace_back(it.col(), i, it.value());
        }
        entries.emplace_back(0, i, 1.0);
    }
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();
    return a;
}

template <typename Solve>
Eigen::VectorXd refine(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                       Solve&& solve, const RateMatrix& m, double tol) {
    Eigen::VectorXd x = solve(b);
    for (int step = 0; step < max_refinements; ++step) {
        std::vector<double> pi(x.data(), x.data() + x.size());
        if (stationary_residual(m, pi) <= tol * 1e-2) break;
        const Eigen::VectorXd r = b - a * x;
        x += solve(r);
    }
    return x;
}

} // namespace

double stationary_residual(const RateMatrix& m, const std::vector<double>& pi) {
    if (pi.size() != m.size()) throw InvalidArgument("distribution size does not match generator");
    const Eigen::Map<const Eigen::VectorXd> p(pi.data(), static_cast<Eigen::Index>(pi.size()));
    const Eigen::VectorXd flow = m.q.transpose() * p;
    return flow.size() == 0 ? 0.0 : flow.cwiseAbs().maxCoeff();
}

StationaryDistribution solve_stationary(const RateMatrix& m, double tol, SolverMethod method) {
    const std::size_t n = m.size();
    if (n == 0) throw InvalidArgument("empty generator");
    if (!(tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
    if (const std::size_t closed = count_closed_classes(m); closed != 1) {
        throw NotIrreducible(closed);
    }

    const Eigen::SparseMatrix<double> a = normalized_system(m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    b(0) = 1.0;

    Eigen::VectorXd x;
    if (method == SolverMethod::SparseLU) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(a);
        lu.factorize(a);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("sparse LU factorization failed: " + lu.lastErrorMessage());
        }
        x = refine(a, b, [&](const Eigen::VectorXd& rhs) { return Eigen::VectorXd(lu.solve(rhs)); },
                   m, tol);
    } else {
        if (n > dense_limit) {
            throw InvalidArgument("dense solver is limited to " + std::to_string(dense_limit) +
                                  " states");
        }
        const Eigen::MatrixXd dense(a);
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
        x = refine(a, b, [&](const Eigen::VectorXd& rhs) { return Eigen::VectorXd(lu.solve(rhs)); },
                   m, tol);
    }

    StationaryDistribution out;
    out.pi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = x(static_cast<Eigen::Index>(i));
        if (!std::isfinite(v)) throw NumericalError("stationary solve produced a non-finite value");
        if (v < 0.0) {
            if (v < -negative_clamp) {
                throw NumericalError("stationary solve produced probability " + std::to_string(v));
            }
            v = 0.0;
        }
        out.pi[i] = v;
    }
    double total = 0.0;
    for (double v : out.pi) total += v;
    for (double& v : out.pi) v /= total;

    out.residual = stationary_residual(m, out.pi);
    if (out.residual > tol) throw NoConvergence(max_refinements, out.residual);
    return out;
}

} // namespace eolsec
