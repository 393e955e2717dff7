#pragma once

#include "eolsec/state_space.hpp"

#include <Eigen/Sparse>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace eolsec {

enum class VariantKind { Regular, RaaS, RaaSDaaS };

[[nodiscard]] std::string_view to_string(VariantKind kind);
/// Accepts "regular", "raas", "raas_daas" (case-insensitive, '-' or '_').
[[nodiscard]] VariantKind parse_variant(std::string_view name);

struct ModelVariant {
    VariantKind kind = VariantKind::Regular;
    double reconfig_rate = 0.0;  ///< mu_d, unused for Regular
    double rp_rate = 0.0;        ///< lambda_S, 0 for Regular

    [[nodiscard]] static ModelVariant regular() { return {}; }
    [[nodiscard]] static ModelVariant raas(double mu_d, double lambda_s) {
        return {VariantKind::RaaS, mu_d, lambda_s};
    }
    [[nodiscard]] static ModelVariant raas_daas(double mu_d, double lambda_s) {
        return {VariantKind::RaaSDaaS, mu_d, lambda_s};
    }

    /// Throws InvalidArgument on a rate that breaks the variant's invariants.
    void validate() const;
};

/// Sparse CTMC generator. Index layout: regular states, then RaaS states,
/// then DaaS states (the latter two only as instantiated by the variant).
struct RateMatrix {
    Eigen::SparseMatrix<double, Eigen::RowMajor> q;
    std::size_t num_regular = 0;
    std::size_t num_raas = 0;
    std::size_t num_daas = 0;

    [[nodiscard]] std::size_t size() const noexcept { return num_regular + num_raas + num_daas; }
    [[nodiscard]] std::size_t raas_index(std::size_t r) const noexcept { return num_regular + r; }
    [[nodiscard]] std::size_t daas_index(std::size_t d) const noexcept {
        return num_regular + num_raas + d;
    }
    /// Entry q_ij (0 when absent).
    [[nodiscard]] double rate(std::size_t i, std::size_t j) const;
};

[[nodiscard]] RateMatrix assemble_generator(const StateSpace& space, const DemandProfile& profile,
                                            const ModelVariant& variant);

/// Number of closed communicating classes of the transition graph.
[[nodiscard]] std::size_t count_closed_classes(const RateMatrix& q);
/// Single strongly connected component.
[[nodiscard]] bool is_irreducible(const RateMatrix& q);

enum class SolverMethod { SparseLU, Dense };

struct StationaryDistribution {
    std::vector<double> pi;
    double residual = 0.0;  ///< max_j |(pi Q)_j|
};

/// Solves pi Q = 0, sum(pi) = 1. States outside the unique closed class get
/// probability 0. Throws NotIrreducible if there are several closed classes
/// and NoConvergence if the residual stays above tol.
[[nodiscard]] StationaryDistribution solve_stationary(const RateMatrix& q, double tol = 1e-10,
                                                      SolverMethod method = SolverMethod::SparseLU);

/// max_j |(pi Q)_j|
[[nodiscard]] double stationary_residual(const RateMatrix& q, const std::vector<double>& pi);

struct BlockingReport {
    VariantKind variant = VariantKind::Regular;
    std::vector<double> rb;  ///< per class
    std::vector<double> fb;  ///< per class
    double rcb = 0.0;
    double bp = 0.0;

    [[nodiscard]] double total_fb() const;
};

/// BP = RCB + sum_k lambda_k (RB_k + FB_k) / sum_k lambda_k; the weighted
/// part is 0 when no class has arrivals.
[[nodiscard]] double overall_blocking(const DemandProfile& profile, double rcb,
                                      const std::vector<double>& rb, const std::vector<double>& fb);

[[nodiscard]] BlockingReport blocking_report(const std::vector<double>& pi, const StateSpace& space,
                                             const DemandProfile& profile,
                                             const ModelVariant& variant);

} // namespace eolsec
