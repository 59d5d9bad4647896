#pragma once

#include "fujita/operator_model.hpp"
#include "fujita/rational.hpp"
#include "fujita/spectral_solver.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <vector>

namespace fujita {

/// psi(t, x) = chi((t + |x|^eta_bar) / R)^q with chi = 1 on [0, 1/2], 0 on [1, inf) and the
/// C-infinity transition e^{-1/(1-r)} / (e^{-1/(1-r)} + e^{-1/r}), r = 2s - 1, in between.
struct TestFunctionSpec {
    double R = 1.0;
    int q = 1;
    double eta_bar = 2.0;

    void validate() const;
};

/// q = ceil(max_{j in J} (d_j + (j - ell)_+) * p_c / (p_c - 1)); p_c = inf gives conjugate 1.
int default_test_exponent(const EvolutionOperator& op, int ell, const ExtRational& p_c);

/// d_t^k psi(t, x) for k = 0..order.
std::vector<double> test_function_time_derivatives(const TestFunctionSpec& tf, double t, std::span<const double> x,
                                                   int order);

struct ResidualReport {
    double residual = 0.0;   // |lhs - rhs| / scale
    double lhs = 0.0;
    double rhs = 0.0;
    std::vector<double> level_terms;  // signed contribution of each level j = 0..m
    double boundary_term = 0.0;       // - int f psi(0)
    double scale = 0.0;               // |lhs| + sum |level terms| + |boundary| + floor
    double quadrature_error = 0.0;    // stride-2 trapezoid comparison, same normalization
};

/// Weak-form identity residual of a recorded run (record_fields) against psi. The data
/// layout is d_t^j u(0) = 0 for j < m-1 and d_t^{m-1} u(0) = f, so the only boundary
/// term is - int f psi(0). `source` supplies the right-hand side F(d_t^ell u) + g.
ResidualReport weak_residual(const RunReport& recorded, const TestFunctionSpec& tf, const EvolutionOperator& op,
                             const SourceTerm& source);

nlohmann::json to_json(const ResidualReport& r);

}  // namespace fujita
