#pragma once

#include "fujita/operator_model.hpp"
#include "fujita/rational.hpp"
#include "fujita/spectral_solver.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace fujita {

/// (t, value) samples, ascending in t.
using Series = std::vector<std::pair<double, double>>;

/// Radial transform of unit-mass gaussian data: f^(rho) = exp(-w^2 rho^2 / 2).
struct RadialProfile {
    double width = 1.0;
    /// Quadrature panels: geometric with this ratio from rho_lo up to the cutoff.
    double panel_ratio = 1.5;
    double rel_tol = 1e-10;

    double amplitude(double rho) const;
    /// Cutoff P with exp(-w^2 P^2) = 1e-40.
    double cutoff() const;
};

/// |S^{n-1}| / (2 pi)^n.
double plancherel_constant(int n);

/// ||d_t^ell u_lin(t)||_{L^2(R^n)} by radial Plancherel quadrature of the (ell, m-1)
/// entry of exp(t A(rho)). Requires a radial operator.
Series l2_decay_curve(const EvolutionOperator& op, const RadialProfile& profile, const std::vector<double>& times,
                      int ell = 0);

/// ||d_t^ell u_lin(t)||_{L^q(box)} on the torus, one exact exponential per time. Returns one series per q.
std::vector<Series> torus_decay_curves(const EvolutionOperator& op, const Grid& grid, const DataProfile& profile,
                                       const std::vector<double>& times, const std::vector<double>& q_list,
                                       int ell = 0);

/// `count` log-uniform times in [t0, t1].
std::vector<double> log_uniform_times(double t0, double t1, int count);

struct DecayFit {
    double q = 2.0;
    double t0 = 0.0;
    double t1 = 0.0;
    int samples = 0;
    double beta_hat = 0.0;     // slope of log value vs log(1+t)
    double fit_residual = 0.0; // RMS of log residuals
    bool power_law = true;     // fit_residual below 1e-2
    double target = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string caveat;
};

/// Least-squares slope on the window; pass iff |beta_hat - target| <= tol.
DecayFit fit_decay(const Series& series, double q, std::pair<double, double> window, double target, double tol);

struct ExponentialFit {
    double t0 = 0.0;
    double t1 = 0.0;
    int samples = 0;
    double rate_hat = 0.0;  // -slope of log value vs t
    double fit_residual = 0.0;
    double target_rate = 0.0;
    double rel_tol = 0.0;
    bool pass = false;
};

/// Log-linear fit; pass iff |rate_hat - target| <= rel_tol * target.
ExponentialFit fit_exponential(const Series& series, std::pair<double, double> window, double target_rate,
                               double rel_tol);

/// min over rho in [0, rho_max] of -max Re(eigenvalues of A(rho)), sampled along e_1
/// on `samples` points and refined around the minimizing sample.
double spectral_gap(const EvolutionOperator& op, double rho_max, int samples = 4001);

/// Per-q check that the linear flow decays at least like (1+t)^{-1/p_c}: pass iff
/// beta_hat <= -1/p_c + tol. Whole-space mode accepts q = 2 only.
std::vector<DecayFit> hypothesis_check(const EvolutionOperator& op, int ell, const ExtRational& p_c,
                                       const std::vector<double>& q_list, const RadialProfile& profile,
                                       std::pair<double, double> window = {10.0, 1e3}, double tol = 0.05);
std::vector<DecayFit> hypothesis_check(const EvolutionOperator& op, int ell, const ExtRational& p_c,
                                       const std::vector<double>& q_list, const Grid& grid,
                                       const DataProfile& profile, std::pair<double, double> window = {10.0, 1e3},
                                       double tol = 0.05);

nlohmann::json to_json(const DecayFit& fit);
nlohmann::json to_json(const ExponentialFit& fit);

}  // namespace fujita
