#pragma once

#include "fujita/fft.hpp"
#include "fujita/mu_library.hpp"
#include "fujita/operator_model.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fujita {

/// Periodic box [-L/2, L/2)^n sampled with N points per dimension (row-major).
struct Grid {
    int n = 1;
    int N = 64;
    double L = 2 * 3.14159265358979323846;

    void validate() const;
    int total() const { return n == 1 ? N : N * N; }
    double dx() const { return L / N; }
    double cell_volume() const { return n == 1 ? dx() : dx() * dx(); }

    /// Signed wavenumber of a 1D FFT index.
    int wavenumber(int index) const { return index <= N / 2 ? index : index - N; }
    /// 2/3 rule: every |k| <= N/3 (the Nyquist mode is always dropped).
    bool retained(int flat) const;
    std::vector<double> frequency(int flat) const;
    std::vector<double> position(int flat) const;
};

struct DataProfile {
    enum class Kind { gaussian, bump, custom };

    Kind kind = Kind::gaussian;
    double width = 1.0;
    std::vector<double> table;  // custom: N^n samples in grid order

    static DataProfile gaussian(double width);
    static DataProfile bump(double width);
    static DataProfile custom(std::vector<double> table);
};

/// Physical samples of a profile: unit-mass gaussian (2 pi w^2)^{-n/2} e^{-|x|^2/2w^2},
/// bump (1 - |x|^2/w^2)_+^4, or the custom table. Enforces the edge/peak < 1e-12 guard.
std::vector<double> sample_profile(const DataProfile& profile, const Grid& grid);

/// E = exp(dt A) and Phi = int_0^dt exp(s A) ds from the exponential of the block
/// matrix [[A, I], [0, 0]] (no inversion of A).
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> exp_and_phi(const Eigen::MatrixXcd& A, double dt);

/// Per retained mode: E and the last column of Phi (the source enters slot m-1).
class ModePropagator {
public:
    ModePropagator(const EvolutionOperator& op, const Grid& grid, double dt);

    double dt() const noexcept { return dt_; }
    int m() const noexcept { return m_; }
    const Grid& grid() const noexcept { return grid_; }
    const std::vector<int>& modes() const noexcept { return modes_; }
    const Eigen::MatrixXcd& E(std::size_t k) const { return E_[k]; }
    const Eigen::VectorXcd& phi(std::size_t k) const { return phi_[k]; }

private:
    double dt_;
    int m_;
    Grid grid_;
    std::vector<int> modes_;
    std::vector<Eigen::MatrixXcd> E_;
    std::vector<Eigen::VectorXcd> phi_;
};

/// Spectral state: layers[j] holds the transform of d_t^j u on the full grid,
/// zero outside the dealiasing mask.
struct SimState {
    double t = 0.0;
    Grid grid;
    std::vector<std::vector<Complex>> layers;

    int m() const { return static_cast<int>(layers.size()); }
};

SimState init_state(const EvolutionOperator& op, const Grid& grid, const DataProfile& profile, double amplitude);

/// Real physical field of layer j.
std::vector<double> physical_layer(const SimState& state, int j, Fft& fft, double* imag_ratio = nullptr);

SimState linear_step(const SimState& state, const ModePropagator& prop);

/// Right-hand side of L u = F(d_t^ell u) + g(t, x).
struct SourceTerm {
    int ell = 0;
    std::optional<NonlinearitySpec> nonlinearity;
    std::function<double(double t, std::span<const double> x)> forcing;
};

/// Exponential-integrator step with trapezoidal corrector. Throws BlowupDetected
/// (carrying state.t) when the update produces non-finite values.
SimState nonlinear_step(const SimState& state, const ModePropagator& prop, const SourceTerm& source, Fft& fft);
SimState nonlinear_step(const SimState& state, const ModePropagator& prop, const NonlinearitySpec& nl, Fft& fft);

struct RunConfig {
    Grid grid;
    double dt = 0.01;
    double T = 1.0;
    int cadence = 1;  // diagnostics every `cadence` steps
    DataProfile profile;
    double amplitude = 1.0;
    int ell = 0;
    std::optional<NonlinearitySpec> nonlinearity;
    std::function<double(double t, std::span<const double> x)> forcing;
    /// Exponent of the X-norm weights and of the L^p column; defaults to the nonlinearity's p, else 2.
    std::optional<double> weight_exponent;
    double blowup_factor = 1e6;
    bool record_fields = false;

    void validate() const;
};

struct SeriesRow {
    double t = 0.0;
    /// norms[k] = {L^1, L^2, L^p, L^inf} of d_t^k u for k = 0..ell.
    std::vector<std::array<double, 4>> norms;
    double x_norm = 0.0;  // running supremum
};

struct RunReport {
    enum class Outcome { completed, blowup_detected, aborted };

    Outcome outcome = Outcome::completed;
    std::optional<double> blowup_time;
    std::string message;
    std::vector<SeriesRow> series;
    long steps = 0;
    double dt = 0.0;
    double weight_exponent = 2.0;
    int ell = 0;
    std::size_t retained_modes = 0;
    std::size_t dealiased_modes = 0;
    double max_imag_ratio = 0.0;
    double sign_functional = 0.0;
    std::string box_caveat;
    std::optional<double> box_horizon;

    // Recorded space-time data (record_fields): d_t^ell u at every step, and the data f.
    Grid grid;
    std::vector<double> frame_times;
    std::vector<std::vector<double>> frames;
    std::vector<double> data;
};

std::string outcome_name(RunReport::Outcome o);

RunReport run(const EvolutionOperator& op, const RunConfig& config);

double lq_norm(std::span<const double> field, double q, double cell_volume);

/// sum_{j in I} c_{j+1,0} int u_j with I = { j >= ell : c_{j+1,0} != 0 } for the layout u_{m-1} = f.
double sign_functional(const EvolutionOperator& op, int ell, std::span<const double> data, double cell_volume);

nlohmann::json to_json(const RunReport& report);

}  // namespace fujita
