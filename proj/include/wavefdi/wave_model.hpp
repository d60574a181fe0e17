#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace wavefdi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// =============================================================================
// Source term f(phi, phi_dot)
// =============================================================================

/// f == 0: plain linear wave equation.
struct NoSource {
    bool operator==(const NoSource&) const = default;
};

/// Forced damped sine-Gordon source, phi_tt = K phi_xx + l - c phi_t - eps sin(phi).
struct SineGordonSource {
    double c = 0.0;    ///< viscous damping, >= 0
    double eps = 0.0;  ///< amplitude of the sin(phi) restoring term
    double l = 0.0;    ///< constant torque
    bool operator==(const SineGordonSource&) const = default;
};

using Nonlinearity = std::variant<NoSource, SineGordonSource>;

double evaluate_source(const Nonlinearity& f, double phi, double phi_dot);
std::string source_name(const Nonlinearity& f);

/// Parameters of the forced damped sine-Gordon lattice; k is the coupling K.
struct SineGordonParams {
    double c = 0.05;
    double k = 0.04050;
    double eps = 0.01;
    double l = 0.006;
};

// =============================================================================
// Wave model and its canonical state-space form
// =============================================================================

/// Continuous 1D wave PDE phi_tt = K phi_xx + f(phi, phi_t) on N interior grid
/// points with Dirichlet samples phi_0 = phi_left and phi_{N+1} = phi_right.
struct WaveModel {
    double K = 0.04050;
    Nonlinearity source = NoSource{};
    std::size_t N = 50;
    double dx = 1.0;
    double phi_left = 0.0;
    double phi_right = 0.0;

    /// Off-diagonal coupling K/dx^2.
    double a() const { return K / (dx * dx); }
    /// Diagonal coupling -2K/dx^2.
    double b() const { return -2.0 * K / (dx * dx); }

    /// Throws InvalidArgument / DomainError when N < 3, dx <= 0, K <= 0 or a
    /// boundary value is not finite.
    void validate() const;

    static WaveModel sine_gordon(const SineGordonParams& p, std::size_t N, double dx);

    bool operator==(const WaveModel&) const = default;
};

// State ordering is interleaved per grid point: [phi_1, phidot_1, phi_2, phidot_2, ...].
// Grid indices are 1-based, state indices 0-based.
constexpr std::size_t position_index(std::size_t grid_point) { return 2 * grid_point - 2; }
constexpr std::size_t velocity_index(std::size_t grid_point) { return 2 * grid_point - 1; }

Vec positions_of(const Vec& state);
Vec velocities_of(const Vec& state);

struct StateSpace {
    Mat A;  ///< 2N x 2N
    Mat B;  ///< 2N x N
    Mat C;  ///< m x 2N
    double a = 0.0;
    double b = 0.0;
    std::vector<std::size_t> sensors;  ///< 1-based grid index per output row
};

/// Second difference (phi_{i+1} - 2 phi_i + phi_{i-1}) / dx^2 with the given
/// boundary samples.
Vec laplacian_1d(const Vec& phi, double dx, double phi_left, double phi_right);

StateSpace build_state_space(const WaveModel& model, const std::vector<std::size_t>& sensors);

/// Output matrix selecting the position of each listed grid point.
Mat selection_matrix(std::size_t N, const std::vector<std::size_t>& sensors);

/// v_i = f(phi_i, phidot_i) plus the boundary contributions a*phi_0 (i = 1)
/// and a*phi_{N+1} (i = N).
Vec virtual_inputs(const WaveModel& model, const Vec& positions, const Vec& velocities);

/// Time derivative of the semi-discrete state, evaluated point by point
/// (equivalent to A y + B v(y) without forming A).
Vec wave_rhs(const WaveModel& model, const Vec& state);

// =============================================================================
// Single grid subsystem (used by the ARMAX layer)
// =============================================================================

/// Two-state model of grid point i: A = [[0,1],[b,0]], B = [0,1]^T, C = [1,0].
StateSpace subsystem_state_space(const WaveModel& model, std::size_t grid_point);

/// Input of subsystem i once neighbour coupling is folded in:
/// a*phi_{i-1} + a*phi_{i+1} + f(phi_i, phidot_i), boundary samples used at the ends.
double subsystem_input(const WaveModel& model, const Vec& state, std::size_t grid_point);

}  // namespace wavefdi
