#include "wavefdi/wave_model.hpp"

#include "wavefdi/errors.hpp"

#include <cmath>
#include <set>

namespace wavefdi {

namespace {

void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw DomainError(std::string(what) + " contains a non-finite element");
}

}  // namespace

double evaluate_source(const Nonlinearity& f, double phi, double phi_dot) {
    if (const auto* sg = std::get_if<SineGordonSource>(&f)) {
        return sg->l - sg->c * phi_dot - sg->eps * std::sin(phi);
    }
    return 0.0;
}

std::string source_name(const Nonlinearity& f) {
    return std::holds_alternative<SineGordonSource>(f) ? "sine-gordon" : "zero";
}

void WaveModel::validate() const {
    if (N < 3) throw InvalidArgument("wave model needs N >= 3 interior points, got " + std::to_string(N));
    if (!(dx > 0.0) || !std::isfinite(dx)) throw DomainError("grid spacing dx must be positive and finite");
    if (!(K > 0.0) || !std::isfinite(K)) throw DomainError("wave coefficient K must be positive and finite");
    if (!std::isfinite(phi_left) || !std::isfinite(phi_right))
        throw DomainError("boundary values must be finite");
    if (const auto* sg = std::get_if<SineGordonSource>(&source)) {
        if (!std::isfinite(sg->c) || !std::isfinite(sg->eps) || !std::isfinite(sg->l))
            throw DomainError("sine-Gordon parameters must be finite");
        if (sg->c < 0.0) throw DomainError("sine-Gordon damping c must be >= 0");
    }
}

WaveModel WaveModel::sine_gordon(const SineGordonParams& p, std::size_t N, double dx) {
    if (!(p.k > 0.0)) throw DomainError("sine-Gordon coupling k must be > 0");
    WaveModel m;
    m.K = p.k;
    m.source = SineGordonSource{p.c, p.eps, p.l};
    m.N = N;
    m.dx = dx;
    m.validate();
    return m;
}

Vec positions_of(const Vec& state) {
    const Eigen::Index n = state.size() / 2;
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = state[2 * i];
    return out;
}

Vec velocities_of(const Vec& state) {
    const Eigen::Index n = state.size() / 2;
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = state[2 * i + 1];
    return out;
}

Vec laplacian_1d(const Vec& phi, double dx, double phi_left, double phi_right) {
    if (phi.size() < 1) throw InvalidArgument("laplacian_1d needs at least one point");
    if (!(dx > 0.0)) throw DomainError("laplacian_1d: dx must be positive");
    require_finite(phi, "laplacian_1d input");
    if (!std::isfinite(phi_left) || !std::isfinite(phi_right))
        throw DomainError("laplacian_1d: boundary values must be finite");

    const Eigen::Index n = phi.size();
    const double inv = 1.0 / (dx * dx);
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double left = i == 0 ? phi_left : phi[i - 1];
        const double right = i == n - 1 ? phi_right : phi[i + 1];
        out[i] = (right - 2.0 * phi[i] + left) * inv;
    }
    return out;
}

Mat selection_matrix(std::size_t N, const std::vector<std::size_t>& sensors) {
    std::set<std::size_t> seen;
    Mat C = Mat::Zero(static_cast<Eigen::Index>(sensors.size()), static_cast<Eigen::Index>(2 * N));
    for (std::size_t j = 0; j < sensors.size(); ++j) {
        const std::size_t g = sensors[j];
        if (g < 1 || g > N)
            throw InvalidArgument("sensor index " + std::to_string(g) + " outside 1.." + std::to_string(N));
        if (!seen.insert(g).second) throw InvalidArgument("duplicate sensor index " + std::to_string(g));
        C(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(position_index(g))) = 1.0;
    }
    return C;
}

StateSpace build_state_space(const WaveModel& model, const std::vector<std::size_t>& sensors) {
    model.validate();
    const auto N = static_cast<Eigen::Index>(model.N);
    StateSpace ss;
    ss.a = model.a();
    ss.b = model.b();
    ss.A = Mat::Zero(2 * N, 2 * N);
    ss.B = Mat::Zero(2 * N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        const Eigen::Index p = 2 * i;      // position row
        const Eigen::Index v = 2 * i + 1;  // velocity row
        ss.A(p, v) = 1.0;
        ss.A(v, p) = ss.b;
        if (i > 0) ss.A(v, p - 2) = ss.a;
        if (i < N - 1) ss.A(v, p + 2) = ss.a;
        ss.B(v, i) = 1.0;
    }
    ss.C = selection_matrix(model.N, sensors);
    ss.sensors = sensors;
    return ss;
}

Vec virtual_inputs(const WaveModel& model, const Vec& positions, const Vec& velocities) {
    const auto N = static_cast<Eigen::Index>(model.N);
    if (positions.size() != N || velocities.size() != N)
        throw InvalidArgument("virtual_inputs: expected vectors of length N");
    require_finite(positions, "virtual_inputs positions");
    require_finite(velocities, "virtual_inputs velocities");

    Vec v(N);
    for (Eigen::Index i = 0; i < N; ++i) v[i] = evaluate_source(model.source, positions[i], velocities[i]);
    v[0] += model.a() * model.phi_left;
    v[N - 1] += model.a() * model.phi_right;
    return v;
}

Vec wave_rhs(const WaveModel& model, const Vec& y) {
    const auto N = static_cast<Eigen::Index>(model.N);
    const double a = model.a();
    const double b = model.b();
    Vec dy(2 * N);
    for (Eigen::Index i = 0; i < N; ++i) {
        const double phi = y[2 * i];
        const double left = i == 0 ? model.phi_left : y[2 * i - 2];
        const double right = i == N - 1 ? model.phi_right : y[2 * i + 2];
        dy[2 * i] = y[2 * i + 1];
        dy[2 * i + 1] = a * (left + right) + b * phi + evaluate_source(model.source, phi, y[2 * i + 1]);
    }
    return dy;
}

StateSpace subsystem_state_space(const WaveModel& model, std::size_t grid_point) {
    if (grid_point < 1 || grid_point > model.N)
        throw InvalidArgument("subsystem index " + std::to_string(grid_point) + " outside 1.." +
                              std::to_string(model.N));
    StateSpace ss;
    ss.a = model.a();
    ss.b = model.b();
    ss.A = Mat{{0.0, 1.0}, {ss.b, 0.0}};
    ss.B = Mat{{0.0}, {1.0}};
    ss.C = Mat{{1.0, 0.0}};
    ss.sensors = {grid_point};
    return ss;
}

double subsystem_input(const WaveModel& model, const Vec& y, std::size_t grid_point) {
    const std::size_t N = model.N;
    if (grid_point < 1 || grid_point > N) throw InvalidArgument("subsystem index out of range");
    const double left = grid_point == 1 ? model.phi_left : y[static_cast<Eigen::Index>(position_index(grid_point - 1))];
    const double right = grid_point == N ? model.phi_right : y[static_cast<Eigen::Index>(position_index(grid_point + 1))];
    const double phi = y[static_cast<Eigen::Index>(position_index(grid_point))];
    const double phi_dot = y[static_cast<Eigen::Index>(velocity_index(grid_point))];
    return model.a() * (left + right) + evaluate_source(model.source, phi, phi_dot);
}

}  // namespace wavefdi
