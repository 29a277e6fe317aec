#ifndef KDVSCH_SPECTRAL_HPP
#define KDVSCH_SPECTRAL_HPP

#include "kdvsch/trigpoly.hpp"

#include <complex>
#include <string>
#include <vector>

namespace kdvsch {

using Complex = std::complex<double>;

// Truncated Fourier state, coefficients u_hat(k) for k = -K..K under the
// normalized convention u_hat(k) = (2 pi)^{-1/2} int psi e^{-ikx} dx, so
// ||psi||_{L2}^2 = sum |u_hat(k)|^2.
struct SpectralState {
    int K = 0;
    double alpha = 0.0;
    std::vector<Complex> c;  // index k + K

    SpectralState() = default;
    SpectralState(int K_, double alpha_) : K(K_), alpha(alpha_), c(2 * K_ + 1) {}

    Complex& at(int k) { return c[k + K]; }
    Complex at(int k) const { return c[k + K]; }

    double l2_norm() const;
    double sobolev_norm(double s) const;
    SpectralState normalized() const;

    static SpectralState constant_state(int K, double alpha);   // normalized constant
    static SpectralState single_mode(int K, double alpha, int k);
};

double distance(const SpectralState& a, const SpectralState& b);

struct EvolveOptions {
    double lambda_dt = 1e4;   // steps per unit time
    int min_steps = 1;
    double tail_tol = 1e-6;   // relative discarded mass per grid round trip
};

// Piecewise-constant control schedule.
struct Segment {
    double tau;
    std::vector<double> u;
    std::string label;
};

struct ControlProgram {
    std::vector<Segment> segments;
    double total_time() const;
    ControlProgram& append(const ControlProgram& other);
    ControlProgram& append_segment(double tau, std::vector<double> u, std::string label);
};

// Control profiles Q_0..Q_{q-1}; construction checks the spanning condition
// {1, sin x, cos x, sin 2x, cos 2x} subset span{Q_j}.
struct ControlProfileSet {
    std::vector<Profile> profiles;

    explicit ControlProfileSet(std::vector<Profile> q);
    int q() const { return static_cast<int>(profiles.size()); }
    Profile combine(const std::vector<double>& u) const;

    // Least squares solve theta = w . Q; returns residual through *residual.
    std::vector<double> solve(const Profile& theta, double* residual) const;

    static ControlProfileSet canonical();  // {1, sin x, cos x, sin 2x, cos 2x}
};

struct TraceRow {
    int segment;
    double t_end;
    double l2_norm;
    double h1_norm;
    double tail_mass;
};

// u_hat(k) -> e^{i t (k^3 - alpha k^2)} u_hat(k); exactly unitary.
SpectralState free_flow(const SpectralState& s, double t);

// psi -> e^{i theta} psi on an oversampled grid, truncated back to K.
SpectralState phase_multiply(const SpectralState& s, const Profile& theta,
                             double tail_tol = 1e-6, double* tail_out = nullptr);

// u_hat(k) -> e^{-tau^{1/4} k^2} u_hat(k), tau > 0.
SpectralState heat_regularize(const SpectralState& s, double tau);

// Strang splitting of one constant-control segment.
SpectralState evolve_constant(const SpectralState& s, const std::vector<double>& u,
                              const ControlProfileSet& Q, double T, int steps,
                              const EvolveOptions& opts = {}, double* tail_out = nullptr);

std::pair<SpectralState, std::vector<TraceRow>> evolve_program(
    const SpectralState& s, const ControlProgram& program, const ControlProfileSet& Q,
    const EvolveOptions& opts = {});

}  // namespace kdvsch

#endif
