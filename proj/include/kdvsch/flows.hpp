#ifndef KDVSCH_FLOWS_HPP
#define KDVSCH_FLOWS_HPP

#include "kdvsch/spectral.hpp"
#include "kdvsch/trigpoly.hpp"

#include <vector>

namespace kdvsch {

// Sampled orientation-preserving diffeomorphism of the torus: lifted values
// P(x_j) and derivatives P'(x_j) > 0 at x_j = 2 pi j / M.
struct FlowMap {
    int M = 0;
    std::vector<double> P;   // lifted: P(x + 2 pi) = P(x) + 2 pi
    std::vector<double> dP;  // > 0 everywhere

    void validate() const;   // throws NonDiffeo on violation
    static FlowMap identity(int M);
    static FlowMap rotation(int M, double delta);
};

// RK4 characteristics for (P, P'), dP/dt = f(P), dP'/dt = f'(P) P'.
FlowMap integrate_flow(const Profile& f, double t, int M, double dt_ode);

// Default ODE step honoring the documented dt <= 1e-3 / (1 + sup|f'|) rule.
double default_flow_step(const Profile& f);

// U_P: psi -> sqrt(P') psi(P(.)), exact trigonometric evaluation at P(x_j).
SpectralState diffeo_apply(const SpectralState& s, const FlowMap& P,
                           double tail_tol = 1e-6, double* tail_out = nullptr);

// e^{t T_f} via the flow of f.
SpectralState transport_apply(const SpectralState& s, const Profile& f, double t,
                              double tail_tol = 1e-6, double* tail_out = nullptr);

// Exact translation psi(x) -> psi(x + delta): u_hat(k) -> e^{i k delta} u_hat(k).
SpectralState translate(const SpectralState& s, double delta);

// Period Pi(g) = int_0^{2pi} dx / g for g > 0 (certified positivity check).
double flow_period(const Profile& g, int nodes = 8192);

}  // namespace kdvsch

#endif
