#include "kdvsch/flows.hpp"

#include "kdvsch/errors.hpp"

#include <cmath>
#include <numbers>

namespace kdvsch {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// psi(y) = sum_k u_hat(k) e^{iky} by direct summation.
Complex eval_state(const SpectralState& s, double y) {
    Complex v = s.at(0);
    // Recurrence for e^{iky} avoids 2K trig calls per point.
    const Complex w(std::cos(y), std::sin(y));
    Complex wp = w, wm = std::conj(w);
    for (int k = 1; k <= s.K; ++k) {
        v += s.at(k) * wp + s.at(-k) * wm;
        wp *= w;
        wm *= std::conj(w);
    }
    return v;
}
}  // namespace

void FlowMap::validate() const {
    if (M < 8 || static_cast<int>(P.size()) != M || static_cast<int>(dP.size()) != M)
        throw NonDiffeo("flow map needs M >= 8 samples of P and P'");
    for (int j = 0; j < M; ++j)
        if (!(dP[j] > 0) || !std::isfinite(P[j]))
            throw NonDiffeo("flow map is not orientation-preserving (P' <= 0)");
    for (int j = 0; j + 1 < M; ++j)
        if (!(P[j + 1] > P[j]))
            throw NonDiffeo("lifted flow map is not strictly increasing");
    if (!(P[0] + kTwoPi > P[M - 1]))
        throw NonDiffeo("lifted flow map violates degree-one periodicity");
}

FlowMap FlowMap::identity(int M) {
    FlowMap m;
    m.M = M;
    m.P.resize(M);
    m.dP.assign(M, 1.0);
    for (int j = 0; j < M; ++j) m.P[j] = kTwoPi * j / M;
    return m;
}

FlowMap FlowMap::rotation(int M, double delta) {
    FlowMap m = identity(M);
    for (auto& p : m.P) p += delta;
    return m;
}

double default_flow_step(const Profile& f) {
    return 1e-3 / (1.0 + deriv_sup_bound(f));
}

FlowMap integrate_flow(const Profile& f, double t, int M, double dt_ode) {
    if (M < 8) throw ValidationError("integrate_flow requires M >= 8");
    if (!(dt_ode > 0)) throw ValidationError("integrate_flow requires dt_ode > 0");
    FlowMap map = FlowMap::identity(M);
    if (t == 0 || f.is_zero()) return map;

    const Profile df = f.derivative();
    const int steps = std::max<int>(1, static_cast<int>(std::ceil(std::abs(t) / dt_ode)));
    const double h = t / steps;

    for (int j = 0; j < M; ++j) {
        double p = map.P[j], q = 1.0;
        for (int s = 0; s < steps; ++s) {
            // RK4 on (p, q), dp = f(p), dq = f'(p) q.
            double k1p = f.eval(p), k1q = df.eval(p) * q;
            double k2p = f.eval(p + 0.5 * h * k1p), k2q = df.eval(p + 0.5 * h * k1p) * (q + 0.5 * h * k1q);
            double k3p = f.eval(p + 0.5 * h * k2p), k3q = df.eval(p + 0.5 * h * k2p) * (q + 0.5 * h * k2q);
            double k4p = f.eval(p + h * k3p), k4q = df.eval(p + h * k3p) * (q + h * k3q);
            p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
            q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
        }
        map.P[j] = p;
        map.dP[j] = q;
    }
    map.validate();
    return map;
}

SpectralState diffeo_apply(const SpectralState& s, const FlowMap& P,
                           double tail_tol, double* tail_out) {
    P.validate();
    // Evaluate sqrt(P') psi(P(x_j)) on the flow map's own grid, then project
    // back to the mode window by discrete analysis.
    const int M = P.M;
    std::vector<Complex> vals(M);
    for (int j = 0; j < M; ++j)
        vals[j] = std::sqrt(P.dP[j]) * eval_state(s, P.P[j]);

    SpectralState out(s.K, s.alpha);
    double kept = 0, dropped = 0;
    for (int k = -s.K; k <= s.K; ++k) {
        Complex acc(0);
        for (int j = 0; j < M; ++j) {
            double ph = -k * (kTwoPi * j / M);
            acc += vals[j] * Complex(std::cos(ph), std::sin(ph));
        }
        out.at(k) = acc / static_cast<double>(M);
        kept += std::norm(out.at(k));
    }
    // Discarded mass estimated from Parseval on the sampling grid.
    double grid_mass = 0;
    for (const auto& v : vals) grid_mass += std::norm(v);
    grid_mass /= M;
    dropped = std::max(0.0, grid_mass - kept);
    double tail = grid_mass > 0 ? dropped / grid_mass : 0.0;
    if (tail_out) *tail_out = tail;
    if (tail > tail_tol)
        throw TruncationLoss(tail, "diffeo_apply discarded tail mass " + std::to_string(tail));
    return out;
}

SpectralState transport_apply(const SpectralState& s, const Profile& f, double t,
                              double tail_tol, double* tail_out) {
    if (f.is_zero() || t == 0) {
        if (tail_out) *tail_out = 0;
        return s;
    }
    if (f.degree() == 0)  // constant field: rigid rotation
        return translate(s, f.a0 * t);
    int M = 8;
    while (M < 8 * (s.K + 1)) M <<= 1;
    FlowMap P = integrate_flow(f, t, M, default_flow_step(f));
    return diffeo_apply(s, P, tail_tol, tail_out);
}

SpectralState translate(const SpectralState& s, double delta) {
    SpectralState r = s;
    for (int k = -s.K; k <= s.K; ++k)
        r.at(k) *= Complex(std::cos(k * delta), std::sin(k * delta));
    return r;
}

double flow_period(const Profile& g, int nodes) {
    // Certified positivity: min over a dense grid minus the variation bound
    // ||g'||_inf * h/2 must stay positive.
    const double h = kTwoPi / nodes;
    double gmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nodes; ++j) gmin = std::min(gmin, g.eval(j * h));
    if (!(gmin - deriv_sup_bound(g) * h / 2 > 0))
        throw NotPositive("flow_period requires g > 0 on the torus");
    double acc = 0;
    for (int j = 0; j < nodes; ++j) acc += 1.0 / g.eval(j * h);
    return acc * h;
}

}  // namespace kdvsch
