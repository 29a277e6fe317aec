#include "kdvsch/spectral.hpp"

#include "kdvsch/errors.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace kdvsch {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Per-call FFT workspace; plan creation is serialized, execution is private.
class GridTransform {
  public:
    explicit GridTransform(int M) : M_(M) {
        buf_ = fftw_alloc_complex(M);
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_dft_1d(M, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(M, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~GridTransform() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    GridTransform(const GridTransform&) = delete;
    GridTransform& operator=(const GridTransform&) = delete;

    int size() const { return M_; }
    Complex* data() { return reinterpret_cast<Complex*>(buf_); }

    // Fill bins from spectral coefficients and synthesize grid values
    // vals[j] = sum_k u_hat(k) e^{i k x_j}.
    void synthesize(const SpectralState& s) {
        Complex* b = data();
        std::fill(b, b + M_, Complex(0));
        for (int k = -s.K; k <= s.K; ++k) b[bin(k)] = s.at(k);
        fftw_execute(bwd_);
    }

    // Analyze grid values back to coefficients; returns relative discarded
    // tail mass when truncating to |k| <= K.
    double analyze(SpectralState& out) {
        fftw_execute(fwd_);
        Complex* b = data();
        const double inv = 1.0 / M_;
        double kept = 0, dropped = 0;
        for (int q = 0; q < M_; ++q) {
            int k = q <= M_ / 2 ? q : q - M_;
            double mass = std::norm(b[q] * inv);
            if (std::abs(k) <= out.K) {
                out.at(k) = b[q] * inv;
                kept += mass;
            } else {
                dropped += mass;
            }
        }
        double total = kept + dropped;
        return total > 0 ? dropped / total : 0.0;
    }

  private:
    int bin(int k) const { return k >= 0 ? k : k + M_; }
    int M_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
};

int grid_size_for(int K) {
    int M = 8;
    while (M < 4 * (K + 1)) M <<= 1;
    return M;
}

std::vector<Complex> phase_factors(const Profile& theta, double scale, int M) {
    std::vector<Complex> f(M);
    const double h = 2.0 * std::numbers::pi / M;
    for (int j = 0; j < M; ++j) {
        double ph = scale * theta.eval(j * h);
        f[j] = Complex(std::cos(ph), std::sin(ph));
    }
    return f;
}

double apply_phase_grid(SpectralState& s, const std::vector<Complex>& factors,
                        GridTransform& gt) {
    gt.synthesize(s);
    Complex* vals = gt.data();
    for (int j = 0; j < gt.size(); ++j) vals[j] *= factors[j];
    return gt.analyze(s);
}

void apply_free(SpectralState& s, double t) {
    for (int k = -s.K; k <= s.K; ++k) {
        double ph = t * (static_cast<double>(k) * k * k - s.alpha * k * k);
        s.at(k) *= Complex(std::cos(ph), std::sin(ph));
    }
}

}  // namespace

double SpectralState::l2_norm() const {
    double s = 0;
    for (const auto& z : c) s += std::norm(z);
    return std::sqrt(s);
}

double SpectralState::sobolev_norm(double s) const {
    double acc = 0;
    for (int k = -K; k <= K; ++k)
        acc += std::pow(1.0 + static_cast<double>(k) * k, s) * std::norm(at(k));
    return std::sqrt(acc);
}

SpectralState SpectralState::normalized() const {
    SpectralState r = *this;
    double n = l2_norm();
    if (n == 0) throw ValidationError("cannot normalize the zero state");
    for (auto& z : r.c) z /= n;
    return r;
}

SpectralState SpectralState::constant_state(int K, double alpha) {
    SpectralState s(K, alpha);
    s.at(0) = 1.0;
    return s;
}

SpectralState SpectralState::single_mode(int K, double alpha, int k) {
    SpectralState s(K, alpha);
    s.at(k) = 1.0;
    return s;
}

double distance(const SpectralState& a, const SpectralState& b) {
    if (a.K != b.K) throw ValidationError("state truncation mismatch");
    double s = 0;
    for (size_t i = 0; i < a.c.size(); ++i) s += std::norm(a.c[i] - b.c[i]);
    return std::sqrt(s);
}

double ControlProgram::total_time() const {
    double t = 0;
    for (const auto& seg : segments) t += seg.tau;
    return t;
}

ControlProgram& ControlProgram::append(const ControlProgram& other) {
    segments.insert(segments.end(), other.segments.begin(), other.segments.end());
    return *this;
}

ControlProgram& ControlProgram::append_segment(double tau, std::vector<double> u,
                                               std::string label) {
    segments.push_back({tau, std::move(u), std::move(label)});
    return *this;
}

ControlProfileSet::ControlProfileSet(std::vector<Profile> q) : profiles(std::move(q)) {
    if (profiles.empty()) throw ValidationError("empty control profile set");
    const Profile targets[5] = {Profile::constant(1.0), Profile::sine(1), Profile::cosine(1),
                                Profile::sine(2), Profile::cosine(2)};
    for (const auto& t : targets) {
        double res = 0;
        solve(t, &res);
        if (res > 1e-9)
            throw ValidationError("control profiles do not span {1, sin x, cos x, sin 2x, cos 2x}");
    }
}

Profile ControlProfileSet::combine(const std::vector<double>& u) const {
    if (u.size() != profiles.size())
        throw ValidationError("control vector dimension mismatch");
    Profile r;
    for (size_t j = 0; j < profiles.size(); ++j) r += profiles[j] * u[j];
    return r;
}

std::vector<double> ControlProfileSet::solve(const Profile& theta, double* residual) const {
    int deg = theta.degree();
    for (const auto& p : profiles) deg = std::max(deg, p.degree());
    const int dim = 2 * deg + 1;
    auto coeffs = [&](const Profile& p) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        v(0) = p.a0;
        for (int m = 1; m <= p.degree(); ++m) {
            v(2 * m - 1) = p.cs[m - 1];
            v(2 * m) = p.sn[m - 1];
        }
        return v;
    };
    Eigen::MatrixXd A(dim, static_cast<int>(profiles.size()));
    for (size_t j = 0; j < profiles.size(); ++j) A.col(static_cast<int>(j)) = coeffs(profiles[j]);
    Eigen::VectorXd b = coeffs(theta);
    Eigen::VectorXd w = A.colPivHouseholderQr().solve(b);
    if (residual) *residual = (A * w - b).norm();
    return {w.data(), w.data() + w.size()};
}

ControlProfileSet ControlProfileSet::canonical() {
    return ControlProfileSet({Profile::constant(1.0), Profile::sine(1), Profile::cosine(1),
                              Profile::sine(2), Profile::cosine(2)});
}

SpectralState free_flow(const SpectralState& s, double t) {
    SpectralState r = s;
    apply_free(r, t);
    return r;
}

SpectralState phase_multiply(const SpectralState& s, const Profile& theta,
                             double tail_tol, double* tail_out) {
    if (theta.is_zero()) {
        if (tail_out) *tail_out = 0;
        return s;
    }
    SpectralState r = s;
    if (theta.degree() == 0) {  // constant phase: exact multiplier
        Complex f(std::cos(theta.a0), std::sin(theta.a0));
        for (auto& z : r.c) z *= f;
        if (tail_out) *tail_out = 0;
        return r;
    }
    GridTransform gt(grid_size_for(s.K));
    auto factors = phase_factors(theta, 1.0, gt.size());
    double tail = apply_phase_grid(r, factors, gt);
    if (tail_out) *tail_out = tail;
    if (tail > tail_tol)
        throw TruncationLoss(tail, "phase_multiply discarded tail mass " + std::to_string(tail) +
                                       "; K too small for this phase");
    return r;
}

SpectralState heat_regularize(const SpectralState& s, double tau) {
    if (!(tau > 0)) throw ValidationError("heat_regularize requires tau > 0");
    SpectralState r = s;
    const double rate = std::pow(tau, 0.25);
    for (int k = -s.K; k <= s.K; ++k)
        r.at(k) *= std::exp(-rate * static_cast<double>(k) * k);
    return r;
}

SpectralState evolve_constant(const SpectralState& s, const std::vector<double>& u,
                              const ControlProfileSet& Q, double T, int steps,
                              const EvolveOptions& opts, double* tail_out) {
    if (steps < 1) throw ValidationError("evolve_constant requires steps >= 1");
    Profile theta = Q.combine(u);
    if (theta.is_zero()) {
        if (tail_out) *tail_out = 0;
        return free_flow(s, T);  // splitting of pure drift is exact
    }
    const double dt = T / steps;
    SpectralState r = s;
    double tail_acc = 0;

    if (theta.degree() == 0) {  // constant potential commutes with L
        Complex f(std::cos(theta.a0 * T), std::sin(theta.a0 * T));
        apply_free(r, T);
        for (auto& z : r.c) z *= f;
        if (tail_out) *tail_out = 0;
        return r;
    }

    GridTransform gt(grid_size_for(s.K));
    auto factors = phase_factors(theta, dt, gt.size());
    apply_free(r, dt / 2);
    for (int step = 0; step < steps; ++step) {
        double tail = apply_phase_grid(r, factors, gt);
        tail_acc += tail;
        if (tail > opts.tail_tol)
            throw TruncationLoss(tail, "evolution discarded tail mass " + std::to_string(tail));
        apply_free(r, step + 1 < steps ? dt : dt / 2);
    }
    if (tail_out) *tail_out = tail_acc;
    return r;
}

std::pair<SpectralState, std::vector<TraceRow>> evolve_program(
    const SpectralState& s, const ControlProgram& program, const ControlProfileSet& Q,
    const EvolveOptions& opts) {
    SpectralState state = s;
    std::vector<TraceRow> trace;
    trace.reserve(program.segments.size());
    double t = 0;
    int index = 0;
    for (const auto& seg : program.segments) {
        ++index;
        if (seg.tau < 1e-15) continue;  // below rounding resolution
        if (!(seg.tau > 0) || !std::isfinite(seg.tau))
            throw ValidationError("segment duration must be positive and finite");
        int steps = std::max<int>(opts.min_steps,
                                  static_cast<int>(std::ceil(opts.lambda_dt * seg.tau)));
        double tail = 0;
        state = evolve_constant(state, seg.u, Q, seg.tau, steps, opts, &tail);
        t += seg.tau;
        trace.push_back({index, t, state.l2_norm(), state.sobolev_norm(1.0), tail});
    }
    return {std::move(state), std::move(trace)};
}

}  // namespace kdvsch
