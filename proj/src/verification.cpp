#include "kdvsch/verification.hpp"

#include "kdvsch/certificates.hpp"
#include "kdvsch/errors.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace kdvsch {

namespace {
// Plain Fourier coefficients v_p of the real profile, v_{-p} = conj(v_p).
Complex fourier_coeff(const Profile& p, int freq) {
    if (freq == 0) return Complex(p.a0, 0);
    int m = std::abs(freq);
    if (m > p.degree()) return Complex(0);
    Complex v(p.cs[m - 1] / 2.0, -p.sn[m - 1] / 2.0);
    return freq > 0 ? v : std::conj(v);
}
}  // namespace

DenseOperator dense_generator(const Profile& potential, int K, double alpha) {
    const int n = 2 * K + 1;
    DenseOperator op{K, alpha, std::vector<Complex>(static_cast<size_t>(n) * n, Complex(0))};
    const Complex I(0, 1);
    for (int r = 0; r < n; ++r) {
        const int k = r - K;
        for (int c = 0; c < n; ++c) {
            const int m = c - K;
            Complex v = I * fourier_coeff(potential, k - m);
            if (r == c)
                v += I * (static_cast<double>(k) * k * k - alpha * static_cast<double>(k) * k);
            op.matrix[static_cast<size_t>(r) * n + c] = v;
        }
    }
    return op;
}

SpectralState dense_evolve(const SpectralState& s, const std::vector<double>& u,
                           const ControlProfileSet& Q, double T, int cost_guard_K) {
    if (s.K > cost_guard_K)
        throw CostGuard("dense oracle refused K = " + std::to_string(s.K));
    DenseOperator gen = dense_generator(Q.combine(u), s.K, s.alpha);
    const int n = 2 * s.K + 1;
    Eigen::MatrixXcd A(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) A(r, c) = T * gen.entry(r, c);
    Eigen::MatrixXcd E = A.exp();  // scaling-and-squaring with Pade approximant
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = s.c[i];
    Eigen::VectorXcd w = E * v;
    SpectralState out(s.K, s.alpha);
    for (int i = 0; i < n; ++i) out.c[i] = w(i);
    return out;
}

RateReport fit_rate(const std::vector<double>& params, const std::vector<double>& errors) {
    if (params.size() != errors.size() || params.size() < 4)
        throw DegenerateFit("fit_rate needs >= 4 matched points");
    for (size_t i = 1; i < params.size(); ++i)
        if (!(params[i] > params[i - 1]) && !(params[i] < params[i - 1]))
            throw ValidationError("parameter grid must be strictly monotone");

    RateReport rep;
    rep.params = params;
    rep.errors = errors;

    std::vector<double> lx, ly;
    for (size_t i = 0; i < params.size(); ++i) {
        if (!(errors[i] > 0)) throw DegenerateFit("errors must be positive");
        if (errors[i] < 1e-13) {
            ++rep.floored_points;  // rounding floor, excluded
            continue;
        }
        lx.push_back(std::log(params[i]));
        ly.push_back(std::log(errors[i]));
    }
    if (lx.size() < 4) throw DegenerateFit("too many points at the rounding floor");

    auto lsq = [](const std::vector<double>& x, const std::vector<double>& y, double* slope,
                  double* icept) {
        const size_t n = x.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < n; ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
        }
        *slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        *icept = (sy - *slope * sx) / n;
        double rss = 0;
        for (size_t i = 0; i < n; ++i) {
            double r = y[i] - (*slope * x[i] + *icept);
            rss += r * r;
        }
        return std::sqrt(rss / n);
    };

    rep.residual = lsq(lx, ly, &rep.slope, &rep.intercept);
    if (rep.residual > 0.05 && lx.size() >= 6) {
        // Drop the two coarsest points: pre-asymptotic pollution.
        std::vector<double> lx2, ly2;
        bool ascending = params.back() > params.front();
        // Coarsest = largest parameter values.
        size_t lo = ascending ? 0 : 2;
        size_t hi = ascending ? lx.size() - 2 : lx.size();
        for (size_t i = lo; i < hi; ++i) {
            lx2.push_back(lx[i]);
            ly2.push_back(ly[i]);
        }
        rep.residual = lsq(lx2, ly2, &rep.slope, &rep.intercept);
        rep.dropped_points = 2;
    }
    for (size_t i = 1; i < errors.size(); ++i) {
        bool param_up = params[i] > params[i - 1];
        bool err_up = errors[i] > errors[i - 1];
        if (param_up != err_up) rep.monotone = false;
    }
    return rep;
}

SaturationReport saturation_report(int n, int n_max) {
    SaturationReport rep;
    rep.n = n;
    rep.n_max = n_max;

    // Closure run: iterate fn_step from H_0 until the frequency window fills.
    const int freq_cap = std::max(n_max + 2, 2 * (n - 1));
    std::vector<TrigPoly> basis = h0_basis(n);
    Echelon window;
    auto covered = [&](const std::vector<TrigPoly>& b) {
        Echelon e;
        for (const auto& p : b) e.add(p);
        for (int m = 0; m <= n_max; ++m) {
            if (!e.contains(TrigPoly::cosine(m))) return false;
            if (m >= 1 && !e.contains(TrigPoly::sine(m))) return false;
        }
        return true;
    };
    rep.closure_dims.push_back(static_cast<int>(basis.size()));
    for (int j = 1; j <= 16; ++j) {
        basis = fn_step(basis, n, freq_cap);
        rep.closure_dims.push_back(static_cast<int>(basis.size()));
        if (covered(basis)) {
            rep.closure_steps_to_cover = j;
            break;
        }
        if (rep.closure_dims.size() >= 2 &&
            rep.closure_dims.back() == rep.closure_dims[rep.closure_dims.size() - 2])
            break;  // stalled
    }

    // Per-mode saturation certificates with exact evaluation check.
    ModeCertifier certifier(n);
    for (int m = 0; m <= n_max; ++m) {
        for (Parity par : {Parity::Cos, Parity::Sin}) {
            if (m == 0 && par == Parity::Sin) continue;
            CertPtr cert = certifier.certificate(m, par);
            TrigPoly target = par == Parity::Cos ? TrigPoly::cosine(m) : TrigPoly::sine(m);
            TrigPoly got = evaluate(*cert, certifier.basis());
            ModeReportRow row{m, par == Parity::Cos ? "cos" : "sin", cert_depth(*cert),
                              cert_coeff_magnitude(*cert), got == target};
            rep.all_exact = rep.all_exact && row.exact;
            rep.modes.push_back(std::move(row));
        }
    }

    // Vector field certificates for the same window.
    FieldCertifier fields;
    for (int m = 0; m <= n_max; ++m) {
        for (Parity par : {Parity::Cos, Parity::Sin}) {
            if (m == 0 && par == Parity::Sin) continue;
            TrigPoly target = par == Parity::Cos ? TrigPoly::cosine(m) : TrigPoly::sine(m);
            BracketPtr expr = fields.certificate(target);
            bool exact = evaluate(*expr).coeff == target;
            rep.field_modes.push_back({m, par == Parity::Cos ? "cos" : "sin", 0, 0.0, exact});
            rep.all_exact = rep.all_exact && exact;
        }
    }
    return rep;
}

}  // namespace kdvsch
