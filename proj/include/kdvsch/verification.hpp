#ifndef KDVSCH_VERIFICATION_HPP
#define KDVSCH_VERIFICATION_HPP

#include "kdvsch/spectral.hpp"

#include <string>
#include <vector>

namespace kdvsch {

// Dense anti-Hermitian generator of the constant-control dynamics on modes
// -K..K: A = i diag(k^3 - alpha k^2) + i Toeplitz(V), V = u . Q.
struct DenseOperator {
    int K;
    double alpha;
    std::vector<Complex> matrix;  // row-major (2K+1)^2
    Complex entry(int row, int col) const { return matrix[row * (2 * K + 1) + col]; }
};

DenseOperator dense_generator(const Profile& potential, int K, double alpha);

// exp(T A) psi by scaling-and-squaring; independent of the splitting path.
SpectralState dense_evolve(const SpectralState& s, const std::vector<double>& u,
                           const ControlProfileSet& Q, double T, int cost_guard_K = 128);

struct RateReport {
    std::vector<double> params;
    std::vector<double> errors;
    double slope = 0;
    double intercept = 0;
    double residual = 0;
    bool monotone = true;
    int dropped_points = 0;   // coarse points excluded from the fit
    int floored_points = 0;   // points at the rounding floor, excluded
};

// Log-log least squares fit err ~ C * param^slope.
RateReport fit_rate(const std::vector<double>& params, const std::vector<double>& errors);

struct ModeReportRow {
    int freq;
    std::string parity;      // "cos" / "sin"
    int depth;
    double coeff_magnitude;
    bool exact;              // certificate evaluates to the target exactly
};

struct SaturationReport {
    int n;
    int n_max;
    std::vector<int> closure_dims;       // dim H_j along the closure run
    int closure_steps_to_cover = -1;     // first j with all modes <= n_max present
    std::vector<ModeReportRow> modes;            // saturation certificates
    std::vector<ModeReportRow> field_modes;      // Lie bracket certificates
    bool all_exact = true;
};

SaturationReport saturation_report(int n, int n_max);

}  // namespace kdvsch

#endif
