// Acceptance sweep: one pass/fail line per criterion, non-zero exit on any
// failure. Each check pins its own tolerances; the studies carry theirs.
#include "kdvsch/certificates.hpp"
#include "kdvsch/errors.hpp"
#include "kdvsch/flows.hpp"
#include "kdvsch/studies.hpp"
#include "kdvsch/synthesis.hpp"
#include "kdvsch/verification.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

using namespace kdvsch;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %d %s — %s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// 1. L2 conservation over random programs.
void check_conservation() {
    ControlProfileSet Q = ControlProfileSet::canonical();
    std::mt19937 rng(2024);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> nseg(1, 50);
    std::uniform_real_distribution<double> dur(1e-4, 2e-2);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        SpectralState s(64, 0.0);
        for (int k = -64; k <= 64; ++k)
            s.at(k) = Complex(gauss(rng), gauss(rng)) * std::exp(-0.5 * std::abs(k));
        s = s.normalized();
        ControlProgram p;
        int n = nseg(rng);
        for (int i = 0; i < n; ++i) {
            std::vector<double> u(Q.q());
            double norm2 = 0;
            for (auto& v : u) { v = amp(rng); norm2 += v * v; }
            double scale = 10.0 / std::max(1.0, std::sqrt(norm2));
            for (auto& v : u) v *= scale;  // ||u|| <= 10
            p.append_segment(dur(rng), u, "");
        }
        auto [fin, trace] = evolve_program(s, p, Q, {});
        worst = std::max(worst, std::abs(fin.l2_norm() - 1.0));
    }
    report(1, "L2 conservation, 20 random programs at K=64", worst <= 1e-10,
           fmt("max |norm-1| = %.3g (tol 1e-10)", worst));
}

// 2. Strang order against the dense oracle.
void check_strang() {
    StudyResult r = strang_study(0.0);
    report(2, "Strang order vs dense oracle", r.pass,
           fmt("slope = %.4f (want 2.0 +- 0.1), finest = %.3g (tol 1e-6)",
               r.summary["slope"], r.summary["finest_error"]));
}

// 3. Saturation limit for three dispersion strengths.
void check_satlimit() {
    for (double alpha : {0.0, 1.0, -2.5}) {
        StudyResult r = satlimit_study(alpha);
        report(3, fmt("saturation limit, alpha = %g", alpha), r.pass,
               fmt("finest = %.3g (tol 1e-2), envelope C = %.3f",
                   r.summary["finest_error"], r.summary["envelope_C"]));
    }
}

// 4. Transport product limit for the same three alphas.
void check_wtn() {
    for (double alpha : {0.0, 1.0, -2.5}) {
        StudyResult r = wtn_study(alpha);
        report(4, fmt("transport product limit, alpha = %g", alpha), r.pass,
               fmt("calibrated error = %.4f (tol 5e-2), n-sweep decreasing = %g",
                   r.summary["calibrated_error"], r.summary["sweep_decreasing"]));
    }
}

// 5. Phase steering to cos 3x: both witness states, both time budgets.
void check_phase() {
    SimContext sim{ControlProfileSet::canonical(), 0.0, 2000, {}};
    for (double budget : {0.1, 0.01}) {
        for (int which : {0, 1}) {
            SpectralState psi0 = which ? SpectralState::single_mode(2000, 0.0, 1)
                                       : SpectralState::constant_state(2000, 0.0);
            PhaseTarget t{Profile::cosine(3), 1e-2, budget};
            bool pass = false;
            std::string detail;
            try {
                PhaseSynthesis out = phase_program(t, sim, &psi0);
                pass = out.achieved_error < 1e-2 && out.program.total_time() < budget;
                detail = fmt("error = %.4f (tol 1e-2), time = %.3g", out.achieved_error,
                             out.program.total_time());
            } catch (const Error& e) {
                detail = std::string("exception: ") + e.what();
            }
            report(5,
                   fmt("phase steering cos 3x, budget %g, ", budget) +
                       (which ? "mode-1 state" : "constant state"),
                   pass, detail);
        }
    }
}

// 6. Word steering plus the norm guard.
void check_word() {
    SimContext sim{ControlProfileSet::canonical(), 0.0, 2000, {}};
    sim.opts.tail_tol = 1e-3;
    SteeringWord word;
    word.atoms.push_back(PhaseAtom{Profile::cosine(1)});
    word.atoms.push_back(TranslateAtom{M_PI / 2});
    word.atoms.push_back(GlobalPhaseAtom{1.0});
    SpectralState psi0 = SpectralState::single_mode(2000, 0.0, 1);
    TransportParams p;
    p.tau = 1.6e-5;
    p.n = 16;
    p.rep_weight = 0.25;
    p.schedule.tau_top = 1e-10;

    bool pass = false;
    std::string detail;
    try {
        WordSynthesis out = steer_word(word, psi0, 5e-2, sim, p);
        pass = out.achieved_error < 5e-2;
        detail = fmt("error = %.4f (tol 5e-2)", out.achieved_error);
    } catch (const Error& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(6, "word steering [phase cos x, translate pi/2, global phase 1]", pass, detail);

    bool guarded = false;
    SpectralState bad = psi0;
    for (auto& c : bad.c) c *= 2.0;
    try {
        steer_word(word, psi0, 5e-2, sim, p, &bad);
    } catch (const ValidationError&) {
        guarded = true;
    }
    report(6, "word steering norm guard", guarded,
           guarded ? "mismatched-norm target rejected" : "guard missed");
}

// 7. Trotter rate for sin^2 / cos^2 transports.
void check_trotter() {
    StudyResult r = trotter_study(0.0);
    report(7, "Trotter rate sin^2 + cos^2 -> translation", r.pass,
           fmt("slope = %.4f (want 1.0 +- 0.2), finest = %.3g", r.summary["slope"],
               r.summary["finest_error"]));
}

// 8. Flow period and the backward-transport trick.
void check_period() {
    StudyResult r = period_study(0.0);
    report(8, "flow period of 1 + sin^2 x and backward transport", r.pass,
           fmt("period error = %.3g (tol 1e-8), identity = %.3g (tol 1e-6), "
               "synth error = %.4f (tol 5e-2)",
               r.summary["period_error"], r.summary["identity_error"],
               r.summary["synth_error"]));
}

// 9. Exact algebra: closure report, field certificates, bracket identities.
void check_algebra() {
    SaturationReport rep = saturation_report(3, 16);
    bool covered = rep.closure_steps_to_cover >= 1 && rep.all_exact;
    report(9, "saturation report n=3 through mode 16", covered,
           fmt("all certificates exact, covered after %g closure steps",
               double(rep.closure_steps_to_cover)));

    FieldCertifier fc;
    bool fields_exact = true;
    for (int m = 0; m <= 12 && fields_exact; ++m) {
        fields_exact = evaluate(*fc.certificate(TrigPoly::cosine(m))).coeff ==
                       TrigPoly::cosine(m);
        if (m >= 1 && fields_exact)
            fields_exact = evaluate(*fc.certificate(TrigPoly::sine(m))).coeff ==
                           TrigPoly::sine(m);
    }
    report(9, "vector-field certificates for all modes <= 12", fields_exact,
           fields_exact ? "all evaluate exactly" : "mismatch found");

    std::mt19937 rng(99);
    std::uniform_int_distribution<int> num(-4, 4);
    std::uniform_int_distribution<int> den(1, 3);
    auto rand_field = [&] {
        TrigPoly p;
        p.a0 = Rational(num(rng), den(rng));
        for (int m = 1; m <= 4; ++m) {
            p.add_cos(m, Rational(num(rng), den(rng)));
            p.add_sin(m, Rational(num(rng), den(rng)));
        }
        p.trim();
        return VectorFieldOnTorus{p};
    };
    bool identities = true;
    for (int trial = 0; trial < 100 && identities; ++trial) {
        VectorFieldOnTorus X = rand_field(), Y = rand_field(), Z = rand_field();
        identities = (lie_bracket(X, Y).coeff + lie_bracket(Y, X).coeff).is_zero() &&
                     (lie_bracket(X, lie_bracket(Y, Z)).coeff +
                      lie_bracket(Y, lie_bracket(Z, X)).coeff +
                      lie_bracket(Z, lie_bracket(X, Y)).coeff)
                         .is_zero();
    }
    report(9, "bracket antisymmetry and Jacobi on 100 random fields", identities,
           identities ? "exact on all trials" : "violation found");
}

}  // namespace

int main() {
    check_conservation();
    check_strang();
    check_satlimit();
    check_wtn();
    check_phase();
    check_word();
    check_trotter();
    check_period();
    check_algebra();
    std::printf("%s: %d failure(s)\n", failures ? "FAIL" : "ALL PASS", failures);
    return failures ? 1 : 0;
}
