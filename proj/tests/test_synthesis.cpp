#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kdvsch/errors.hpp"
#include "kdvsch/flows.hpp"
#include "kdvsch/synthesis.hpp"

#include <cmath>

using namespace kdvsch;

TEST_CASE("base_phase_program") {
    ControlProfileSet Q = ControlProfileSet::canonical();

    SUBCASE("theta = Q_0") {
        ControlProgram p = base_phase_program(Profile::constant(1.0), 1e-3, Q);
        REQUIRE(p.segments.size() == 1);
        CHECK(p.segments[0].tau == doctest::Approx(1e-3));
        CHECK(p.segments[0].u[0] == doctest::Approx(1e3));
        for (int j = 1; j < Q.q(); ++j) CHECK(std::abs(p.segments[0].u[j]) < 1e-9);
    }
    SUBCASE("theta = 0 emits nothing") {
        CHECK(base_phase_program(Profile(), 1e-3, Q).segments.empty());
    }
    SUBCASE("outside the span") {
        CHECK_THROWS_AS(base_phase_program(Profile::cosine(3), 1e-3, Q), NotInSpan);
    }
    SUBCASE("simulated error decreases with tau") {
        SimContext sim{Q, 0.0, 32, {}};
        SpectralState psi0 = SpectralState::constant_state(32, 0.0);
        SpectralState want = phase_multiply(psi0, Profile::sine(2));
        double prev = 1e9;
        for (int j = 8; j <= 20; j += 4) {
            double tau = std::pow(2.0, -j);
            ControlProgram p = base_phase_program(Profile::sine(2), tau, Q);
            auto [fin, tr] = evolve_program(psi0, p, sim.Q, sim.opts);
            double err = distance(fin, want);
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 1e-3);
    }
}

TEST_CASE("phase_emit handles in-span targets with one base segment") {
    ControlProfileSet Q = ControlProfileSet::canonical();
    ModeCertifier certifier(3);
    PhaseSchedule sch;
    Profile theta = Profile::cosine(1, 0.4) + Profile::sine(2, -0.3);
    ControlProgram p = phase_emit(theta, sch, Q, certifier);
    CHECK(p.segments.size() == 1);

    SpectralState psi0 = SpectralState::constant_state(32, 0.0);
    auto [fin, tr] = evolve_program(psi0, p, Q, {});
    CHECK(distance(fin, phase_multiply(psi0, theta)) < 1e-6);
}

TEST_CASE("cubed_phase_program realizes a depth-1 certificate") {
    ControlProfileSet Q = ControlProfileSet::canonical();
    ModeCertifier certifier(3);
    CertPtr cert = certifier.certificate(3, Parity::Cos);
    PhaseSchedule sch;
    sch.tau_top = 1e-6;  // inner phase amplitude ~ (2/tau)^{1/3}; K must hold it
    ControlProgram p = cubed_phase_program(*cert, sch, Q, certifier.basis(), 0.5);

    SpectralState psi0 = SpectralState::constant_state(512, 0.0);
    EvolveOptions opts;
    opts.tail_tol = 1e-3;
    auto [fin, tr] = evolve_program(psi0, p, Q, opts);
    SpectralState want = phase_multiply(psi0, Profile::cosine(3, 0.5));
    CHECK(distance(fin, want) < 0.1);
}

TEST_CASE("phase_program calibrates cos 3x on the constant state") {
    SimContext sim{ControlProfileSet::canonical(), 0.0, 2000, {}};
    PhaseTarget t{Profile::cosine(3), 1e-2, 0.1};
    PhaseSynthesis out = phase_program(t, sim);
    CHECK(out.achieved_error < 1e-2);
    CHECK(out.program.total_time() < 0.1);
    CHECK(out.curve.size() >= 2);
}

TEST_CASE("phase_program reports the best error when the budget runs out") {
    // K = 64 cannot resolve the fine-schedule inner phases, so calibration
    // stalls; the exception must carry a finite best error.
    SimContext sim{ControlProfileSet::canonical(), 0.0, 64, {}};
    PhaseTarget t{Profile::cosine(3), 1e-6, 0.1};
    try {
        phase_program(t, sim);
        FAIL("expected BudgetExceeded");
    } catch (const BudgetExceeded& e) {
        CHECK(std::isfinite(e.best_error));
        CHECK(e.best_error > 1e-6);
    }
}

TEST_CASE("transport_program with zero phase is a pure drift") {
    ControlProfileSet Q = ControlProfileSet::canonical();
    ControlProgram p = transport_program(Profile(), 0.5, 4, 0.0, Q, {});
    SpectralState psi0 = SpectralState::single_mode(16, 0.0, 2);
    auto [fin, tr] = evolve_program(psi0, p, Q, {});
    CHECK(distance(fin, free_flow(psi0, 0.5)) < 1e-10);
}

TEST_CASE("transport program improves along a (tau, n) refinement path") {
    // Fully synthesized factors (mode-3 corrections go through certificate
    // sandwiches), so the floor at this K is coarser than the exact-factor
    // study; check qualitative convergence toward e^{T_{3 cos^2 x}}.
    ControlProfileSet Q = ControlProfileSet::canonical();
    EvolveOptions opts;
    opts.tail_tol = 1e-3;
    PhaseSchedule sch;
    sch.tau_top = 1e-8;
    SpectralState psi0 = SpectralState::constant_state(700, 0.0);
    Profile f = Profile::constant(1.5) + Profile::cosine(2, 1.5);
    SpectralState want = transport_apply(psi0, f, 1.0, 1e-4);

    double prev = 1e9;
    for (auto [ltau, n] : {std::pair{6, 4}, {8, 8}, {10, 8}}) {
        double tau = std::pow(2.0, -ltau);
        ControlProgram p = transport_program(Profile::sine(1), tau, n, 0.0, Q, sch);
        auto [fin, tr] = evolve_program(psi0, p, Q, opts);
        double err = distance(fin, want);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 0.25);
}

TEST_CASE("cone_field") {
    std::vector<ConeTerm> terms = {{+1, 2.0, Profile::sine(1)},
                                   {-1, 1.0, Profile::cosine(1)}};
    // 2 cos^2 x - sin^2 x = 1/2 + (3/2) cos 2x
    Profile f = cone_field(terms);
    CHECK(f.a0 == doctest::Approx(0.5));
    CHECK(f.cos_coeff(2) == doctest::Approx(1.5));
}

TEST_CASE("signed_transport_program validates its input") {
    ControlProfileSet Q = ControlProfileSet::canonical();
    std::vector<ConeTerm> bad = {{+1, -1.0, Profile::sine(1)}};
    CHECK_THROWS_AS(signed_transport_program(bad, 0.1, {}, Q, 0.0), ValidationError);
    std::vector<ConeTerm> ok = {{+1, 1.0, Profile::sine(1)}};
    CHECK_THROWS_AS(signed_transport_program(ok, -0.5, {}, Q, 0.0), ValidationError);
}

TEST_CASE("exact_word_target composes atoms in order") {
    SpectralState psi0 = SpectralState::single_mode(32, 0.0, 1);
    SteeringWord w;
    w.atoms.push_back(PhaseAtom{Profile::cosine(1)});
    w.atoms.push_back(TranslateAtom{M_PI / 2});
    w.atoms.push_back(GlobalPhaseAtom{1.0});

    SpectralState byhand = phase_multiply(psi0, Profile::cosine(1));
    byhand = translate(byhand, M_PI / 2);
    Complex z = std::exp(Complex(0, 1.0));
    for (auto& c : byhand.c) c *= z;

    CHECK(distance(exact_word_target(w, psi0), byhand) < 1e-13);
}

TEST_CASE("steer_word rejects a target with a different norm") {
    SimContext sim{ControlProfileSet::canonical(), 0.0, 32, {}};
    SpectralState psi0 = SpectralState::single_mode(32, 0.0, 1);
    SpectralState bad = psi0;
    for (auto& c : bad.c) c *= 1.5;
    SteeringWord w;
    w.atoms.push_back(GlobalPhaseAtom{0.5});
    CHECK_THROWS_AS(steer_word(w, psi0, 1e-2, sim, {}, &bad), ValidationError);
}

TEST_CASE("steer_word handles a single global phase") {
    SimContext sim{ControlProfileSet::canonical(), 0.0, 32, {}};
    SpectralState psi0 = SpectralState::constant_state(32, 0.0);
    SteeringWord w;
    w.atoms.push_back(GlobalPhaseAtom{1.3});
    WordSynthesis out = steer_word(w, psi0, 1e-3, sim, {});
    CHECK(out.achieved_error < 1e-3);
}

TEST_CASE("calibrate walks the ladder") {
    std::vector<double> ladder = {1.0, 0.5, 0.25, 0.125, 0.0625};
    SUBCASE("converges when the trial improves") {
        Calibration c = calibrate([](double p) { return 0.3 * p; }, ladder, 1e-1);
        CHECK(c.converged);
        CHECK(c.best_param == doctest::Approx(0.25));
        CHECK(c.best_error == doctest::Approx(0.075));
        CHECK(c.curve.size() == 3);
    }
    SUBCASE("throws with the best error when exhausted") {
        try {
            calibrate([](double p) { return 0.5 + p; }, ladder, 1e-1);
            FAIL("expected BudgetExceeded");
        } catch (const BudgetExceeded& e) {
            CHECK(e.best_error == doctest::Approx(0.5625));
        }
    }
    SUBCASE("failing trials are skipped, not fatal") {
        Calibration c = calibrate(
            [](double p) -> double {
                if (p > 0.3) throw TruncationLoss(1.0, "too coarse");
                return p;
            },
            ladder, 0.2);
        CHECK(c.converged);
        CHECK(c.best_param == doctest::Approx(0.125));
    }
}

TEST_CASE("factorization_error shrinks with the segment duration") {
    SimContext sim{ControlProfileSet::canonical(), 0.0, 32, {}};
    SpectralState psi0 = SpectralState::constant_state(32, 0.0);
    ControlProgram coarse = base_phase_program(Profile::sine(1, 0.7), 1e-3, sim.Q);
    ControlProgram fine = base_phase_program(Profile::sine(1, 0.7), 1e-6, sim.Q);
    double ec = factorization_error(coarse, sim, psi0);
    double ef = factorization_error(fine, sim, psi0);
    CHECK(ef < ec);
    CHECK(ef < 1e-6);
}

TEST_CASE("schedule scaling shrinks certificate durations only") {
    PhaseSchedule s;
    PhaseSchedule half = s.scaled(0.5);
    CHECK(half.tau_top == doctest::Approx(0.5 * s.tau_top));
    CHECK(half.base_tau == s.base_tau);
}
