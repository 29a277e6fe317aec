#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kdvsch/errors.hpp"
#include "kdvsch/serialize.hpp"
#include "kdvsch/spectral.hpp"

#include <cmath>
#include <random>

using namespace kdvsch;

namespace {

SpectralState random_state(std::mt19937& rng, int K, double decay = 0.5) {
    SpectralState s(K, 0.0);
    std::normal_distribution<double> g;
    for (int k = -K; k <= K; ++k)
        s.at(k) = Complex(g(rng), g(rng)) * std::exp(-decay * std::abs(k));
    return s.normalized();
}

}  // namespace

TEST_CASE("free_flow multipliers") {
    SUBCASE("k=2, alpha=0, t=pi/4: phase is a full turn") {
        SpectralState s = SpectralState::single_mode(8, 0.0, 2);
        SpectralState r = free_flow(s, M_PI / 4);
        CHECK(distance(r, s) < 1e-12);
    }
    SUBCASE("k=1, alpha=1: symbol vanishes") {
        SpectralState s = SpectralState::single_mode(8, 1.0, 1);
        CHECK(distance(free_flow(s, 0.37), s) < 1e-14);
    }
    SUBCASE("t=0 is the identity") {
        std::mt19937 rng(1);
        SpectralState s = random_state(rng, 16);
        CHECK(distance(free_flow(s, 0.0), s) == 0.0);
    }
    SUBCASE("group law and unitarity") {
        std::mt19937 rng(2);
        SpectralState s = random_state(rng, 16);
        SpectralState a = free_flow(free_flow(s, 0.3), 0.4);
        SpectralState b = free_flow(s, 0.7);
        CHECK(distance(a, b) < 1e-12);
        CHECK(free_flow(s, 5.0).l2_norm() == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(distance(free_flow(free_flow(s, 1.3), -1.3), s) < 1e-12);
    }
}

TEST_CASE("phase_multiply") {
    SUBCASE("constant phase") {
        std::mt19937 rng(3);
        SpectralState s = random_state(rng, 16);
        SpectralState r = phase_multiply(s, Profile::constant(0.7));
        Complex z = std::exp(Complex(0, 0.7));
        for (int k = -16; k <= 16; ++k)
            CHECK(std::abs(r.at(k) - z * s.at(k)) < 1e-12);
    }
    SUBCASE("zero phase is the identity") {
        std::mt19937 rng(4);
        SpectralState s = random_state(rng, 16);
        CHECK(distance(phase_multiply(s, Profile()), s) < 1e-13);
    }
    SUBCASE("e^{i cos x} on the constant state gives Bessel coefficients") {
        // e^{i cos x} = sum_k i^k J_k(1) e^{ikx}
        SpectralState s = SpectralState::constant_state(64, 0.0);
        SpectralState r = phase_multiply(s, Profile::cosine(1));
        double c0 = std::abs(s.at(0));
        for (int k = 0; k <= 6; ++k) {
            Complex ik = std::pow(Complex(0, 1), k);
            Complex want = ik * std::cyl_bessel_j(k, 1.0) * c0;
            CHECK(std::abs(r.at(k) - want) < 1e-10);
            // J_{-k}(1) = (-1)^k J_k(1)
            Complex wantm = std::pow(Complex(0, -1), k) *
                            ((k % 2) ? -1.0 : 1.0) * std::cyl_bessel_j(k, 1.0) * c0;
            CHECK(std::abs(r.at(-k) - wantm) < 1e-10);
        }
        CHECK(r.l2_norm() == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("tail overflow raises TruncationLoss") {
        SpectralState s = SpectralState::single_mode(4, 0.0, 3);
        CHECK_THROWS_AS(phase_multiply(s, Profile::cosine(2, 40.0), 1e-6), TruncationLoss);
    }
}

TEST_CASE("heat_regularize") {
    SpectralState m2 = SpectralState::single_mode(8, 0.0, 2);
    SpectralState r = heat_regularize(m2, 1.0);
    CHECK(std::abs(r.at(2)) == doctest::Approx(std::exp(-4.0)));

    SpectralState m0 = SpectralState::single_mode(8, 0.0, 0);
    CHECK(distance(heat_regularize(m0, 0.3), m0) < 1e-14);

    CHECK_THROWS_AS(heat_regularize(m0, 0.0), ValidationError);
    CHECK_THROWS_AS(heat_regularize(m0, -1.0), ValidationError);

    // ||psi^tau - psi|| decreases monotonically as tau -> 0; the multiplier
    // 1 - e^{-tau^{1/4} k^2} dies like tau^{1/4}, so the walk is long
    std::mt19937 rng(5);
    SpectralState s = random_state(rng, 16);
    double prev = 2.0;
    for (int j = 0; j <= 40; j += 4) {
        double err = distance(heat_regularize(s, std::pow(2.0, -j)), s);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 0.05);
    CHECK(heat_regularize(s, 0.5).l2_norm() <= s.l2_norm() + 1e-14);
}

TEST_CASE("evolve_constant") {
    ControlProfileSet Q = ControlProfileSet::canonical();
    std::mt19937 rng(6);
    SpectralState s = random_state(rng, 16);

    SUBCASE("u = 0 is the free flow") {
        std::vector<double> u(Q.q(), 0.0);
        SpectralState r = evolve_constant(s, u, Q, 0.45, 7);
        CHECK(distance(r, free_flow(s, 0.45)) < 1e-12);
    }
    SUBCASE("constant potential commutes with the drift") {
        std::vector<double> u(Q.q(), 0.0);
        u[0] = 2.5;  // Q_0 = 1
        SpectralState r = evolve_constant(s, u, Q, 0.2, 3);
        SpectralState want = free_flow(s, 0.2);
        Complex z = std::exp(Complex(0, 2.5 * 0.2));
        for (auto& c : want.c) c *= z;
        CHECK(distance(r, want) < 1e-11);
    }
    SUBCASE("norm conservation") {
        std::vector<double> u = {0.3, -1.2, 0.8, 0.1, -0.4};
        SpectralState r = evolve_constant(s, u, Q, 0.5, 200);
        CHECK(std::abs(r.l2_norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("evolve_program") {
    ControlProfileSet Q = ControlProfileSet::canonical();
    std::mt19937 rng(7);
    SpectralState s = random_state(rng, 16);

    SUBCASE("empty program") {
        ControlProgram p;
        auto [r, trace] = evolve_program(s, p, Q);
        CHECK(distance(r, s) == 0.0);
        CHECK(trace.empty());
    }
    SUBCASE("single zero-control segment") {
        ControlProgram p;
        p.append_segment(0.3, std::vector<double>(Q.q(), 0.0), "drift");
        auto [r, trace] = evolve_program(s, p, Q);
        CHECK(distance(r, free_flow(s, 0.3)) < 1e-12);
        REQUIRE(trace.size() == 1);
        CHECK(trace[0].t_end == doctest::Approx(0.3));
        CHECK(trace[0].l2_norm == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("segment splitting changes nothing beyond splitting error") {
        std::vector<double> u = {0.0, 1.0, -0.5, 0.2, 0.0};
        ControlProgram whole, halves;
        whole.append_segment(0.2, u, "");
        halves.append_segment(0.1, u, "");
        halves.append_segment(0.1, u, "");
        auto [a, ta] = evolve_program(s, whole, Q);
        auto [b, tb] = evolve_program(s, halves, Q);
        CHECK(distance(a, b) < 1e-8);
    }
    SUBCASE("sub-resolution segments are dropped") {
        ControlProgram p;
        p.append_segment(1e-16, std::vector<double>(Q.q(), 1.0), "noise");
        auto [r, trace] = evolve_program(s, p, Q);
        CHECK(distance(r, s) == 0.0);
    }
}

TEST_CASE("norm drift over a random long program") {
    ControlProfileSet Q = ControlProfileSet::canonical();
    std::mt19937 rng(8);
    SpectralState s = random_state(rng, 64, 1.0);
    std::uniform_real_distribution<double> amp(-10.0, 10.0);
    std::uniform_real_distribution<double> dur(1e-4, 2e-2);
    ControlProgram p;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> u(Q.q());
        for (auto& v : u) v = amp(rng) / Q.q();
        p.append_segment(dur(rng), u, "");
    }
    auto [r, trace] = evolve_program(s, p, Q);
    CHECK(std::abs(r.l2_norm() - 1.0) <= 1e-10);
}

TEST_CASE("sobolev_norm") {
    SpectralState m0 = SpectralState::single_mode(8, 0.0, 0);
    CHECK(m0.sobolev_norm(0.0) == doctest::Approx(1.0));
    CHECK(m0.sobolev_norm(3.7) == doctest::Approx(1.0));

    SpectralState m1 = SpectralState::single_mode(8, 0.0, 1);
    CHECK(m1.sobolev_norm(1.0) == doctest::Approx(std::sqrt(2.0)));

    std::mt19937 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        SpectralState s = random_state(rng, 16);
        CHECK(s.sobolev_norm(0.0) <= s.sobolev_norm(1.0) + 1e-14);
        CHECK(s.sobolev_norm(0.0) == doctest::Approx(s.l2_norm()));
    }
}

TEST_CASE("control profile set") {
    ControlProfileSet Q = ControlProfileSet::canonical();
    REQUIRE(Q.q() == 5);

    double res = 0;
    auto w = Q.solve(Profile::sine(2), &res);
    CHECK(res < 1e-12);
    Profile back = Q.combine(w);
    CHECK(std::abs(back.sin_coeff(2) - 1.0) < 1e-12);

    Q.solve(Profile::cosine(3), &res);
    CHECK(res > 0.5);  // outside span

    // dropping the constant breaks the spanning condition
    std::vector<Profile> bad = {Profile::sine(1), Profile::cosine(1),
                                Profile::sine(2), Profile::cosine(2)};
    CHECK_THROWS_AS(ControlProfileSet(std::move(bad)), ValidationError);
}

TEST_CASE("state and program JSON round trip") {
    std::mt19937 rng(10);
    SpectralState s = random_state(rng, 6);
    s.alpha = -2.5;
    SpectralState s2 = state_from_json(state_to_json(s));
    CHECK(s2.K == s.K);
    CHECK(s2.alpha == s.alpha);
    CHECK(distance(s, s2) < 1e-15);

    ControlProgram p;
    p.append_segment(0.25, {1.0, -0.5, 0.0, 2.0, 3.0}, "phase");
    p.append_segment(1e-7, {0.0, 0.0, 0.0, 0.0, 0.0}, "drift");
    int q = 0;
    ControlProgram p2 = program_from_json(program_to_json(p, 5), &q);
    CHECK(q == 5);
    REQUIRE(p2.segments.size() == 2);
    CHECK(p2.segments[0].tau == p.segments[0].tau);
    CHECK(p2.segments[0].u == p.segments[0].u);
    CHECK(p2.segments[1].label == "drift");
    CHECK(p2.total_time() == doctest::Approx(p.total_time()));
}
