#include "kdvsch/synthesis.hpp"

#include "kdvsch/errors.hpp"
#include "kdvsch/flows.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace kdvsch {

namespace {

constexpr double kTinyCoeff = 1e-15;

double rat_to_double(const Rational& r) { return r.convert_to<double>(); }

bool profile_is_zero(const Profile& p) {
    if (std::abs(p.a0) > kTinyCoeff) return false;
    for (double c : p.cs)
        if (std::abs(c) > kTinyCoeff) return false;
    for (double c : p.sn)
        if (std::abs(c) > kTinyCoeff) return false;
    return true;
}

bool has_deriv_power(const SaturationCertificate& c) {
    switch (c.kind) {
        case SaturationCertificate::Kind::Basis:
            return false;
        case SaturationCertificate::Kind::DerivPower:
            return true;
        case SaturationCertificate::Kind::LinComb:
            for (const auto& [coef, sub] : c.terms)
                if (has_deriv_power(*sub)) return true;
            return false;
    }
    return false;
}

std::vector<double> zero_control(const ControlProfileSet& Q) {
    return std::vector<double>(Q.q(), 0.0);
}

ControlProgram lower_cert(const SaturationCertificate& c, double scale, int level,
                          const PhaseSchedule& sch, const ControlProfileSet& Q,
                          std::span<const TrigPoly> basis) {
    ControlProgram prog;
    if (scale == 0.0) return prog;
    if (!has_deriv_power(c)) {
        Profile theta = to_profile(evaluate(c, basis));
        theta *= scale;
        return base_phase_program(theta, sch.base_tau, Q);
    }
    if (c.kind == SaturationCertificate::Kind::LinComb) {
        TrigPoly pure;
        for (const auto& [coef, sub] : c.terms) {
            if (has_deriv_power(*sub)) {
                prog.append(lower_cert(*sub, scale * rat_to_double(coef), level, sch, Q, basis));
            } else {
                pure += evaluate(*sub, basis) * coef;
            }
        }
        Profile theta = to_profile(pure);
        theta *= scale;
        if (!profile_is_zero(theta))
            prog.append(base_phase_program(theta, sch.base_tau, Q));
        return prog;
    }
    // DerivPower: sandwich the child phase around a drift segment.
    if (c.power != 3)
        throw ValidationError("phase lowering only handles cubic derivative powers");
    if (level >= sch.max_depth)
        throw DepthBudget("phase certificate recursion exceeded max_depth");
    // Conjugating the drift by e^{-+ i amp phi} produces e^{i scale (phi')^3};
    // the positive phase goes first (the conjugated cubic term is negative).
    double tau1 = sch.tau(level);
    double amp = std::cbrt(scale) / std::cbrt(tau1);
    prog.append(lower_cert(*c.child, amp, level + 1, sch, Q, basis));
    prog.append_segment(tau1, zero_control(Q), "drift");
    prog.append(lower_cert(*c.child, -amp, level + 1, sch, Q, basis));
    return prog;
}

// Realizes e^{sum_j w_j T_{(phi_j')^2}}, w_j > 0, by Trotterizing the W
// programs; single-term inputs need no outer Trotter loop.
ControlProgram positive_cone(std::span<const std::pair<double, Profile>> items,
                             const TransportParams& p, const ControlProfileSet& Q,
                             double alpha) {
    ControlProgram prog;
    std::vector<std::pair<double, Profile>> live;
    for (const auto& it : items)
        if (it.first > kTinyCoeff) live.push_back(it);
    if (live.empty()) return prog;
    double wmax = 0;
    for (const auto& it : live) wmax = std::max(wmax, it.first);
    int m = live.size() > 1 ? p.trotter_m : 1;
    // large weights are split across extra reps so each W stays in the
    // regime where its correction phase is small
    m = std::max(m, static_cast<int>(std::ceil(wmax / std::max(p.rep_weight, 1e-9))));
    // Each W leaks a small extra transport along its own field (the
    // correction sandwiches are not exact); since the leak points the same
    // way, shrink the requested weights until delivered + leaked = goal.
    auto effective = [&](double goal, const Profile& phi, int w_count) {
        double w = goal;
        for (int it = 0; it < 8; ++it) {
            Profile ph = phi;
            ph *= std::sqrt(w / (3.0 * m));
            double leak = w_count * transport_cert_defect(ph, p.tau, p.n, p.schedule, Q);
            double next = goal - leak;
            if (next <= 0) return goal;  // cannot compensate; deliver as asked
            w = next;
        }
        return w;
    };
    // Strang ordering across the cone terms: half steps of all but the last
    // item wrap a full step of the last, so the splitting error per rep is
    // second order in the rep weight.
    auto w_step = [&](double w, const Profile& phi) {
        Profile ph = phi;
        ph *= std::sqrt(w / (3.0 * m));
        return transport_program(ph, p.tau, p.n, alpha, Q, p.schedule);
    };
    std::vector<double> eff(live.size());
    for (size_t i = 0; i + 1 < live.size(); ++i)
        eff[i] = effective(live[i].first / 2, live[i].second, m);
    eff.back() = effective(live.back().first, live.back().second, m);
    ControlProgram rep;
    for (size_t i = 0; i + 1 < live.size(); ++i) rep.append(w_step(eff[i], live[i].second));
    rep.append(w_step(eff.back(), live.back().second));
    for (size_t i = live.size() - 1; i-- > 0;) rep.append(w_step(eff[i], live[i].second));
    for (int r = 0; r < m; ++r) prog.append(rep);
    return prog;
}

// e^{-kappa T_h}, h = sum lambda_j (phi_j')^2 >= 0, via the flow-period
// identity; fields without a certified positive minimum get a constant
// shift that is undone by translations.
ControlProgram negative_cone(std::span<const ConeTerm> neg, double kappa,
                             const TransportParams& p, const ControlProfileSet& Q,
                             double alpha) {
    Profile h = Profile::constant(0.0);
    std::vector<std::pair<double, Profile>> items;
    for (const auto& term : neg) {
        Profile dsq = term.phi.derivative();
        dsq = multiply(dsq, dsq);
        dsq *= term.lambda;
        h += dsq;
        items.emplace_back(term.lambda, term.phi);
    }
    double delta = p.delta;
    double period = 0;
    if (delta <= 0) {
        try {
            period = flow_period(h);
        } catch (const NotPositive&) {
            delta = std::max(1.0, 2.0 * sup_bound(h));
        }
    }
    if (delta <= 0) {
        // h is positive: pick the smallest wind count k with
        // s = (k+1) Pi(h) - kappa >= 0 and run forward for time s.
        double s = period - kappa;
        while (s < 0) s += period;
        std::vector<std::pair<double, Profile>> scaled;
        for (const auto& [lam, phi] : items) scaled.emplace_back(s * lam, phi);
        return positive_cone(scaled, p, Q, alpha);
    }
    // Shifted field g = h + delta > 0; Trotter e^{-kappa T_g} against the
    // translation e^{kappa delta dx} that cancels the shift.
    Profile g = h;
    g += Profile::constant(delta);
    period = flow_period(g);
    int m = std::max(1, p.trotter_m);
    double kap = kappa / m;
    double s = period - kap;
    while (s < 0) s += period;
    std::vector<std::pair<double, Profile>> gterms;
    for (const auto& [lam, phi] : items) gterms.emplace_back(s * lam, phi);
    gterms.emplace_back(s * delta, Profile::sine(1));   // cos^2 part of the shift
    gterms.emplace_back(s * delta, Profile::cosine(1)); // sin^2 part
    std::vector<std::pair<double, Profile>> shift = {
        {kap * delta, Profile::sine(1)},
        {kap * delta, Profile::cosine(1)},
    };
    ControlProgram prog;
    for (int r = 0; r < m; ++r) {
        prog.append(positive_cone(gterms, p, Q, alpha));
        prog.append(positive_cone(shift, p, Q, alpha));
    }
    return prog;
}

ControlProgram translation_program(double delta, const TransportParams& p,
                                   const ControlProfileSet& Q, double alpha) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double d = std::fmod(delta, two_pi);
    if (d < 0) d += two_pi;  // negative shifts wrap around the torus
    if (d < kTinyCoeff) return {};
    std::vector<std::pair<double, Profile>> items = {
        {d, Profile::sine(1)},
        {d, Profile::cosine(1)},
    };
    return positive_cone(items, p, Q, alpha);
}

}  // namespace

double PhaseSchedule::tau(int level) const {
    return tau_top * std::pow(ratio, level);
}

PhaseSchedule PhaseSchedule::scaled(double factor) const {
    PhaseSchedule s = *this;
    s.tau_top *= factor;
    // base segments are already effectively instantaneous; scaling them
    // further would push them under the rounding-resolution drop threshold
    return s;
}

ControlProgram base_phase_program(const Profile& theta, double tau,
                                  const ControlProfileSet& Q) {
    ControlProgram prog;
    if (profile_is_zero(theta)) return prog;
    double residual = 0;
    std::vector<double> w = Q.solve(theta, &residual);
    if (residual > 1e-12)
        throw NotInSpan(residual, "phase target not in span of the control profiles");
    for (double& wi : w) wi /= tau;
    prog.append_segment(tau, std::move(w), "phase");
    return prog;
}

ControlProgram cubed_phase_program(const SaturationCertificate& cert,
                                   const PhaseSchedule& schedule,
                                   const ControlProfileSet& Q,
                                   std::span<const TrigPoly> basis, double scale) {
    return lower_cert(cert, scale, 0, schedule, Q, basis);
}

ControlProgram phase_emit(const Profile& theta, const PhaseSchedule& schedule,
                          const ControlProfileSet& Q, ModeCertifier& certifier) {
    int n = certifier.n();
    Profile low = Profile::constant(theta.a0);
    ControlProgram prog;
    int deg = theta.degree();
    for (int m = 1; m <= deg; ++m) {
        double a = m <= static_cast<int>(theta.cs.size()) ? theta.cs[m - 1] : 0.0;
        double b = m <= static_cast<int>(theta.sn.size()) ? theta.sn[m - 1] : 0.0;
        if (m < n) {
            low += Profile::cosine(m, a);
            low += Profile::sine(m, b);
            continue;
        }
        if (std::abs(a) > kTinyCoeff)
            prog.append(cubed_phase_program(*certifier.certificate(m, Parity::Cos), schedule,
                                            Q, certifier.basis(), a));
        if (std::abs(b) > kTinyCoeff)
            prog.append(cubed_phase_program(*certifier.certificate(m, Parity::Sin), schedule,
                                            Q, certifier.basis(), b));
    }
    if (!profile_is_zero(low)) {
        ControlProgram base = base_phase_program(low, schedule.base_tau, Q);
        base.append(prog);
        return base;
    }
    return prog;
}

PhaseSynthesis phase_program(const PhaseTarget& target, const SimContext& sim,
                             const SpectralState* psi0, const PhaseSchedule& initial) {
    ModeCertifier certifier(3);
    std::vector<SpectralState> witnesses;
    if (psi0) witnesses.push_back(*psi0);
    witnesses.push_back(SpectralState::constant_state(sim.K, sim.alpha));
    witnesses.push_back(SpectralState::single_mode(sim.K, sim.alpha, 1));

    PhaseSynthesis out;
    double best = std::numeric_limits<double>::infinity();
    const int max_halvings = 20;
    for (int j = 0; j < max_halvings; ++j) {
        double factor = std::pow(0.5, j);
        PhaseSchedule sch = initial.scaled(factor);
        double err = std::numeric_limits<double>::infinity();
        ControlProgram prog;
        try {
            prog = phase_emit(target.theta, sch, sim.Q, certifier);
            if (prog.total_time() <= target.time_budget) {
                err = 0;
                for (const auto& w : witnesses) {
                    SpectralState exact = phase_multiply(w, target.theta, sim.opts.tail_tol);
                    auto [simulated, trace] = evolve_program(w, prog, sim.Q, sim.opts);
                    err = std::max(err, distance(simulated, exact));
                }
            }
        } catch (const TruncationLoss&) {
            // bandwidth blew past K for this schedule; record and move on
            err = std::numeric_limits<double>::infinity();
        }
        out.curve.emplace_back(factor, err);
        if (err < best) {
            best = err;
            out.program = prog;
            out.schedule = sch;
            out.achieved_error = err;
        }
        if (err < target.epsilon) return out;
    }
    throw BudgetExceeded(best, "phase calibration did not reach the requested accuracy");
}

namespace {

// phi = c * sin(kx) or c * cos(kx): one harmonic, no constant part
bool single_harmonic(const Profile& phi, double& coeff, Profile& unit) {
    if (std::abs(phi.a0) > kTinyCoeff) return false;
    int found = 0;
    for (int m = 1; m <= phi.degree(); ++m) {
        double ck = phi.cos_coeff(m), sk = phi.sin_coeff(m);
        if (std::abs(ck) > kTinyCoeff) {
            ++found, coeff = ck, unit = Profile::cosine(m);
        }
        if (std::abs(sk) > kTinyCoeff) {
            ++found, coeff = sk, unit = Profile::sine(m);
        }
    }
    return found == 1;
}

bool in_span(const Profile& theta, const ControlProfileSet& Q) {
    try {
        base_phase_program(theta, 1.0, Q);
        return true;
    } catch (const NotInSpan&) {
        return false;
    }
}

}  // namespace

double transport_cert_defect(const Profile& phi, double tau, int n,
                             const PhaseSchedule& schedule, const ControlProfileSet& Q) {
    double c = 0;
    Profile unit;
    if (!single_harmonic(phi, c, unit) || !in_span(unit, Q)) return 0.0;
    double scale = std::abs(c * c * c) * 0.5 / (n * std::sqrt(tau));
    // one sandwich leaks a transport of weight 3 scale^{2/3} tt^{1/3} along
    // the same field; 2n sandwiches per product
    return 2.0 * n * 3.0 * std::pow(scale, 2.0 / 3.0) * std::cbrt(schedule.tau_top);
}

ControlProgram transport_program(const Profile& phi, double tau, int n, double alpha,
                                 const ControlProfileSet& Q, const PhaseSchedule& schedule) {
    if (tau <= 0 || n < 1) throw ValidationError("transport_program needs tau > 0, n >= 1");
    double rt = std::sqrt(tau);
    ModeCertifier certifier(3);

    double c_h = 0;
    Profile unit;
    bool direct = single_harmonic(phi, c_h, unit) && in_span(unit, Q);
    const double tt = schedule.tau_top;

    // correction phase for one slab, split in half around the conjugated
    // drift; sg flips the phase sign between slabs so the defect terms odd
    // in the amplitude cancel pairwise
    auto emit_correction = [&](ControlProgram& out, double sg) {
        if (direct) {
            // (phi')^3 = c^3 (unit')^3 realized by one sandwich
            double scale = sg * c_h * c_h * c_h * 0.5 / (n * rt);
            if (std::abs(scale) > kTinyCoeff) {
                double A = std::copysign(std::cbrt(std::abs(scale) / tt), scale);
                Profile up = unit;
                up *= A;
                Profile dn = unit;
                dn *= -A;
                out.append(base_phase_program(up, schedule.base_tau, Q));
                out.append_segment(tt, zero_control(Q), "gcert");
                out.append(base_phase_program(dn, schedule.base_tau, Q));
            }
            if (alpha != 0) {
                Profile acorr = multiply(phi.derivative(), phi.derivative());
                acorr *= alpha * 0.5 / n;
                if (in_span(acorr, Q))
                    out.append(base_phase_program(acorr, schedule.base_tau, Q));
                else
                    out.append(phase_emit(acorr, schedule, Q, certifier));
            }
            return;
        }
        Profile dphi = phi.derivative();
        dphi *= sg;
        Profile dphi2 = multiply(dphi, dphi);
        Profile g = multiply(dphi2, dphi);
        Profile corr = dphi2;
        corr *= alpha * rt;
        g += corr;
        g *= 0.5 / (n * rt);
        out.append(phase_emit(g, schedule, Q, certifier));
    };

    ControlProgram prog;
    for (int r = 0; r < n; ++r) {
        double sg = (r % 2 == 0) ? 1.0 : -1.0;
        Profile pre = phi;
        pre *= -sg / rt;
        Profile post = phi;
        post *= sg / rt;
        emit_correction(prog, sg);
        if (in_span(phi, Q)) {
            prog.append(base_phase_program(pre, schedule.base_tau, Q));
            prog.append_segment(tau / n, zero_control(Q), "drift");
            prog.append(base_phase_program(post, schedule.base_tau, Q));
        } else {
            prog.append(phase_emit(pre, schedule, Q, certifier));
            prog.append_segment(tau / n, zero_control(Q), "drift");
            prog.append(phase_emit(post, schedule, Q, certifier));
        }
        emit_correction(prog, sg);
    }
    return prog;
}

Profile cone_field(std::span<const ConeTerm> terms) {
    Profile f = Profile::constant(0.0);
    for (const auto& t : terms) {
        Profile d = t.phi.derivative();
        d = multiply(d, d);
        d *= t.sign * t.lambda;
        f += d;
    }
    return f;
}

ControlProgram signed_transport_program(std::span<const ConeTerm> terms, double t,
                                        const TransportParams& params,
                                        const ControlProfileSet& Q, double alpha) {
    if (t < 0) throw ValidationError("signed_transport_program needs t >= 0");
    std::vector<std::pair<double, Profile>> pos;
    std::vector<ConeTerm> neg;
    for (const auto& term : terms) {
        if (term.lambda < 0) throw ValidationError("cone weights must be >= 0");
        if (term.lambda == 0) continue;
        if (term.sign >= 0)
            pos.emplace_back(t * term.lambda, term.phi);
        else
            neg.push_back(term);
    }
    if (neg.empty()) return positive_cone(pos, params, Q, alpha);
    if (pos.empty()) return negative_cone(neg, t, params, Q, alpha);

    // Mixed signs: Trotter the two halves against each other.
    int m = std::max(1, params.trotter_m);
    std::vector<std::pair<double, Profile>> pos_slice;
    for (const auto& [w, phi] : pos) pos_slice.emplace_back(w / m, phi);
    ControlProgram prog;
    for (int r = 0; r < m; ++r) {
        prog.append(positive_cone(pos_slice, params, Q, alpha));
        prog.append(negative_cone(neg, t / m, params, Q, alpha));
    }
    return prog;
}

SpectralState exact_word_target(const SteeringWord& word, const SpectralState& psi0) {
    SpectralState s = psi0;
    for (const auto& atom : word.atoms) {
        if (const auto* p = std::get_if<PhaseAtom>(&atom)) {
            s = phase_multiply(s, p->theta);
        } else if (const auto* tr = std::get_if<TransportAtom>(&atom)) {
            s = transport_apply(s, cone_field(tr->terms), tr->t);
        } else if (const auto* sh = std::get_if<TranslateAtom>(&atom)) {
            s = translate(s, sh->delta);
        } else if (const auto* gp = std::get_if<GlobalPhaseAtom>(&atom)) {
            Complex z = std::exp(Complex(0, gp->c));
            for (auto& c : s.c) c *= z;
        }
    }
    return s;
}

WordSynthesis steer_word(const SteeringWord& word, const SpectralState& psi0,
                         double epsilon, const SimContext& sim,
                         const TransportParams& params, const SpectralState* target) {
    SpectralState goal = exact_word_target(word, psi0);
    if (target) {
        if (std::abs(target->l2_norm() - psi0.l2_norm()) > 1e-10)
            throw ValidationError("explicit steering target changes the L2 norm");
        goal = *target;
    }

    WordSynthesis best;
    best.achieved_error = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) {
        TransportParams p = params;
        p.schedule = params.schedule.scaled(std::pow(0.5, j));
        ModeCertifier certifier(3);
        ControlProgram prog;
        for (const auto& atom : word.atoms) {
            if (const auto* ph = std::get_if<PhaseAtom>(&atom)) {
                prog.append(phase_emit(ph->theta, p.schedule, sim.Q, certifier));
            } else if (const auto* tr = std::get_if<TransportAtom>(&atom)) {
                prog.append(signed_transport_program(tr->terms, tr->t, p, sim.Q, sim.alpha));
            } else if (const auto* sh = std::get_if<TranslateAtom>(&atom)) {
                prog.append(translation_program(sh->delta, p, sim.Q, sim.alpha));
            } else if (const auto* gp = std::get_if<GlobalPhaseAtom>(&atom)) {
                prog.append(base_phase_program(Profile::constant(gp->c), p.schedule.base_tau,
                                               sim.Q));
            }
        }
        double err;
        SpectralState fin;
        try {
            auto [state, trace] = evolve_program(psi0, prog, sim.Q, sim.opts);
            fin = state;
            err = distance(fin, goal);
        } catch (const TruncationLoss&) {
            continue;
        }
        if (err < best.achieved_error) best = {prog, err, fin};
        if (err < epsilon) break;
    }
    if (!std::isfinite(best.achieved_error))
        throw BudgetExceeded(best.achieved_error, "word synthesis never produced a finite error");
    return best;
}

Calibration calibrate(const std::function<double(double)>& trial,
                      std::span<const double> ladder, double epsilon) {
    Calibration out;
    double best = std::numeric_limits<double>::infinity();
    for (double p : ladder) {
        double e;
        try {
            e = trial(p);
        } catch (const Error&) {
            e = std::numeric_limits<double>::infinity();
        }
        out.curve.emplace_back(p, e);
        if (e < best) {
            best = e;
            out.best_param = p;
            out.best_error = e;
        }
        if (e < epsilon) {
            out.converged = true;
            return out;
        }
    }
    throw BudgetExceeded(best, "calibration ladder exhausted without reaching epsilon");
}

double factorization_error(const ControlProgram& program, const SimContext& sim,
                           const SpectralState& psi) {
    SpectralState exact = psi;
    for (const auto& seg : program.segments) {
        if (seg.tau < 1e-15) continue;
        Profile theta = sim.Q.combine(seg.u);
        theta *= seg.tau;
        if (!profile_is_zero(theta)) exact = phase_multiply(exact, theta, sim.opts.tail_tol);
        exact = free_flow(exact, seg.tau);
    }
    auto [simulated, trace] = evolve_program(psi, program, sim.Q, sim.opts);
    return distance(simulated, exact);
}

}  // namespace kdvsch
