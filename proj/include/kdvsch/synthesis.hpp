#ifndef KDVSCH_SYNTHESIS_HPP
#define KDVSCH_SYNTHESIS_HPP

#include "kdvsch/certificates.hpp"
#include "kdvsch/spectral.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace kdvsch {

// Per-depth free-flow durations for the cubed-phase recursion: level j gets
// tau_top * ratio^j; in-span base segments get base_tau.
struct PhaseSchedule {
    double base_tau = 1e-13;
    double tau_top = 1e-4;
    double ratio = 0.25;
    int max_depth = 8;

    double tau(int level) const;
    PhaseSchedule scaled(double factor) const;  // shrink the certificate durations
};

// Simulation environment used when validating emitted programs.
struct SimContext {
    ControlProfileSet Q;
    double alpha = 0.0;
    int K = 64;
    EvolveOptions opts{};

    SpectralState blank() const { return SpectralState(K, alpha); }
};

struct PhaseTarget {
    Profile theta;
    double epsilon;
    double time_budget;
};

// --- phase lowering ---------------------------------------------------------

// Single segment (tau, w/tau) with w . Q = theta (least squares, residual
// checked); empty program for theta = 0.
ControlProgram base_phase_program(const Profile& theta, double tau,
                                  const ControlProfileSet& Q);

// Recursive lowering of e^{i scale * eval(cert)}; DerivPower nodes become
// phase(-phi t1^{-1/3}) <> free(t1) <> phase(+phi t1^{-1/3}).
ControlProgram cubed_phase_program(const SaturationCertificate& cert,
                                   const PhaseSchedule& schedule,
                                   const ControlProfileSet& Q,
                                   std::span<const TrigPoly> basis,
                                   double scale = 1.0);

// Arbitrary trig-polynomial phase: in-span part directly, higher modes via
// mode certificates (n = 3).
ControlProgram phase_emit(const Profile& theta, const PhaseSchedule& schedule,
                          const ControlProfileSet& Q, ModeCertifier& certifier);

struct PhaseSynthesis {
    ControlProgram program;
    double achieved_error;
    PhaseSchedule schedule;                       // calibrated
    std::vector<std::pair<double, double>> curve; // (scale factor, error)
};

// Calibrating front end: shrinks the schedule geometrically until the
// simulated error on the witness states is < epsilon within the time budget.
PhaseSynthesis phase_program(const PhaseTarget& target, const SimContext& sim,
                             const SpectralState* psi0 = nullptr,
                             const PhaseSchedule& initial = {});

// --- transport lowering -----------------------------------------------------

// W_{tau,n} program: n repetitions of
//   phase(-phi/sqrt(tau)) <> free(tau/n) <> phase(+phi/sqrt(tau))
//     <> phase(g_tau/(n sqrt(tau))),  g_tau = (phi')^3 + alpha sqrt(tau)(phi')^2,
// approximating e^{T_f}, f = 3 (phi')^2.
ControlProgram transport_program(const Profile& phi, double tau, int n, double alpha,
                                 const ControlProfileSet& Q, const PhaseSchedule& schedule);

// weight of the stray same-field transport leaked by the correction
// sandwiches of one transport_program call (0 when the correction is
// emitted without sandwiches)
double transport_cert_defect(const Profile& phi, double tau, int n,
                             const PhaseSchedule& schedule, const ControlProfileSet& Q);

struct ConeTerm {
    int sign;       // +1 or -1
    double lambda;  // >= 0
    Profile phi;    // field contribution lambda (phi')^2
};

Profile cone_field(std::span<const ConeTerm> terms);  // sum sign lambda (phi')^2

struct TransportParams {
    double tau = 1e-3;
    int n = 16;              // Trotter count inside W
    int trotter_m = 8;       // Trotter count across cone terms
    double rep_weight = 0.25;  // max cone weight routed through a single W
    PhaseSchedule schedule{};
    double delta = 0;   // shift for the period trick; 0 = choose automatically
};

// e^{t T_f} for a signed cone element: positive parts Trotter-composed,
// negative parts through the flow-period trick plus translations.
ControlProgram signed_transport_program(std::span<const ConeTerm> terms, double t,
                                        const TransportParams& params,
                                        const ControlProfileSet& Q, double alpha);

// --- words ------------------------------------------------------------------

struct PhaseAtom { Profile theta; };
struct TransportAtom { std::vector<ConeTerm> terms; double t; };
struct TranslateAtom { double delta; };
struct GlobalPhaseAtom { double c; };
using WordAtom = std::variant<PhaseAtom, TransportAtom, TranslateAtom, GlobalPhaseAtom>;

struct SteeringWord {
    std::vector<WordAtom> atoms;
};

// Exact composed target of a word (phase_multiply / transport_apply /
// translate in word order).
SpectralState exact_word_target(const SteeringWord& word, const SpectralState& psi0);

struct WordSynthesis {
    ControlProgram program;
    double achieved_error;
    SpectralState final_state;
};

// Synthesizes and simulates a word; if `target` is given, it must match
// ||psi0|| to 1e-10 and is used for the final comparison.
WordSynthesis steer_word(const SteeringWord& word, const SpectralState& psi0,
                         double epsilon, const SimContext& sim,
                         const TransportParams& params,
                         const SpectralState* target = nullptr);

// --- calibration and soundness ---------------------------------------------

struct Calibration {
    double best_param = 0;
    double best_error = 0;
    std::vector<std::pair<double, double>> curve;  // (param, error)
    bool converged = false;
};

// Evaluates trial(param) along the given monotone ladder until error <
// epsilon. Throws BudgetExceeded (carrying the best error) when exhausted.
Calibration calibrate(const std::function<double(double)>& trial,
                      std::span<const double> ladder, double epsilon);

// Distance between the simulated program output and the product of its
// intended exact factors (per-segment phase then drift); measures the
// splitting + truncation part of the lowering error.
double factorization_error(const ControlProgram& program, const SimContext& sim,
                           const SpectralState& psi);

}  // namespace kdvsch

#endif
