#include "kdvsch/kdvsch.h"

#include "kdvsch/errors.hpp"
#include "kdvsch/serialize.hpp"
#include "kdvsch/studies.hpp"
#include "kdvsch/synthesis.hpp"
#include "kdvsch/verification.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

using namespace kdvsch;

struct kdv_state {
    SpectralState s;
};

struct kdv_program {
    ControlProgram p;
    int q = 0;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

kdv_status fail(kdv_status code, const std::string& what) {
    g_last_error = what;
    return code;
}

// Runs the body and translates exceptions into status codes.
template <class F>
kdv_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return KDV_OK;
    } catch (const TruncationLoss& e) {
        return fail(KDV_ETRUNC, e.what());
    } catch (const NotInSpan& e) {
        return fail(KDV_ENOTSPAN, e.what());
    } catch (const DepthBudget& e) {
        return fail(KDV_EBUDGET, e.what());
    } catch (const BudgetExceeded& e) {
        return fail(KDV_EBUDGET, e.what());
    } catch (const NotPositive& e) {
        return fail(KDV_ENOTPOS, e.what());
    } catch (const CostGuard& e) {
        return fail(KDV_ECOST, e.what());
    } catch (const ValidationError& e) {
        return fail(KDV_EINVAL, e.what());
    } catch (const Json::exception& e) {
        return fail(KDV_EINVAL, e.what());
    } catch (const std::exception& e) {
        return fail(KDV_EFAIL, e.what());
    }
}

ControlProfileSet profiles_from_json(const Json& j) {
    if (!j.contains("Q")) return ControlProfileSet::canonical();
    std::vector<Profile> q;
    for (const auto& p : j.at("Q")) q.push_back(profile_from_json(p));
    return ControlProfileSet(std::move(q));
}

EvolveOptions opts_from_json(const Json& j) {
    EvolveOptions o;
    o.lambda_dt = j.value("lambda_dt", o.lambda_dt);
    o.min_steps = j.value("min_steps", o.min_steps);
    o.tail_tol = j.value("tail_tol", o.tail_tol);
    return o;
}

PhaseSchedule schedule_from_json(const Json& j) {
    PhaseSchedule s;
    if (!j.is_object()) return s;
    s.base_tau = j.value("base_tau", s.base_tau);
    s.tau_top = j.value("tau_top", s.tau_top);
    s.ratio = j.value("ratio", s.ratio);
    s.max_depth = j.value("max_depth", s.max_depth);
    return s;
}

TransportParams params_from_json(const Json& j) {
    TransportParams p;
    if (!j.is_object()) return p;
    p.tau = j.value("tau", p.tau);
    p.n = j.value("n", p.n);
    p.trotter_m = j.value("trotter_m", p.trotter_m);
    p.delta = j.value("delta", p.delta);
    if (j.contains("schedule")) p.schedule = schedule_from_json(j["schedule"]);
    return p;
}

Json trace_to_json(const std::vector<TraceRow>& trace) {
    Json rows = Json::array();
    for (const auto& r : trace)
        rows.push_back(Json{{"segment", r.segment},
                            {"t_end", r.t_end},
                            {"l2", r.l2_norm},
                            {"h1", r.h1_norm},
                            {"tail", r.tail_mass}});
    return rows;
}

Json mode_rows_to_json(const std::vector<ModeReportRow>& rows) {
    Json out = Json::array();
    for (const auto& r : rows)
        out.push_back(Json{{"freq", r.freq},
                           {"parity", r.parity},
                           {"depth", r.depth},
                           {"coeff_magnitude", r.coeff_magnitude},
                           {"exact", r.exact}});
    return out;
}

Json study_to_json(const StudyResult& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) rows.push_back(row);
    return Json{{"name", r.name},
                {"columns", r.columns},
                {"rows", rows},
                {"summary", r.summary},
                {"pass", r.pass}};
}

Json dispatch(const Json& req) {
    const std::string op = req.at("op").get<std::string>();

    if (op == "simulate") {
        SpectralState s = state_from_json(req.at("state"));
        ControlProfileSet Q = profiles_from_json(req);
        int q = 0;
        ControlProgram prog = program_from_json(req.at("program"), &q);
        if (q != Q.q()) throw ValidationError("program width does not match Q");
        auto [fin, trace] = evolve_program(s, prog, Q, opts_from_json(req));
        return Json{{"final", state_to_json(fin)},
                    {"trace", trace_to_json(trace)},
                    {"total_time", prog.total_time()}};
    }

    if (op == "synth_phase") {
        PhaseTarget target;
        target.theta = profile_from_json(req.at("theta"));
        target.epsilon = req.at("epsilon").get<double>();
        target.time_budget = req.at("time_budget").get<double>();
        if (target.epsilon <= 0 || target.time_budget <= 0)
            throw ValidationError("epsilon and time_budget must be > 0");
        SimContext sim{profiles_from_json(req), req.value("alpha", 0.0),
                       req.value("K", 64), opts_from_json(req)};
        SpectralState psi0;
        bool have_psi0 = req.contains("psi0");
        if (have_psi0) psi0 = state_from_json(req["psi0"]);
        PhaseSchedule initial = schedule_from_json(req.value("schedule", Json()));
        PhaseSynthesis res =
            phase_program(target, sim, have_psi0 ? &psi0 : nullptr, initial);
        Json curve = Json::array();
        for (auto [f, e] : res.curve) curve.push_back(Json::array({f, e}));
        return Json{{"program", program_to_json(res.program, sim.Q.q())},
                    {"achieved_error", res.achieved_error},
                    {"total_time", res.program.total_time()},
                    {"curve", curve}};
    }

    if (op == "synth_transport") {
        std::vector<ConeTerm> terms;
        for (const auto& t : req.at("terms")) {
            ConeTerm c;
            c.sign = t.at("sign").get<int>();
            c.lambda = t.at("lambda").get<double>();
            c.phi = profile_from_json(t.at("phi"));
            terms.push_back(std::move(c));
        }
        double t = req.at("t").get<double>();
        double alpha = req.value("alpha", 0.0);
        ControlProfileSet Q = profiles_from_json(req);
        TransportParams params = params_from_json(req.value("params", Json()));
        ControlProgram prog = signed_transport_program(terms, t, params, Q, alpha);
        return Json{{"program", program_to_json(prog, Q.q())},
                    {"total_time", prog.total_time()}};
    }

    if (op == "steer") {
        SteeringWord word = word_from_json(req.at("word"));
        if (word.atoms.empty()) throw ValidationError("steering word is empty");
        SpectralState psi0 = state_from_json(req.at("psi0"));
        double epsilon = req.at("epsilon").get<double>();
        SimContext sim{profiles_from_json(req), psi0.alpha, psi0.K, opts_from_json(req)};
        TransportParams params = params_from_json(req.value("params", Json()));
        SpectralState target;
        bool have_target = req.contains("target");
        if (have_target) target = state_from_json(req["target"]);
        WordSynthesis res = steer_word(word, psi0, epsilon, sim, params,
                                       have_target ? &target : nullptr);
        return Json{{"program", program_to_json(res.program, sim.Q.q())},
                    {"achieved_error", res.achieved_error},
                    {"final", state_to_json(res.final_state)},
                    {"total_time", res.program.total_time()}};
    }

    if (op == "saturate") {
        int n = req.value("n", 3);
        int n_max = req.value("n_max", 16);
        SaturationReport rep = saturation_report(n, n_max);
        return Json{{"n", rep.n},
                    {"n_max", rep.n_max},
                    {"closure_dims", rep.closure_dims},
                    {"closure_steps_to_cover", rep.closure_steps_to_cover},
                    {"modes", mode_rows_to_json(rep.modes)},
                    {"field_modes", mode_rows_to_json(rep.field_modes)},
                    {"all_exact", rep.all_exact}};
    }

    if (op == "study") {
        return study_to_json(run_study(req.at("name").get<std::string>(),
                                       req.value("alpha", 0.0)));
    }

    throw ValidationError("unknown op: " + op);
}

}  // namespace

extern "C" {

const char* kdv_last_error(void) { return g_last_error.c_str(); }

void kdv_string_free(char* s) { std::free(s); }

kdv_status kdv_state_zero(int K, double alpha, kdv_state** out) {
    if (!out || K < 1) return fail(KDV_EINVAL, "bad arguments to kdv_state_zero");
    return guarded([&] { *out = new kdv_state{SpectralState(K, alpha)}; });
}

kdv_status kdv_state_constant(int K, double alpha, kdv_state** out) {
    if (!out || K < 1) return fail(KDV_EINVAL, "bad arguments to kdv_state_constant");
    return guarded([&] { *out = new kdv_state{SpectralState::constant_state(K, alpha)}; });
}

kdv_status kdv_state_mode(int K, double alpha, int k, kdv_state** out) {
    if (!out || K < 1 || k < -K || k > K)
        return fail(KDV_EINVAL, "bad arguments to kdv_state_mode");
    return guarded([&] { *out = new kdv_state{SpectralState::single_mode(K, alpha, k)}; });
}

kdv_status kdv_state_from_json(const char* json, kdv_state** out) {
    if (!json || !out) return fail(KDV_EINVAL, "null argument");
    return guarded([&] { *out = new kdv_state{state_from_json(Json::parse(json))}; });
}

kdv_status kdv_state_to_json(const kdv_state* s, char** out) {
    if (!s || !out) return fail(KDV_EINVAL, "null argument");
    return guarded([&] { *out = dup_string(state_to_json(s->s).dump()); });
}

kdv_status kdv_state_l2(const kdv_state* s, double* out) {
    if (!s || !out) return fail(KDV_EINVAL, "null argument");
    *out = s->s.l2_norm();
    return KDV_OK;
}

kdv_status kdv_state_distance(const kdv_state* a, const kdv_state* b, double* out) {
    if (!a || !b || !out) return fail(KDV_EINVAL, "null argument");
    return guarded([&] { *out = distance(a->s, b->s); });
}

void kdv_state_free(kdv_state* s) { delete s; }

kdv_status kdv_program_from_json(const char* json, kdv_program** out) {
    if (!json || !out) return fail(KDV_EINVAL, "null argument");
    return guarded([&] {
        auto p = std::make_unique<kdv_program>();
        p->p = program_from_json(Json::parse(json), &p->q);
        *out = p.release();
    });
}

kdv_status kdv_program_to_json(const kdv_program* p, char** out) {
    if (!p || !out) return fail(KDV_EINVAL, "null argument");
    return guarded([&] { *out = dup_string(program_to_json(p->p, p->q).dump()); });
}

kdv_status kdv_program_total_time(const kdv_program* p, double* out) {
    if (!p || !out) return fail(KDV_EINVAL, "null argument");
    *out = p->p.total_time();
    return KDV_OK;
}

void kdv_program_free(kdv_program* p) { delete p; }

kdv_status kdv_run(const char* request_json, char** response_json) {
    if (!request_json || !response_json) return fail(KDV_EINVAL, "null argument");
    return guarded([&] {
        Json resp = dispatch(Json::parse(request_json));
        *response_json = dup_string(resp.dump());
    });
}

}  // extern "C"
