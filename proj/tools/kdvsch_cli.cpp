// Batch front end: reads states/programs/targets from JSON files, calls the
// shared-library C API, and writes CSV/JSON artifacts. No core headers here;
// everything goes through kdvsch.h.

#include "kdvsch/kdvsch.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr int kExitFail = 1;    // a certified check failed
constexpr int kExitConfig = 2;  // configuration / input validation failure

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

void write_json_file(const fs::path& path, const Json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

Json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Json j;
    in >> j;
    return j;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += fmt17(row[i]);
        }
        out += '\n';
    }
    atomic_write(path, out);
}

struct RunConfig {
    double alpha = 0.0;
    int K = 64;
    double lambda_dt = 1e4;
    double tail_tol = 1e-6;
    std::string out_dir = ".";

    void validate() const {
        if (K < 4) throw std::runtime_error("config: K must be >= 4");
        if (lambda_dt <= 0) throw std::runtime_error("config: lambda_dt must be > 0");
        if (tail_tol <= 0) throw std::runtime_error("config: tail_tol must be > 0");
    }
};

// Flat-key JSON config file; CLI flags override file values, env var
// KDVSCH_OUT overrides the output directory.
RunConfig load_config(const std::string& path) {
    RunConfig c;
    if (!path.empty()) {
        Json j = read_json_file(path);
        c.alpha = j.value("alpha", c.alpha);
        c.K = j.value("K", c.K);
        c.lambda_dt = j.value("lambda_dt", c.lambda_dt);
        c.tail_tol = j.value("tail_tol", c.tail_tol);
        c.out_dir = j.value("out_dir", c.out_dir);
    }
    return c;
}

// Runs a core request, returning the parsed response or throwing with the
// core's diagnostic. kdv_status EINVAL is re-thrown as a config failure.
Json core_run(const Json& request) {
    char* resp = nullptr;
    kdv_status st = kdv_run(request.dump().c_str(), &resp);
    if (st != KDV_OK) {
        std::string what = kdv_last_error();
        if (st == KDV_EINVAL) throw std::invalid_argument(what);
        throw std::runtime_error(what);
    }
    Json out = Json::parse(resp);
    kdv_string_free(resp);
    return out;
}

int cmd_simulate(const RunConfig& cfg, const std::string& state_path,
                 const std::string& program_path) {
    Json req{{"op", "simulate"},
             {"state", read_json_file(state_path)},
             {"program", read_json_file(program_path)},
             {"lambda_dt", cfg.lambda_dt},
             {"tail_tol", cfg.tail_tol}};
    Json resp = core_run(req);
    fs::path out = cfg.out_dir;
    write_json_file(out / "final_state.json", resp["final"]);
    std::vector<std::vector<double>> rows;
    for (const auto& r : resp["trace"])
        rows.push_back({static_cast<double>(r["segment"].get<int>()), r["t_end"].get<double>(),
                        r["l2"].get<double>(), r["h1"].get<double>(), r["tail"].get<double>()});
    write_csv(out / "trace.csv", {"segment", "t_end", "l2", "h1", "tail"}, rows);
    std::cout << "simulate: total_time=" << fmt17(resp["total_time"].get<double>()) << "\n";
    return 0;
}

int cmd_synth_phase(const RunConfig& cfg, const std::string& theta_path, double epsilon,
                    double time_budget) {
    Json req{{"op", "synth_phase"}, {"theta", read_json_file(theta_path)},
             {"epsilon", epsilon},  {"time_budget", time_budget},
             {"alpha", cfg.alpha},  {"K", cfg.K},
             {"lambda_dt", cfg.lambda_dt}};
    Json resp = core_run(req);
    fs::path out = cfg.out_dir;
    write_json_file(out / "phase_program.json", resp["program"]);
    std::vector<std::vector<double>> rows;
    for (const auto& p : resp["curve"]) rows.push_back({p[0].get<double>(), p[1].get<double>()});
    write_csv(out / "phase_curve.csv", {"schedule_scale", "error"}, rows);
    double err = resp["achieved_error"].get<double>();
    std::cout << "synth-phase: error=" << fmt17(err)
              << " total_time=" << fmt17(resp["total_time"].get<double>()) << "\n";
    return err < epsilon ? 0 : kExitFail;
}

int cmd_synth_transport(const RunConfig& cfg, const std::string& target_path) {
    Json target = read_json_file(target_path);  // {"terms": [...], "t": .., "params": {..}}
    Json req{{"op", "synth_transport"},
             {"terms", target.at("terms")},
             {"t", target.at("t")},
             {"alpha", cfg.alpha}};
    if (target.contains("params")) req["params"] = target["params"];
    Json resp = core_run(req);
    write_json_file(fs::path(cfg.out_dir) / "transport_program.json", resp["program"]);
    std::cout << "synth-transport: total_time=" << fmt17(resp["total_time"].get<double>())
              << " segments=" << resp["program"]["segments"].size() << "\n";
    return 0;
}

int cmd_steer(const RunConfig& cfg, const std::string& word_path,
              const std::string& state_path, double epsilon) {
    Json word = read_json_file(word_path);
    Json req{{"op", "steer"},
             {"word", word},
             {"psi0", read_json_file(state_path)},
             {"epsilon", epsilon},
             {"lambda_dt", cfg.lambda_dt},
             {"tail_tol", cfg.tail_tol}};
    if (word.contains("params")) req["params"] = word["params"];
    Json resp = core_run(req);
    fs::path out = cfg.out_dir;
    write_json_file(out / "steer_program.json", resp["program"]);
    write_json_file(out / "steer_final.json", resp["final"]);
    double err = resp["achieved_error"].get<double>();
    std::cout << "steer: error=" << fmt17(err)
              << " total_time=" << fmt17(resp["total_time"].get<double>()) << "\n";
    return err < epsilon ? 0 : kExitFail;
}

int cmd_saturate(const RunConfig& cfg, int n, int nmax) {
    Json resp = core_run(Json{{"op", "saturate"}, {"n", n}, {"n_max", nmax}});
    fs::path out = cfg.out_dir;
    write_json_file(out / "saturation.json", resp);
    std::vector<std::vector<double>> rows;
    for (const char* key : {"modes", "field_modes"}) {
        for (const auto& m : resp[key])
            rows.push_back({static_cast<double>(m["freq"].get<int>()),
                            m["parity"] == "cos" ? 0.0 : 1.0,
                            static_cast<double>(m["depth"].get<int>()),
                            m["coeff_magnitude"].get<double>(),
                            m["exact"].get<bool>() ? 1.0 : 0.0});
    }
    write_csv(out / "saturation_modes.csv",
              {"freq", "parity_sin", "depth", "coeff_magnitude", "exact"}, rows);
    bool ok = resp["all_exact"].get<bool>();
    std::cout << "saturate: n=" << n << " nmax=" << nmax << " all_exact=" << ok << "\n";
    return ok ? 0 : kExitFail;
}

int cmd_convergence(const RunConfig& cfg, const std::string& name) {
    Json resp = core_run(Json{{"op", "study"}, {"name", name}, {"alpha", cfg.alpha}});
    fs::path out = cfg.out_dir;
    std::vector<std::string> header;
    for (const auto& c : resp["columns"]) header.push_back(c.get<std::string>());
    std::vector<std::vector<double>> rows;
    for (const auto& r : resp["rows"]) rows.push_back(r.get<std::vector<double>>());
    write_csv(out / (name + ".csv"), header, rows);
    write_json_file(out / (name + "_summary.json"),
                    Json{{"name", name}, {"summary", resp["summary"]}, {"pass", resp["pass"]}});
    bool ok = resp["pass"].get<bool>();
    std::cout << "convergence " << name << ": pass=" << ok;
    for (const auto& [k, v] : resp["summary"].items())
        std::cout << " " << k << "=" << fmt17(v.get<double>());
    std::cout << "\n";
    return ok ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulator and control synthesis for a dispersive equation on the torus"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig cfg;
    bool alpha_set = false, K_set = false, out_set = false;
    double alpha_flag = 0;
    int K_flag = 0;
    std::string out_flag;
    app.add_option("--config", config_path, "flat-key JSON config file");
    app.add_option("--alpha", alpha_flag, "dispersion mix parameter")->each([&](auto) { alpha_set = true; });
    app.add_option("--K", K_flag, "mode cutoff")->each([&](auto) { K_set = true; });
    app.add_option("--out", out_flag, "output directory")->each([&](auto) { out_set = true; });

    auto* sim = app.add_subcommand("simulate", "evolve a state under a program file");
    std::string state_path, program_path;
    sim->add_option("--state", state_path)->required();
    sim->add_option("--program", program_path)->required();

    auto* sp = app.add_subcommand("synth-phase", "synthesize a phase target");
    std::string theta_path;
    double epsilon = 1e-2, time_budget = 0.1;
    sp->add_option("--theta", theta_path)->required();
    sp->add_option("--epsilon", epsilon);
    sp->add_option("--time-budget", time_budget);

    auto* st = app.add_subcommand("synth-transport", "synthesize a signed transport target");
    std::string target_path;
    st->add_option("--target", target_path)->required();

    auto* steer = app.add_subcommand("steer", "synthesize and run a steering word");
    std::string word_path, psi0_path;
    double steer_eps = 5e-2;
    steer->add_option("--word", word_path)->required();
    steer->add_option("--state", psi0_path)->required();
    steer->add_option("--epsilon", steer_eps);

    auto* sat = app.add_subcommand("saturate", "closure and certificate report");
    int n = 3, nmax = 16;
    sat->add_option("--n", n);
    sat->add_option("--nmax", nmax);

    auto* conv = app.add_subcommand("convergence", "named convergence study");
    std::string study_name;
    conv->add_option("name", study_name, "strang | satlimit | trotter | wtn | period")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        cfg = load_config(config_path);
        if (alpha_set) cfg.alpha = alpha_flag;
        if (K_set) cfg.K = K_flag;
        if (out_set) cfg.out_dir = out_flag;
        if (const char* env = std::getenv("KDVSCH_OUT")) cfg.out_dir = env;
        cfg.validate();
        fs::create_directories(cfg.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(cfg, state_path, program_path);
        if (sp->parsed()) return cmd_synth_phase(cfg, theta_path, epsilon, time_budget);
        if (st->parsed()) return cmd_synth_transport(cfg, target_path);
        if (steer->parsed()) return cmd_steer(cfg, word_path, psi0_path, steer_eps);
        if (sat->parsed()) return cmd_saturate(cfg, n, nmax);
        if (conv->parsed()) return cmd_convergence(cfg, study_name);
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitConfig;
}
