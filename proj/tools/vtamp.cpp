// vtamp — benchmark CLI: instance generation, phase-estimation demos,
// variable-time model verification, solving, and condition-number sweeps.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "vtamp/bench.hpp"
#include "vtamp/phase_estimation.hpp"
#include "vtamp/solver.hpp"
#include "vtamp/variable_time.hpp"
#include "vtamp/vtaa.hpp"

using namespace vtamp;

namespace {

UniqueEstMode mode_from_name(const std::string& name) {
    if (name == "faithful") return UniqueEstMode::faithful;
    if (name == "idealized") return UniqueEstMode::idealized;
    fail("unknown uniqueest mode: " + name);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot open output file " + path);
    out << text;
}

nlohmann::json validation_to_json(const ValidationReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"stage", c.stage},
                          {"outcome_decomposition_residual", c.outcome_decomposition_residual},
                          {"projection_residual", c.projection_residual},
                          {"frozen_residual", c.frozen_residual},
                          {"future_marker_mass", c.future_marker_mass}});
    return {{"passed", report.passed()},
            {"worst_residual", report.worst()},
            {"tolerance", report.tolerance},
            {"stages", std::move(checks)}};
}

nlohmann::json profile_to_json(const StoppingProfile& prof) {
    nlohmann::json j;
    j["p_succ"] = prof.p_succ;
    j["t_av"] = prof.t_av;
    j["t_max"] = prof.t_max;
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    j["t"] = vec(prof.t);
    j["p_stop_leq"] = vec(prof.p_stop_leq);
    j["p_stop_gt"] = vec(prof.p_stop_gt);
    j["p_succ_i"] = vec(prof.p_succ_i);
    return j;
}

nlohmann::json solve_to_json(const SolveResult& res, const std::string& method) {
    nlohmann::json j;
    j["method"] = method;
    j["fidelity"] = res.fidelity;
    j["acceptance_prob"] = res.acceptance_prob;
    j["success_prob"] = res.success_prob;
    j["ledger_total"] = res.ledger_total;
    j["estimate_overhead"] = res.est_overhead;
    j["output_cost"] = res.output_cost;
    j["accept_overhead"] = res.accept_overhead;
    j["accept_rounds"] = res.accept_rounds;
    j["clip_mass"] = res.clip_mass;
    j["failed"] = res.failed;
    if (!res.run.stages.empty()) {
        nlohmann::json levels = nlohmann::json::array();
        for (const auto& rec : res.run.stages)
            levels.push_back({{"level", rec.level},
                              {"r_prime", rec.r_prime},
                              {"p_est", rec.p_est},
                              {"rounds", rec.rounds},
                              {"r", rec.r},
                              {"t_norm", rec.t_norm},
                              {"cost", rec.cost},
                              {"est_charge", rec.est_charge},
                              {"promise_violated", rec.promise_violated}});
        j["levels"] = std::move(levels);
        j["final_rounds"] = res.run.final_rounds;
        j["final_good_prob"] = res.run.final_good_prob;
    }
    if (!res.bounds.rows.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : res.bounds.rows)
            rows.push_back({{"name", r.name},
                            {"observed", r.observed},
                            {"reference", r.reference},
                            {"pass", r.pass}});
        j["bounds"] = {{"delta_bad", res.bounds.delta_bad}, {"rows", std::move(rows)}};
    }
    return j;
}

int cmd_gen_instance(long n, double kappa, const std::string& spectrum, double cluster_base,
                     std::uint64_t seed, bool adversarial, const std::string& out) {
    SpectrumSpec spec{spectrum_kind_from_name(spectrum), kappa, cluster_base};
    ProblemInstance prob = gen_instance(n, spec, seed, adversarial);
    write_text(out, instance_to_json(prob.instance.matrix, kappa, prob.b).dump(2) + "\n");
    return 0;
}

int cmd_phase_demo(double lambda, int bits, double eps, const std::string& mode_name, long trials,
                   std::uint64_t seed) {
    Eigen::VectorXd p = single_run_distribution(lambda, bits);
    Eigen::VectorXd q;
    if (mode_name == "idealized") {
        q = idealized_majority_distribution(lambda, bits, eps);
    } else {
        long k_uniq = UniqueEstConfig::k_uniq_for(eps);
        q = majority_distribution(lambda, bits, k_uniq, trials, seed).q;
    }
    EstimateGrid grid{bits};
    std::cout << "x,p,q\n";
    for (long k = 0; k < grid.size(); ++k)
        std::cout << format_double(grid.value(k)) << "," << format_double(p[k]) << ","
                  << format_double(q[k]) << "\n";
    return 0;
}

int cmd_verify_model(const std::string& instance_path, double eps_final, double eps_stage,
                     const std::string& mode_name, std::uint64_t seed, const std::string& out) {
    ProblemInstance prob = read_instance_file(instance_path);
    SolverConfig cfg = SolverConfig::make(prob.instance.kappa, eps_final, seed,
                                          mode_from_name(mode_name), eps_stage);
    VariableTimeAlgorithm vta = vt_stategen(prob.instance, prob.b, cfg);
    nlohmann::json j;
    j["stages"] = cfg.m;
    j["per_stage_eps"] = cfg.eps;
    j["k_uniq"] = cfg.k_uniq();
    j["validation"] = validation_to_json(validate(vta));
    j["profile"] = profile_to_json(stopping_profile(vta));
    write_text(out, j.dump(2) + "\n");
    return 0;
}

int cmd_solve(const std::string& instance_path, double kappa_flag, double eps_final,
              double eps_stage, const std::string& method, std::uint64_t seed,
              const std::string& mode_name, const std::string& format, const std::string& out) {
    ProblemInstance prob = read_instance_file(instance_path);
    double kappa = kappa_flag > 0.0 ? kappa_flag : prob.instance.kappa;
    CostLedger ledger;
    SolveResult res;
    if (method == "vtaa") {
        SolverConfig cfg =
            SolverConfig::make(kappa, eps_final, seed, mode_from_name(mode_name), eps_stage);
        res = solve_vtaa(prob.instance, prob.b, cfg, ledger);
    } else if (method == "hhl") {
        res = solve_hhl(prob.instance, prob.b, kappa, eps_final, ledger);
    } else {
        fail("unknown method: " + method);
    }
    if (format == "json") {
        write_text(out, solve_to_json(res, method).dump(2) + "\n");
    } else {
        std::string text = "method,fidelity,ledger,accept_rate,p_succ,failed\n";
        text += method + "," + format_double(res.fidelity) + "," +
                format_double(res.ledger_total) + "," + format_double(res.acceptance_prob) + "," +
                format_double(res.success_prob) + "," + (res.failed ? "1" : "0") + "\n";
        write_text(out, text);
    }
    return 0;
}

int cmd_bench_scaling(const ScalingOptions& opt, const std::string& format,
                      const std::string& out) {
    std::vector<ScalingRow> rows = scaling_experiment(opt);
    if (format == "json")
        write_text(out, rows_to_json(rows).dump(2) + "\n");
    else
        write_text(out, rows_to_csv(rows));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variable-time amplitude amplification benchmark suite"};
    app.require_subcommand(1);

    // gen-instance
    long gi_n = 8;
    double gi_kappa = 16.0, gi_base = 0.0;
    std::string gi_spectrum = "log-uniform", gi_out = "-";
    std::uint64_t gi_seed = 1;
    bool gi_adversarial = false;
    auto* gi = app.add_subcommand("gen-instance", "generate a random instance file");
    gi->add_option("--n", gi_n, "matrix dimension");
    gi->add_option("--kappa", gi_kappa, "condition bound");
    gi->add_option("--spectrum", gi_spectrum, "log-uniform | bimodal | clustered");
    gi->add_option("--cluster-base", gi_base, "base a of a clustered spectrum [a, 2a]");
    gi->add_option("--seed", gi_seed, "random seed");
    gi->add_flag("--adversarial-b", gi_adversarial, "concentrate b on the bottom-half spectrum");
    gi->add_option("--out", gi_out, "output path (- for stdout)");

    // phase-demo
    double pd_lambda = 0.3, pd_eps = 0.1;
    int pd_bits = 5;
    std::string pd_mode = "faithful";
    long pd_trials = 10000;
    std::uint64_t pd_seed = 1;
    auto* pd = app.add_subcommand("phase-demo", "print single-run and majority distributions");
    pd->add_option("--lambda", pd_lambda, "eigenvalue in (0, 1]");
    pd->add_option("--bits", pd_bits, "estimate register bits");
    pd->add_option("--eps", pd_eps, "majority error target");
    pd->add_option("--mode", pd_mode, "faithful | idealized");
    pd->add_option("--trials", pd_trials, "Monte Carlo trials (faithful mode)");
    pd->add_option("--seed", pd_seed, "random seed");

    // verify-model
    std::string vm_instance, vm_mode = "idealized", vm_out = "-";
    double vm_eps_final = 0.2, vm_eps_stage = 0.0;
    std::uint64_t vm_seed = 1;
    auto* vm = app.add_subcommand("verify-model",
                                  "check the state-generation algorithm against the model");
    vm->add_option("--instance", vm_instance, "instance file")->required();
    vm->add_option("--eps-final", vm_eps_final, "target error");
    vm->add_option("--eps-stage", vm_eps_stage, "per-stage error override (default eps-final/80)");
    vm->add_option("--uniqueest", vm_mode, "faithful | idealized");
    vm->add_option("--seed", vm_seed, "random seed");
    vm->add_option("--out", vm_out, "output path (- for stdout)");

    // solve
    std::string sv_instance, sv_method = "vtaa", sv_mode = "idealized", sv_format = "json",
                sv_out = "-";
    double sv_kappa = 0.0, sv_eps_final = 0.2, sv_eps_stage = 0.0;
    std::uint64_t sv_seed = 1;
    auto* sv = app.add_subcommand("solve", "solve an instance file");
    sv->add_option("--instance", sv_instance, "instance file")->required();
    sv->add_option("--kappa", sv_kappa, "condition bound override");
    sv->add_option("--eps-final", sv_eps_final, "target error");
    sv->add_option("--eps-stage", sv_eps_stage, "per-stage error override (default eps-final/80)");
    sv->add_option("--method", sv_method, "vtaa | hhl");
    sv->add_option("--seed", sv_seed, "random seed");
    sv->add_option("--uniqueest", sv_mode, "faithful | idealized");
    sv->add_option("--format", sv_format, "json | csv");
    sv->add_option("--out", sv_out, "output path (- for stdout)");

    // bench-scaling
    ScalingOptions bs;
    std::string bs_spectrum = "bimodal", bs_format = "csv", bs_out = "-";
    auto* bs_cmd = app.add_subcommand("bench-scaling", "condition-number scaling sweep");
    bs_cmd->add_option("--methods", bs.methods, "methods to run (vtaa, hhl)");
    bs_cmd->add_option("--kappas", bs.kappas, "ascending condition bounds");
    bs_cmd->add_option("--n", bs.n, "matrix dimension");
    bs_cmd->add_option("--trials", bs.trials, "trials per cell");
    bs_cmd->add_option("--spectrum", bs_spectrum, "log-uniform | bimodal | clustered");
    bs_cmd->add_option("--eps-final", bs.eps_final, "target error");
    bs_cmd->add_option("--seed", bs.seed, "base seed");
    bs_cmd->add_option("--threads", bs.threads, "worker cap (VTAMP_THREADS also honored)");
    bs_cmd->add_option("--format", bs_format, "csv | json");
    bs_cmd->add_option("--out", bs_out, "output path (- for stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gi->parsed())
            return cmd_gen_instance(gi_n, gi_kappa, gi_spectrum, gi_base, gi_seed,
                                    gi_adversarial, gi_out);
        if (pd->parsed())
            return cmd_phase_demo(pd_lambda, pd_bits, pd_eps, pd_mode, pd_trials, pd_seed);
        if (vm->parsed())
            return cmd_verify_model(vm_instance, vm_eps_final, vm_eps_stage, vm_mode, vm_seed,
                                    vm_out);
        if (sv->parsed())
            return cmd_solve(sv_instance, sv_kappa, sv_eps_final, sv_eps_stage, sv_method,
                             sv_seed, sv_mode, sv_format, sv_out);
        if (bs_cmd->parsed()) {
            bs.spectrum = spectrum_kind_from_name(bs_spectrum);
            return cmd_bench_scaling(bs, bs_format, bs_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
