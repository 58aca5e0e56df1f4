// Acceptance suite: end-to-end checks of the library's contracts, one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "vtamp/bench.hpp"
#include "vtamp/phase_estimation.hpp"
#include "vtamp/solver.hpp"
#include "vtamp/variable_time.hpp"
#include "vtamp/vtaa.hpp"

using namespace vtamp;

namespace {

struct Criterion {
    std::string name;
    long checks = 0;
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok) failures.push_back(what);
    }
    bool passed() const { return failures.empty(); }
};

std::vector<Criterion> g_results;

void run_criterion(const std::string& name, const std::function<void(Criterion&)>& body) {
    Criterion crit;
    crit.name = name;
    auto start = std::chrono::steady_clock::now();
    try {
        body(crit);
    } catch (const std::exception& e) {
        crit.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s  (%ld checks, %.1fs)\n", crit.passed() ? "PASS" : "FAIL",
                crit.name.c_str(), crit.checks, secs);
    for (std::size_t i = 0; i < crit.failures.size() && i < 5; ++i)
        std::printf("        %s\n", crit.failures[i].c_str());
    if (crit.failures.size() > 5)
        std::printf("        ... and %zu more\n", crit.failures.size() - 5);
    std::fflush(stdout);
    g_results.push_back(std::move(crit));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Frozen after one calibration pass over the synthetic suite below: the
// observed ratio of output-run cost to the dyadic bound form ranged over
// [0.24, 0.50]; 0.75 leaves a 1.5x margin on the worst case.
constexpr double kOutputCostCalibration = 0.75;

// Synthetic early-heavy profiles with T_max/T_av >= 8 and small success.
ProfileSpec synthetic_profile(std::uint64_t seed) {
    auto rng = make_rng(seed, 0x5EED);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    long m = 6 + static_cast<long>(seed % 3);
    double tail = 0.004 + 0.003 * unif(rng);
    double succ_early = 0.002 + 0.002 * unif(rng);
    double succ_tail = tail * (0.05 + 0.20 * unif(rng));
    ProfileSpec spec;
    for (long i = 1; i <= m; ++i) {
        spec.t.push_back(std::pow(2.0, i));
        if (i == 1) {
            spec.p_stop.push_back(1.0 - tail);
            spec.p_succ.push_back(succ_early);
        } else if (i == m) {
            spec.p_stop.push_back(tail);
            spec.p_succ.push_back(succ_early + succ_tail);
        } else {
            spec.p_stop.push_back(0.0);
            spec.p_succ.push_back(succ_early);
        }
    }
    return spec;
}

double dyadic_bound_form(const StoppingProfile& prof) {
    double log_t = std::log2(prof.t_max);
    return prof.t_max * std::sqrt(log_t) +
           prof.t_av / std::sqrt(prof.p_succ) * std::pow(log_t, 1.5);
}

double plain_amplification_cost(const StoppingProfile& prof) {
    double theta = std::asin(std::sqrt(prof.p_succ));
    long best_k = 0;
    double best = -1.0;
    long cap = static_cast<long>(std::ceil(kPi / (4.0 * theta))) + 2;
    for (long k = 0; k <= cap; ++k) {
        double s = std::sin((2.0 * k + 1.0) * theta);
        if (s * s > best) {
            best = s * s;
            best_k = k;
        }
    }
    return prof.t_max * (2.0 * best_k + 1.0);
}

// Shared between criteria 5, 6 and 8: solve each cell instance once and keep
// only the scalar outcomes (the solve results hold full state vectors).
struct SolvedInstance {
    long n;
    double kappa;
    std::uint64_t seed;
    bool vtaa_failed = true, hhl_failed = true;
    double vtaa_fidelity = 0.0, hhl_fidelity = 0.0;
    bool branch_budget_ok = false;
    bool reference_budget_ok = false;
    bool sandwich_ok = false;
    bool model_ok = false;
};

std::vector<SolvedInstance> g_solved;

void solve_criterion5_cells() {
    if (!g_solved.empty()) return;
    for (long n : {2L, 4L, 8L}) {
        for (double kappa : {4.0, 16.0}) {
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                SolvedInstance cell;
                cell.n = n;
                cell.kappa = kappa;
                cell.seed = seed;
                std::uint64_t inst_seed = mix_seed(seed, static_cast<std::uint64_t>(n * 64 + kappa));
                ProblemInstance prob =
                    gen_instance(n, SpectrumSpec{SpectrumKind::log_uniform, kappa}, inst_seed);
                SolverConfig cfg = SolverConfig::make(kappa, 0.2, seed);
                {
                    CostLedger ledger;
                    SolveResult res = solve_vtaa(prob.instance, prob.b, cfg, ledger, true);
                    cell.vtaa_failed = res.failed;
                    cell.vtaa_fidelity = res.fidelity;
                    cell.branch_budget_ok = !res.bounds.rows.empty() && res.bounds.rows[0].pass;
                }
                {
                    CostLedger ledger;
                    SolveResult res = solve_hhl(prob.instance, prob.b, kappa, 0.2, ledger);
                    cell.hhl_failed = res.failed;
                    cell.hhl_fidelity = res.fidelity;
                }

                IdealStates ideal = ideal_states(prob.instance, prob.b, cfg);
                double lhs = distance(ideal.psi_prime, ideal.psi_ideal);
                double rhs = 2.0 * cfg.eps / (1.0 - 2.0 * cfg.eps) *
                             std::sqrt(ideal.psi_ideal.norm_sq());
                cell.reference_budget_ok = lhs <= rhs + 1e-12;

                Eigen::VectorXcd coeff = prob.instance.basis.adjoint() * prob.b;
                EigenClassification cls = classify(prob.instance, coeff, cfg);
                cell.sandwich_ok = true;
                for (const auto& rec : cls.per_eigenvector) {
                    double lo = 1.0 / (cfg.eps * std::pow(2.0, rec.j_stop + 1));
                    double hi = (1.0 / cfg.eps + 1.5) * std::pow(2.0, -rec.j_stop);
                    if (rec.lambda_tilde < lo - 1e-12 || rec.lambda_tilde > hi + 1e-12)
                        cell.sandwich_ok = false;
                }

                VariableTimeAlgorithm vta = vt_stategen(prob.instance, prob.b, cfg);
                ValidationReport report = validate(vta);
                cell.model_ok = report.passed();

                g_solved.push_back(cell);
            }
        }
    }
}

}  // namespace

// --------------------------------------------------------------------------

static void criterion1(Criterion& crit) {
    // Simulated estimation circuit vs the closed outcome law, 100 eigenvalues
    // per register size, within 1e-10.
    auto rng = make_rng(20240601);
    std::uniform_real_distribution<double> unif(1e-3, 1.0);
    for (int n = 4; n <= 8; ++n) {
        for (int rep = 0; rep < 100; ++rep) {
            double lambda = unif(rng);
            Eigen::VectorXd formula = single_run_distribution(lambda, n);
            Eigen::VectorXd circuit = testing::qpe_circuit_distribution(lambda, n);
            double diff = (formula - circuit).cwiseAbs().maxCoeff();
            crit.expect(diff < 1e-10, "n=" + std::to_string(n) + " lambda=" + fmt(lambda) +
                                          " diff=" + fmt(diff));
        }
    }
}

static void criterion2(Criterion& crit) {
    // Tight amplification bound and the exact sine law on a 50-point grid.
    RegisterLayout lay{1, 3, 2, 0};
    for (double eps : {0.05, 0.1, 0.25}) {
        long m = max_rounds(eps);
        for (int g = 1; g <= 50; ++g) {
            double delta = eps * g / 50.0;
            AmplifiableAlgorithm alg;
            alg.good = on_outcome({1});
            alg.cost = 1.0;
            alg.initial = std::make_shared<QuantumState>(QuantumState::basis(lay, 0, 0, 1, 0));
            double c1 = std::sqrt(delta), c0 = std::sqrt(1.0 - delta);
            alg.apply = [c1, c0](QuantumState& st, CostLedger&, bool adjoint) {
                Complex a = st.at(0, 0, 1, 0), b = st.at(0, 1, 1, 0);
                if (!adjoint) {
                    st.at(0, 0, 1, 0) = c0 * a - c1 * b;
                    st.at(0, 1, 1, 0) = c1 * a + c0 * b;
                } else {
                    st.at(0, 0, 1, 0) = c0 * a + c1 * b;
                    st.at(0, 1, 1, 0) = -c1 * a + c0 * b;
                }
                st.touch(0, 1, 1);
                st.touch(1, 1, 1);
            };
            QuantumState out(lay);
            CostLedger ledger;
            grover_amplify(alg, m).run(out, ledger);
            double observed = probability(out, alg.good);
            double exact = amplified_probability(delta, m);
            crit.expect(std::abs(observed - exact) < 1e-9,
                        "sine law: eps=" + fmt(eps) + " delta=" + fmt(delta));
            crit.expect(observed >= amplification_bound(delta, m) - 1e-12,
                        "bound: eps=" + fmt(eps) + " delta=" + fmt(delta));
        }
    }
}

static void criterion3(Criterion& crit) {
    // Majority-vote estimation cases at eps = 0.2, n = 5, 1e4 trials.
    double eps = 0.2;
    int n = 5;
    long k_uniq = static_cast<long>(std::ceil(3.0 / (eps * eps) * std::log(1.0 / eps)));
    crit.expect(k_uniq == 121, "k_uniq formula");
    EstimateGrid grid{n};
    double half = grid.spacing() / 2.0;
    long trials = 10000;

    for (double frac : {0.0, 0.4, 0.8, 1.0}) {
        double lambda = grid.value(9) + frac * (1.0 - eps) * half;
        MajorityDistribution m = majority_distribution(lambda, n, k_uniq, trials, 1009);
        double rate = m.q[9];
        crit.expect(rate >= 1.0 - eps - 3.0 * m.std_error[9],
                    "unique case frac=" + fmt(frac) + " rate=" + fmt(rate));
    }
    for (double frac : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        double lambda = grid.value(9) + half + frac * eps * half;
        MajorityDistribution m = majority_distribution(lambda, n, k_uniq, trials, 1013);
        double rate = m.q[9] + m.q[10];
        double se = std::sqrt(m.std_error[9] * m.std_error[9] +
                              m.std_error[10] * m.std_error[10]);
        crit.expect(rate >= 1.0 - eps - 3.0 * se,
                    "band case frac=" + fmt(frac) + " rate=" + fmt(rate));
    }
}

static void criterion4(Criterion& crit) {
    // Variable-time amplification on 20 synthetic algorithms: success >= 1/2
    // on every run, cheaper than plain amplification on at least 18, and the
    // output-run cost within the frozen constant of the dyadic bound form.
    long wins = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ProfileSpec spec = synthetic_profile(seed);
        VariableTimeAlgorithm vta = synth_vta(spec, seed);
        StoppingProfile prof = stopping_profile(vta);
        crit.expect(prof.t_max / prof.t_av >= 8.0, "suite precondition: ratio, seed " +
                                                        std::to_string(seed));
        crit.expect(prof.p_succ <= 0.05,
                    "suite precondition: p_succ, seed " + std::to_string(seed));

        VtaaParams params;
        params.p_floor = prof.p_succ / 2.0;
        params.seed = seed;
        CostLedger ledger;
        VtaaRun run = run_vtaa(vta, params, ledger);
        crit.expect(!run.no_good && run.final_good_prob >= 0.5,
                    "final amplitude, seed " + std::to_string(seed) + ": " +
                        fmt(run.final_good_prob));
        if (run.output_cost < plain_amplification_cost(prof)) ++wins;

        double bound = kOutputCostCalibration * dyadic_bound_form(prof);
        crit.expect(run.output_cost <= bound,
                    "cost bound, seed " + std::to_string(seed) + ": " +
                        fmt(run.output_cost) + " vs " + fmt(bound));
    }
    crit.expect(wins >= 18, "wins vs plain amplification: " + std::to_string(wins) + "/20");
}

static void criterion5(Criterion& crit) {
    // Fidelity against the dense classical solve for both solvers across the
    // (n, kappa) grid, 20 seeded instances per cell.
    solve_criterion5_cells();
    for (const auto& cell : g_solved) {
        std::string tag = "n=" + std::to_string(cell.n) + " kappa=" + fmt(cell.kappa) +
                          " seed=" + std::to_string(cell.seed);
        crit.expect(!cell.vtaa_failed && cell.vtaa_fidelity >= 0.8,
                    "vtaa " + tag + " fidelity=" + fmt(cell.vtaa_fidelity));
        crit.expect(!cell.hhl_failed && cell.hhl_fidelity >= 0.8,
                    "hhl " + tag + " fidelity=" + fmt(cell.hhl_fidelity));
    }
}

static void criterion6(Criterion& crit) {
    // Error-budget inequalities on every criterion-5 solve; zero violations.
    solve_criterion5_cells();
    for (const auto& cell : g_solved) {
        std::string tag = "n=" + std::to_string(cell.n) + " kappa=" + fmt(cell.kappa) +
                          " seed=" + std::to_string(cell.seed);
        crit.expect(cell.branch_budget_ok, "branch-quality budget " + tag);
        crit.expect(cell.reference_budget_ok, "reference-state budget " + tag);
        crit.expect(cell.sandwich_ok, "estimate sandwich " + tag);
    }
}

static void criterion7(Criterion& crit) {
    // Condition-number scaling: bimodal spectra separate the two solvers;
    // clustered spectra make the baseline linear.
    ScalingOptions opt;
    opt.methods = {"vtaa", "hhl"};
    opt.kappas = {4, 8, 16, 32, 64};
    opt.n = 8;
    opt.trials = 5;
    opt.spectrum = SpectrumKind::bimodal;
    opt.seed = 41;
    opt.threads = 1;
    std::vector<ScalingRow> rows = scaling_experiment(opt);
    for (const auto& r : rows)
        crit.expect(!r.failed, r.method + " run failed at kappa " + fmt(r.kappa));

    std::vector<ScalingRow> vt_rows, hhl_rows;
    for (const auto& r : rows)
        (r.method == "vtaa" ? vt_rows : hhl_rows).push_back(r);
    double vt_slope = fit_slope(vt_rows).slope;
    double hhl_slope = fit_slope(hhl_rows).slope;
    crit.expect(vt_slope <= 1.4, "vtaa bimodal slope " + fmt(vt_slope));
    crit.expect(hhl_slope >= 1.7, "hhl bimodal slope " + fmt(hhl_slope));

    ScalingOptions clustered = opt;
    clustered.methods = {"hhl"};
    clustered.spectrum = SpectrumKind::clustered;
    clustered.seed = 43;
    double cl_slope = fit_slope(scaling_experiment(clustered)).slope;
    crit.expect(cl_slope <= 1.3, "hhl clustered slope " + fmt(cl_slope));
}

static void criterion8(Criterion& crit) {
    // Model conformance of the generated algorithms plus a fault-injection
    // suite with no false negatives.
    solve_criterion5_cells();
    for (const auto& cell : g_solved)
        crit.expect(cell.model_ok, "model conformance n=" + std::to_string(cell.n) +
                                       " kappa=" + fmt(cell.kappa) + " seed=" +
                                       std::to_string(cell.seed));

    // Fault suite: ten distinct corruptions, each must be flagged.
    for (int fault = 0; fault < 10; ++fault) {
        ProfileSpec spec;
        spec.t = {2, 4, 8};
        spec.p_stop = {0.4, 0.3, 0.3};
        spec.p_succ = {0.1, 0.2, 0.4};
        VariableTimeAlgorithm vta = synth_vta(spec, 100 + fault);
        int stage = fault % 2 == 0 ? 1 : 2;
        auto original = vta.stages[stage].apply;
        int kind = fault / 2;
        vta.stages[stage].apply = [original, kind, stage](QuantumState& st, CostLedger& ledger,
                                                          bool adjoint) {
            original(st, ledger, adjoint);
            switch (kind) {
                case 0:   // freeze violation: phase on an earlier stage's marker
                    st.at(0, 1, 2, 0) *= std::polar(1.0, 0.4);
                    break;
                case 1: {   // nesting violation: leak into a later marker
                    Complex a = st.at(0, 0, 2 * stage, 0);
                    st.at(0, 0, 2 * stage, 0) = a * std::sqrt(0.5);
                    st.at(0, 0, 2 * stage + 4, 0) += a * std::sqrt(0.5);
                    st.touch(0, 2 * stage + 4, 1);
                    break;
                }
                case 2: {   // outcome decomposition: stopped outcome on the live marker
                    Complex a = st.at(0, 0, 2 * stage, 0);
                    st.at(0, 0, 2 * stage, 0) = a * std::sqrt(0.5);
                    st.at(0, 0, 1, 0) += a * std::sqrt(0.5);
                    break;
                }
                case 3:   // norm violation on the stopped part
                    st.at(0, 1, 2, 0) *= 1.1;
                    break;
                case 4: {   // running part parked inside the stopped subspace
                    Complex a = st.at(0, 0, 2 * stage, 0);
                    st.at(0, 0, 2 * stage, 0) = a * std::sqrt(0.5);
                    st.at(0, 2, 2 * stage, 0) += a * std::sqrt(0.5);
                    break;
                }
            }
        };
        ValidationReport report = validate(vta);
        crit.expect(!report.passed(), "fault " + std::to_string(fault) + " undetected");
    }
}

int main() {
    run_criterion("criterion 1: estimation circuit matches the outcome law", criterion1);
    run_criterion("criterion 2: tight amplification bound and sine law", criterion2);
    run_criterion("criterion 3: majority-vote estimation cases", criterion3);
    run_criterion("criterion 4: variable-time amplification cost and success", criterion4);
    run_criterion("criterion 5: solver fidelity against the dense solve", criterion5);
    run_criterion("criterion 6: error-budget inequalities", criterion6);
    run_criterion("criterion 7: condition-number scaling contrast", criterion7);
    run_criterion("criterion 8: model conformance and fault detection", criterion8);

    bool all = true;
    for (const auto& crit : g_results) all = all && crit.passed();
    std::printf("%s\n", all ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
    return all ? 0 : 1;
}
