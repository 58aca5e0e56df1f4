// bench.hpp — instance generation with prescribed spectra, condition-number
// scaling experiments over both solvers, slope fitting, and CSV/JSON rows.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vtamp/common.hpp"
#include "vtamp/instance.hpp"
#include "vtamp/solver.hpp"

namespace vtamp {

// ----------------------------- spectrum shapes ------------------------------

enum class SpectrumKind { log_uniform, bimodal, clustered };

struct SpectrumSpec {
    SpectrumKind kind = SpectrumKind::log_uniform;
    double kappa = 2.0;
    double cluster_base = 0.0;   // clustered spectra live in [a, 2a]; 0 -> a = 1/kappa

    double base() const { return cluster_base > 0.0 ? cluster_base : 1.0 / kappa; }
};

inline SpectrumKind spectrum_kind_from_name(const std::string& name) {
    if (name == "log-uniform") return SpectrumKind::log_uniform;
    if (name == "bimodal") return SpectrumKind::bimodal;
    if (name == "clustered") return SpectrumKind::clustered;
    fail("unknown spectrum kind: " + name);
}

// Random instance with the prescribed spectrum: A = V diag(lambda) V* for a
// seeded random orthonormal basis V (QR of complex Gaussians), together with
// a seeded random unit right-hand side. The adversarial flag concentrates b
// on the eigenvectors in the bottom half of the spectrum.
inline ProblemInstance gen_instance(long n, const SpectrumSpec& spec, std::uint64_t seed,
                                    bool adversarial_b = false) {
    require(n >= 2, "gen_instance: need n >= 2");
    require(spec.kappa >= 1.0, "gen_instance: kappa must be >= 1");
    auto rng = make_rng(seed, 0xB2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::VectorXd lambdas(n);
    switch (spec.kind) {
        case SpectrumKind::log_uniform: {
            double lo = std::log(1.0 / spec.kappa);
            for (long i = 0; i < n; ++i) lambdas[i] = std::exp(lo + unif(rng) * (0.0 - lo));
            break;
        }
        case SpectrumKind::bimodal: {
            // Half the eigenvalues in [1/kappa, 2/kappa], half in [1/2, 1].
            double cap = std::min(2.0 / spec.kappa, 1.0);
            for (long i = 0; i < n; ++i) {
                if (i < n / 2)
                    lambdas[i] = 1.0 / spec.kappa + unif(rng) * (cap - 1.0 / spec.kappa);
                else
                    lambdas[i] = 0.5 + unif(rng) * 0.5;
            }
            break;
        }
        case SpectrumKind::clustered: {
            double a = spec.base();
            double lo = std::max(a, 1.0 / spec.kappa);
            double hi = std::min(2.0 * a, 1.0);
            require(lo < hi, "gen_instance: clustered window is empty");
            for (long i = 0; i < n; ++i) lambdas[i] = lo + unif(rng) * (hi - lo);
            break;
        }
    }
    std::sort(lambdas.data(), lambdas.data() + n);

    Eigen::MatrixXcd g(n, n);
    for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c) g(r, c) = Complex(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd v = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);

    Eigen::MatrixXcd a = v * lambdas.asDiagonal() * v.adjoint();
    a = Complex(0.5, 0.0) * (a + a.adjoint().eval());   // scrub float asymmetry

    Eigen::VectorXcd b(n);
    for (long r = 0; r < n; ++r) b[r] = Complex(gauss(rng), gauss(rng));
    if (adversarial_b) {
        // Weight the expansion toward the small-eigenvalue half.
        Eigen::VectorXcd coeff = v.adjoint() * b;
        for (long i = n / 2; i < n; ++i) coeff[i] *= 0.05;
        b = v * coeff;
    }
    b /= b.norm();

    return ProblemInstance{eigendecompose(a, spec.kappa), std::move(b)};
}

// ------------------------------ scaling sweep -------------------------------

struct ScalingRow {
    std::string method;
    double kappa = 0.0;
    long n = 0;
    std::uint64_t seed = 0;
    double cost = 0.0;
    double fidelity = 0.0;
    double accept_rate = 0.0;
    double t_av = 0.0;
    double p_succ = 0.0;
    bool failed = false;
};

struct ScalingOptions {
    std::vector<std::string> methods{"vtaa", "hhl"};
    std::vector<double> kappas{4, 8, 16, 32, 64};
    long n = 8;
    long trials = 5;
    SpectrumKind spectrum = SpectrumKind::bimodal;
    double eps_final = 0.2;
    std::uint64_t seed = 1;
    int threads = 0;   // 0 -> VTAMP_THREADS or hardware count
};

inline ScalingRow run_scaling_cell(const std::string& method, double kappa, long n,
                                   SpectrumKind kind, double eps_final, std::uint64_t seed) {
    ScalingRow row;
    row.method = method;
    row.kappa = kappa;
    row.n = n;
    row.seed = seed;
    try {
        SpectrumSpec spec{kind, kappa};
        ProblemInstance prob = gen_instance(n, spec, seed);
        CostLedger ledger;
        if (method == "vtaa") {
            SolverConfig cfg = SolverConfig::make(kappa, eps_final, seed);
            SolveResult res = solve_vtaa(prob.instance, prob.b, cfg, ledger, false);
            row.cost = res.ledger_total;
            row.fidelity = res.fidelity;
            row.accept_rate = res.acceptance_prob;
            row.p_succ = res.success_prob;
            VariableTimeAlgorithm vta = vt_stategen(prob.instance, prob.b, cfg);
            row.t_av = stopping_profile(vta).t_av;
            row.failed = res.failed;
        } else if (method == "hhl") {
            SolveResult res = solve_hhl(prob.instance, prob.b, kappa, eps_final, ledger);
            row.cost = res.ledger_total;
            row.fidelity = res.fidelity;
            row.accept_rate = res.success_prob;
            row.p_succ = res.success_prob;
            row.t_av = 0.0;
            row.failed = res.failed;
        } else {
            fail("unknown method: " + method);
        }
    } catch (const std::exception&) {
        row.failed = true;
    }
    return row;
}

inline int worker_count(int requested, std::size_t jobs) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("VTAMP_THREADS")) n = std::atoi(env);
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Rows for every (method, kappa, trial), deterministic for a given seed: each
// row derives its own seed, rows are computed in parallel into fixed slots,
// and the output order never depends on scheduling.
inline std::vector<ScalingRow> scaling_experiment(const ScalingOptions& opt) {
    require(opt.kappas.size() >= 1, "scaling_experiment: empty kappa list");
    for (std::size_t i = 1; i < opt.kappas.size(); ++i)
        require(opt.kappas[i] > opt.kappas[i - 1], "scaling_experiment: kappas must ascend");

    struct Job {
        std::string method;
        double kappa;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& method : opt.methods)
        for (double kappa : opt.kappas)
            for (long trial = 0; trial < opt.trials; ++trial) {
                std::uint64_t row_seed =
                    mix_seed(opt.seed, mix_seed(static_cast<std::uint64_t>(kappa * 1024),
                                                static_cast<std::uint64_t>(trial)));
                jobs.push_back({method, kappa, row_seed});
            }

    std::vector<ScalingRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) return;
            const Job& job = jobs[idx];
            rows[idx] = run_scaling_cell(job.method, job.kappa, opt.n, opt.spectrum,
                                         opt.eps_final, job.seed);
        }
    };
    int workers = worker_count(opt.threads, jobs.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

// -------------------------------- slope fit ---------------------------------

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;   // rms residual of the log-log fit
};

// Least-squares slope of log(median cost) against log(kappa).
inline SlopeFit fit_slope(const std::vector<ScalingRow>& rows) {
    std::map<double, std::vector<double>> by_kappa;
    for (const auto& r : rows)
        if (!r.failed) by_kappa[r.kappa].push_back(r.cost);
    require(by_kappa.size() >= 2, "fit_slope: need at least two distinct kappa values");

    std::vector<double> xs, ys;
    for (auto& [kappa, costs] : by_kappa) {
        std::sort(costs.begin(), costs.end());
        double median = costs[costs.size() / 2];
        require(median > 0.0, "fit_slope: nonpositive cost");
        xs.push_back(std::log(kappa));
        ys.push_back(std::log(median));
    }
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    SlopeFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        rss += e * e;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

// --------------------------------- output -----------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string rows_to_csv(const std::vector<ScalingRow>& rows) {
    std::string out = "method,kappa,n,seed,cost,fidelity,accept_rate,t_av,p_succ\n";
    for (const auto& r : rows) {
        out += r.method + "," + format_double(r.kappa) + "," + std::to_string(r.n) + "," +
               std::to_string(r.seed) + "," + format_double(r.cost) + "," +
               format_double(r.fidelity) + "," + format_double(r.accept_rate) + "," +
               format_double(r.t_av) + "," + format_double(r.p_succ);
        if (r.failed) out += ",failed";
        out += "\n";
    }
    return out;
}

inline nlohmann::json rows_to_json(const std::vector<ScalingRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"method", r.method},
                       {"kappa", r.kappa},
                       {"n", r.n},
                       {"seed", r.seed},
                       {"cost", r.cost},
                       {"fidelity", r.fidelity},
                       {"accept_rate", r.accept_rate},
                       {"t_av", r.t_av},
                       {"p_succ", r.p_succ},
                       {"failed", r.failed}});
    return arr;
}

}  // namespace vtamp
