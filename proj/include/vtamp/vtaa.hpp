// vtaa.hpp — variable-time amplitude amplification.
//
// Stages are bucketed into dyadic levels t in (2^(i-1), 2^i]. Level algorithm
// B_i runs A_(i-1) and then the level's stages; A_i is B_i boosted so that its
// success-or-alive probability lands in [1/(9m), 1/m], which keeps nested
// amplification factors tight. The last algorithm is amplified to put squared
// amplitude at least 1/2 on the succeeded branch.
//
// Estimate calls are one-shot classical preprocessing: their expected query
// cost is charged to the ledger and reported separately from the cost of the
// output-producing run, so both totals are visible to the harness.

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "vtamp/amplitude.hpp"
#include "vtamp/common.hpp"
#include "vtamp/ledger.hpp"
#include "vtamp/state.hpp"
#include "vtamp/variable_time.hpp"

namespace vtamp {

struct VtaaParams {
    double c_est = 0.1;            // relative error for Estimate calls
    double p_floor = 1e-6;         // promise floor passed to Estimate
    double k_conf = 0.0;           // 0 -> log2(m) + 5
    EstimateMode est_mode = EstimateMode::oracle;
    double noise_scale = 0.9;      // oracle-mode noise amplitude (fraction of c_est)
    std::uint64_t seed = 0;

    double band_lo(long m) const { return 1.0 / (9.0 * static_cast<double>(m)); }
    double band_hi(long m) const { return 1.0 / static_cast<double>(m); }
};

struct VtaaStageRecord {
    long level = 0;
    double time_inc = 0.0;     // dyadic time increment of this level
    double r_prime = 0.0;      // true success-or-alive probability of B_i
    double p_est = 0.0;        // Estimate's (noisy) value for r_prime
    long rounds = 0;           // amplification rounds k_i
    bool amplified = false;
    bool promise_violated = false;
    double r = 0.0;            // true success-or-alive probability of A_i
    double t_norm = 0.0;       // normalized running time of A_i
    double cost = 0.0;         // ledger cost of one A_i invocation
    double est_charge = 0.0;
};

struct VtaaRun {
    std::vector<VtaaStageRecord> stages;
    long m_levels = 0;
    QuantumState final_state;
    double final_good_prob = 0.0;   // squared amplitude on outcome 1
    long final_rounds = 0;
    double p_final_est = 0.0;
    double est_overhead = 0.0;      // ledger units spent in Estimate calls
    double output_cost = 0.0;       // ledger units of the output-producing run(s)
    double output_time_norm = 0.0;  // same in normalized time units
    bool no_good = false;
};

inline BasisPredicate good_or_alive() { return on_outcome({1, 2}); }
inline BasisPredicate good_only() { return on_outcome({1}); }

// Algorithm B_i: run prev = A_(i-1), then the given stages on the parts where
// the outcome register is 2 (the stage unitaries act only there by the model's
// consistency requirements).
inline AmplifiableAlgorithm compose_B(const AmplifiableAlgorithm& prev,
                                      std::vector<const VtaStage*> level_stages,
                                      double time_inc) {
    auto base = std::make_shared<AmplifiableAlgorithm>(prev);
    auto stages = std::make_shared<std::vector<const VtaStage*>>(std::move(level_stages));
    AmplifiableAlgorithm out;
    out.good = prev.good;
    out.initial = prev.initial;
    out.cost = prev.cost;
    for (const VtaStage* st : *stages) out.cost += st->cost;
    out.time_norm = prev.time_norm + time_inc;
    out.apply = [base, stages](QuantumState& st, CostLedger& ledger, bool adjoint) {
        if (!adjoint) {
            if (base->apply) base->apply(st, ledger, false);
            for (const VtaStage* s : *stages) s->apply(st, ledger, false);
        } else {
            for (auto it = stages->rbegin(); it != stages->rend(); ++it)
                (*it)->apply(st, ledger, true);
            if (base->apply) base->apply(st, ledger, true);
        }
    };
    return out;
}

// Algorithm A_i: leave B_i alone when its estimated probability is already
// above 1/(9m); otherwise amplify with the smallest k whose squared gain puts
// (2k+1)^2 p inside [1/(9m), 1/m]. If the scan ever overshoots the band (it
// cannot for p <= 1/(9m), kept as a guard), fall back to the largest k whose
// gain stays below 1/m.
inline std::pair<AmplifiableAlgorithm, long> boost_A(const AmplifiableAlgorithm& B, double p,
                                                     long m, const VtaaParams& params) {
    double lo = params.band_lo(m), hi = params.band_hi(m);
    if (p > lo) return {B, 0};
    require(p > 0.0, "boost_A: vanished success probability");
    long k = 0;
    auto gain = [](long k) {
        double f = static_cast<double>(2 * k + 1);
        return f * f;
    };
    while (gain(k) * p < lo) ++k;
    if (gain(k) * p > hi) {
        while (k > 0 && gain(k) * p > hi) --k;
    }
    return {grover_amplify(B, k), k};
}

namespace detail {

// Worst predicted amplified probability over the estimate's uncertainty
// interval, sampled densely enough to catch a pi/2 crossing.
inline double worst_amplified(double theta_lo, double theta_hi, long k) {
    double worst = 1.0;
    for (int j = 0; j <= 8; ++j) {
        double theta = theta_lo + (theta_hi - theta_lo) * j / 8.0;
        double s = std::sin(static_cast<double>(2 * k + 1) * theta);
        worst = std::min(worst, s * s);
    }
    return worst;
}

}  // namespace detail

// Algorithm A': estimate each level, boost into the band, then amplify the
// final algorithm until the succeeded branch carries squared amplitude >= 1/2.
// The round count for the last amplification is chosen to maximize the worst
// case over the estimate's uncertainty; the simulator then verifies the
// resulting amplitude (the measurement a real run would perform) and retries
// neighboring round counts, charging every attempt, in the rare case the
// verification fails.
inline VtaaRun run_vtaa(const VariableTimeAlgorithm& vta, const VtaaParams& params,
                        CostLedger& ledger) {
    require(vta.stage_count() >= 1, "run_vtaa: no stages");
    long levels = 0;
    for (const auto& st : vta.stages) {
        require(st.t_stop >= 1.0, "run_vtaa: stopping times must be >= 1");
        levels = std::max(levels, static_cast<long>(std::ceil(std::log2(st.t_stop))));
    }
    long m = std::max<long>(1, levels);

    VtaaRun run;
    run.m_levels = m;
    QuantumState scratch(vta.layout);
    run.final_state = QuantumState(vta.layout);

    AmplifiableAlgorithm prev;   // empty prefix before time 1
    prev.good = good_or_alive();
    prev.initial = vta.initial;
    prev.cost = 0.0;
    prev.time_norm = 0.0;
    prev.apply = nullptr;

    EstimateOptions est_opts;
    est_opts.c = params.c_est;
    est_opts.p_floor = params.p_floor;
    est_opts.k_conf = params.k_conf > 0.0 ? params.k_conf
                                          : std::log2(static_cast<double>(m)) + 5.0;
    est_opts.mode = params.est_mode;
    est_opts.noise_scale = params.noise_scale;

    std::size_t next_stage = 0;
    for (long level = 0; level <= levels; ++level) {
        double t_level = std::pow(2.0, level);
        std::vector<const VtaStage*> in_level;
        while (next_stage < vta.stages.size() && vta.stages[next_stage].t_stop <= t_level + 1e-9)
            in_level.push_back(&vta.stages[next_stage++]);

        double time_inc = level == 0 ? 1.0 : std::pow(2.0, level - 1);
        AmplifiableAlgorithm B = compose_B(prev, std::move(in_level), time_inc);

        est_opts.seed = mix_seed(params.seed, static_cast<std::uint64_t>(level));
        EstimateResult est = amp_estimate(B, scratch, est_opts, ledger);
        run.est_overhead += est.charged;
        double r_prime = probability(scratch, B.good);   // simulator-side truth

        VtaaStageRecord rec;
        rec.level = level;
        rec.time_inc = time_inc;
        rec.r_prime = r_prime;
        rec.p_est = est.value;
        rec.est_charge = est.charged;
        rec.promise_violated = est.promise_violated;

        if (est.value <= 0.0) {
            run.stages.push_back(rec);
            run.no_good = true;
            run.final_state.clear();
            return run;
        }

        auto [A, k] = boost_A(B, est.value, m, params);
        rec.rounds = k;
        rec.amplified = k > 0;
        rec.r = amplified_probability(r_prime, k);
        rec.t_norm = A.time_norm;
        rec.cost = A.cost;
        run.stages.push_back(rec);
        prev = std::move(A);
    }

    // Final amplification of A_m with the succeeded branch as the target.
    AmplifiableAlgorithm final_alg = prev;
    final_alg.good = good_only();
    est_opts.seed = mix_seed(params.seed, 0xF1AA11);
    EstimateResult est = amp_estimate(final_alg, scratch, est_opts, ledger);
    run.est_overhead += est.charged;
    run.p_final_est = est.value;
    if (est.value <= 0.0) {
        run.no_good = true;
        run.final_state.clear();
        return run;
    }

    double c = params.c_est;
    double p_lo = std::max(1e-12, est.value * (1.0 - c));
    double p_hi = std::min(1.0, est.value * (1.0 + c));
    double theta_lo = std::asin(std::sqrt(p_lo));
    double theta_hi = std::asin(std::sqrt(p_hi));
    long k_cap = static_cast<long>(std::ceil(kPi / (4.0 * theta_lo))) + 2;
    long k_best = 0;
    double best = -1.0;
    for (long k = 0; k <= k_cap; ++k) {
        double w = detail::worst_amplified(theta_lo, theta_hi, k);
        if (w > best) {
            best = w;
            k_best = k;
        }
    }

    // Try the chosen round count first, then neighbors; every attempted run is
    // charged. Some round count must succeed since max_k sin^2((2k+1) theta)
    // >= max(p, 1-p) >= 1/2.
    std::vector<long> order;
    order.push_back(k_best);
    for (long d = 1; d <= k_cap + 1; ++d) {
        if (k_best + d <= k_cap + 2) order.push_back(k_best + d);
        if (k_best - d >= 0) order.push_back(k_best - d);
    }
    for (long k : order) {
        AmplifiableAlgorithm attempt = grover_amplify(final_alg, k);
        attempt.run(run.final_state, ledger);
        run.output_cost += attempt.cost;
        run.output_time_norm += attempt.time_norm;
        run.final_rounds = k;
        run.final_good_prob = probability(run.final_state, final_alg.good);
        if (run.final_good_prob >= 0.5) break;
    }
    return run;
}

}  // namespace vtamp
