// variable_time.hpp — the formal model of algorithms whose branches stop at
// different times: stage unitaries, nested stopped subspaces, consistency
// validation, and stopping statistics.
//
// Marker convention (used by every variable-time algorithm in this library):
// the S register holds 1 on still-running branches; a branch stopping during
// stage i moves to marker 2i (regular stop) or 2i+1 (consistency-check
// failure). The stage-i stopped subspace H_i is spanned by markers 2..2i+1
// in the non-outcome factor, so H_1 <= H_2 <= ... holds structurally and the
// outcome register carries 0 (stopped, failed), 1 (stopped, succeeded) or
// 2 (still running).

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "vtamp/common.hpp"
#include "vtamp/ledger.hpp"
#include "vtamp/state.hpp"

namespace vtamp {

struct VtaStage {
    double t_stop = 0.0;   // stopping time of this stage
    double cost = 0.0;     // ledger units charged by one application
    std::function<void(QuantumState&, CostLedger&, bool adjoint)> apply;
};

struct VariableTimeAlgorithm {
    RegisterLayout layout;
    std::shared_ptr<const QuantumState> initial;
    std::vector<VtaStage> stages;   // ascending t_stop; stage index i is 1-based

    long stage_count() const noexcept { return static_cast<long>(stages.size()); }
    double t_max() const { return stages.empty() ? 0.0 : stages.back().t_stop; }

    // H_i membership of an (o, s) basis pair: stopped by stage i.
    static bool in_stopped_subspace(long s, long i) noexcept { return s >= 2 && s <= 2 * i + 1; }
};

inline BasisPredicate stopped_by(long i) {
    return BasisPredicate{[i](int, long s, long) {
                              return VariableTimeAlgorithm::in_stopped_subspace(s, i);
                          },
                          true};
}

// ------------------------------- validation --------------------------------

struct StageCheck {
    long stage = 0;
    double outcome_decomposition_residual = 0.0;   // requirement 2
    double projection_residual = 0.0;              // requirement 3
    double frozen_residual = 0.0;                  // stages act as identity on stopped parts
    double future_marker_mass = 0.0;               // nesting: no marker may appear early
};

struct ValidationReport {
    std::vector<StageCheck> checks;
    double tolerance = tol::state_eq;

    double worst() const {
        double w = 0.0;
        for (const auto& c : checks)
            w = std::max({w, c.outcome_decomposition_residual, c.projection_residual,
                          c.frozen_residual, c.future_marker_mass});
        return w;
    }
    bool passed() const { return worst() <= tolerance; }
};

// Checks the model's consistency requirements by running the stages and
// inspecting the boundary states: stopped outcomes must live inside H_i,
// running parts outside it, previously stopped components must be left
// untouched (verified both on the actual trajectory and on random probes),
// and no stage may populate a later stage's markers.
inline ValidationReport validate(const VariableTimeAlgorithm& vta, std::uint64_t probe_seed = 17) {
    ValidationReport report;
    long M = vta.stage_count();
    QuantumState cur(vta.layout);
    cur.assign(*vta.initial);
    CostLedger scratch_ledger;

    QuantumState prev(vta.layout);
    auto rng = make_rng(probe_seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    for (long i = 1; i <= M; ++i) {
        StageCheck check;
        check.stage = i;

        // Frozen probe: random state on H_{i-1} with outcomes 0/1 must pass
        // through stage i unchanged.
        if (i > 1) {
            QuantumState probe(vta.layout);
            long e_span = std::min<long>(vta.layout.estimate_dim(), 4);
            for (long blk = 0; blk < vta.layout.input_dim; ++blk)
                for (int o = 0; o <= 1; ++o)
                    for (long s = 2; s <= 2 * (i - 1) + 1 && s < vta.layout.step_dim; ++s)
                        for (long e = 0; e < e_span; ++e) {
                            probe.at(blk, o, s, e) = Complex(unif(rng), unif(rng));
                            probe.touch(o, s, e + 1);
                        }
            double n2 = probe.norm_sq();
            if (n2 > 0) {
                probe.scale(1.0 / std::sqrt(n2));
                QuantumState before(vta.layout);
                before.assign(probe);
                vta.stages[i - 1].apply(probe, scratch_ledger, false);
                check.frozen_residual = distance(probe, before);
            }
        }

        prev.clear();
        prev.assign(cur);
        vta.stages[i - 1].apply(cur, scratch_ledger, false);

        // Requirement 2: outcome 0/1 inside H_i, outcome 2 orthogonal to it.
        double bad_mass = 0.0;
        cur.for_each_slice([&](long blk, int o, long s, long ext) {
            bool stopped_marker = VariableTimeAlgorithm::in_stopped_subspace(s, i);
            if ((o <= 1 && !stopped_marker) || (o == 2 && stopped_marker))
                bad_mass += cur.slice(blk, o, s).head(ext).squaredNorm();
        });
        check.outcome_decomposition_residual = std::sqrt(bad_mass);

        // Nesting: no marker of a later stage may be populated yet.
        double future = 0.0;
        cur.for_each_slice([&](long blk, int o, long s, long ext) {
            if (s > 2 * i + 1) future += cur.slice(blk, o, s).head(ext).squaredNorm();
        });
        check.future_marker_mass = std::sqrt(future);

        // Requirement 3: the part stopped by stage i-1 must be unchanged.
        if (i > 1) {
            double diff = 0.0;
            cur.for_each_slice([&](long blk, int o, long s, long ext) {
                if (o == 2 || !VariableTimeAlgorithm::in_stopped_subspace(s, i - 1)) return;
                diff += detail::slice_diff_sq(cur, prev, blk, o, s, ext, prev.extent(o, s));
            });
            check.projection_residual = std::sqrt(diff);
        }

        report.checks.push_back(check);
    }
    return report;
}

// ---------------------------- stopping profile ------------------------------

struct StoppingProfile {
    Eigen::VectorXd t;            // stopping times
    Eigen::VectorXd p_stop_leq;   // cumulative stop probability at t_i
    Eigen::VectorXd p_stop_gt;    // 1 - p_stop_leq
    Eigen::VectorXd p_stop_at;    // per-stage mass, residual folded into t_m
    Eigen::VectorXd p_succ_i;     // cumulative success probability at t_i
    double p_succ = 0.0;
    double t_av = 0.0;
    double t_max = 0.0;
};

inline StoppingProfile stopping_profile(const VariableTimeAlgorithm& vta,
                                        const QuantumState* input = nullptr) {
    long M = vta.stage_count();
    require(M >= 1, "stopping_profile: algorithm has no stages");
    QuantumState cur(vta.layout);
    cur.assign(input ? *input : *vta.initial);
    double total = cur.norm_sq();
    require(total > 0, "stopping_profile: empty input state");
    CostLedger scratch;

    StoppingProfile prof;
    prof.t.resize(M);
    prof.p_stop_leq.resize(M);
    prof.p_stop_gt.resize(M);
    prof.p_stop_at.resize(M);
    prof.p_succ_i.resize(M);

    for (long i = 1; i <= M; ++i) {
        vta.stages[i - 1].apply(cur, scratch, false);
        prof.t[i - 1] = vta.stages[i - 1].t_stop;
        double stopped = probability(cur, on_outcome({0, 1})) / total;
        double succ = probability(cur, on_outcome({1})) / total;
        prof.p_stop_leq[i - 1] = stopped;
        prof.p_stop_gt[i - 1] = 1.0 - stopped;
        prof.p_succ_i[i - 1] = succ;
        prof.p_stop_at[i - 1] = stopped - (i > 1 ? prof.p_stop_leq[i - 2] : 0.0);
    }
    // Mass still running at t_m counts as stopping at t_m for the l2 average.
    prof.p_stop_at[M - 1] += prof.p_stop_gt[M - 1];
    prof.p_succ = prof.p_succ_i[M - 1];
    prof.t_max = prof.t[M - 1];
    double acc = 0.0;
    for (long i = 0; i < M; ++i) acc += prof.p_stop_at[i] * prof.t[i] * prof.t[i];
    prof.t_av = std::sqrt(acc);
    return prof;
}

// ------------------------------- synthesis ---------------------------------

struct ProfileSpec {
    std::vector<double> t;          // ascending stopping times
    std::vector<double> p_stop;     // per-stage stop mass, sums to <= 1
    std::vector<double> p_succ;     // cumulative success probability at t_i
};

// Builds a minimal algorithm (N = 1, no estimate register) whose stopping
// profile reproduces `spec`. Stage i rotates the still-running amplitude into
// the fresh markers 2i (split between outcomes 0 and 1) with seeded phases.
inline VariableTimeAlgorithm synth_vta(const ProfileSpec& spec, std::uint64_t seed) {
    long M = static_cast<long>(spec.t.size());
    require(M >= 1, "synth_vta: need at least one stage");
    require(spec.p_stop.size() == static_cast<std::size_t>(M) &&
                spec.p_succ.size() == static_cast<std::size_t>(M),
            "synth_vta: field lengths differ");

    double stop_acc = 0.0, succ_prev = 0.0;
    for (long i = 0; i < M; ++i) {
        if (i > 0) require(spec.t[i] > spec.t[i - 1], "synth_vta: stopping times not ascending");
        require(spec.t[i] >= 1.0, "synth_vta: stopping times must be >= 1");
        require(spec.p_stop[i] >= -1e-12, "synth_vta: negative stop mass");
        double succ_inc = spec.p_succ[i] - succ_prev;
        require(succ_inc >= -1e-12, "synth_vta: p_succ must be nondecreasing");
        require(succ_inc <= spec.p_stop[i] + 1e-12,
                "synth_vta: success increment exceeds stop mass (infeasible)");
        require(spec.p_succ[i] <= stop_acc + spec.p_stop[i] + 1e-12,
                "synth_vta: p_succ exceeds cumulative stop probability");
        stop_acc += spec.p_stop[i];
        succ_prev = spec.p_succ[i];
    }
    require(stop_acc <= 1.0 + 1e-12, "synth_vta: stop probabilities exceed 1");

    VariableTimeAlgorithm vta;
    vta.layout = RegisterLayout{1, 3, 2 * M + 2, 0};
    vta.initial = std::make_shared<QuantumState>(
        QuantumState::basis(vta.layout, 0, 2, 1, 0));

    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

    double live = 1.0;
    succ_prev = 0.0;
    for (long i = 1; i <= M; ++i) {
        double succ_inc = spec.p_succ[i - 1] - succ_prev;
        double fail_inc = spec.p_stop[i - 1] - succ_inc;
        succ_prev = spec.p_succ[i - 1];
        double remain = live - spec.p_stop[i - 1];
        require(remain >= -1e-12, "synth_vta: stop mass exceeds remaining amplitude");
        remain = std::max(0.0, remain);

        // First column of the stage unitary on span{(2,1), (1,2i), (0,2i)}.
        Eigen::Vector3cd col0;
        if (live <= 1e-15) {
            col0 << 1.0, 0.0, 0.0;
        } else {
            col0 << std::sqrt(remain / live),
                std::polar(std::sqrt(std::max(0.0, succ_inc) / live), phase(rng)),
                std::polar(std::sqrt(std::max(0.0, fail_inc) / live), phase(rng));
        }
        Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();
        u.col(0) = col0;
        // Gram-Schmidt completion to a full unitary.
        for (int c = 1; c < 3; ++c) {
            Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
            v[c] = 1.0;
            for (int p = 0; p < c; ++p) v -= u.col(p).dot(v) * u.col(p);
            double n = v.norm();
            if (n < 1e-12) {
                v.setZero();
                v[(c + 1) % 3] = 1.0;
                for (int p = 0; p < c; ++p) v -= u.col(p).dot(v) * u.col(p);
                n = v.norm();
            }
            u.col(c) = v / n;
        }

        double dt = spec.t[i - 1] - (i > 1 ? spec.t[i - 2] : 0.0);
        VtaStage stage;
        stage.t_stop = spec.t[i - 1];
        stage.cost = dt;
        stage.apply = [u, i, dt](QuantumState& st, CostLedger& ledger, bool adjoint) {
            Eigen::Matrix3cd m = adjoint ? Eigen::Matrix3cd(u.adjoint()) : u;
            Eigen::Vector3cd v(st.at(0, 2, 1, 0), st.at(0, 1, 2 * i, 0), st.at(0, 0, 2 * i, 0));
            v = m * v;
            st.at(0, 2, 1, 0) = v[0];
            st.at(0, 1, 2 * i, 0) = v[1];
            st.at(0, 0, 2 * i, 0) = v[2];
            st.touch(2, 1, 1);
            st.touch(1, 2 * i, 1);
            st.touch(0, 2 * i, 1);
            ledger.charge("synth_stage", dt);
        };
        vta.stages.push_back(std::move(stage));
        live = remain;
    }
    return vta;
}

}  // namespace vtamp
