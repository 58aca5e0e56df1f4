// amplitude.hpp — amplitude amplification with the tight success bound and
// relative-error amplitude estimation.
//
// An algorithm here is a unitary applied from a fixed initial state, with a
// declared per-invocation ledger cost and a basis-diagonal good predicate.
// The Grover iterate is realized as A S_0 A^dag S_good with S_0 the
// reflection about the initial state; the textbook global minus sign is
// dropped (a global phase, irrelevant even under nesting).

#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "vtamp/common.hpp"
#include "vtamp/ledger.hpp"
#include "vtamp/phase_estimation.hpp"
#include "vtamp/state.hpp"

namespace vtamp {

struct AmplifiableAlgorithm {
    // Applies the unitary (or its adjoint) in place.
    std::function<void(QuantumState&, CostLedger&, bool adjoint)> apply;
    BasisPredicate good;
    double cost = 0.0;        // ledger units per invocation
    double time_norm = 0.0;   // normalized running time (variable-time bookkeeping)
    std::shared_ptr<const QuantumState> initial;

    // One full run from the initial state into `out` (reused buffer).
    void run(QuantumState& out, CostLedger& ledger) const {
        out.clear();
        out.assign(*initial);
        apply(out, ledger, false);
    }

    double success_probability(QuantumState& scratch, CostLedger& ledger) const {
        run(scratch, ledger);
        return probability(scratch, good);
    }
};

// Largest m with m <= pi / (4 asin sqrt(eps)) - 1/2; never negative.
inline long max_rounds(double eps) {
    require(eps > 0.0 && eps < 1.0, "max_rounds: eps outside (0, 1)");
    double bound = kPi / (4.0 * std::asin(std::sqrt(eps))) - 0.5;
    long m = static_cast<long>(std::floor(bound + 1e-9));
    return m < 0 ? 0 : m;
}

inline void grover_iterate(const AmplifiableAlgorithm& alg, QuantumState& st, CostLedger& ledger,
                           bool adjoint) {
    if (!adjoint) {
        sign_flip(st, alg.good);
        alg.apply(st, ledger, true);
        reflect_about(st, *alg.initial);
        alg.apply(st, ledger, false);
    } else {
        alg.apply(st, ledger, true);
        reflect_about(st, *alg.initial);
        alg.apply(st, ledger, false);
        sign_flip(st, alg.good);
    }
}

// Standard amplitude amplification: A followed by m Grover iterates, using
// 2m+1 calls to A and A^-1. If A succeeds with probability delta, the result
// succeeds with probability exactly sin^2((2m+1) asin sqrt(delta)).
inline AmplifiableAlgorithm grover_amplify(const AmplifiableAlgorithm& alg, long m) {
    require(m >= 0, "grover_amplify: negative round count");
    if (m == 0) return alg;
    auto base = std::make_shared<AmplifiableAlgorithm>(alg);
    AmplifiableAlgorithm out;
    out.good = alg.good;
    out.cost = static_cast<double>(2 * m + 1) * alg.cost;
    out.time_norm = static_cast<double>(2 * m + 1) * alg.time_norm;
    out.initial = alg.initial;
    out.apply = [base, m](QuantumState& st, CostLedger& ledger, bool adjoint) {
        if (!adjoint) {
            base->apply(st, ledger, false);
            for (long r = 0; r < m; ++r) grover_iterate(*base, st, ledger, false);
        } else {
            for (long r = 0; r < m; ++r) grover_iterate(*base, st, ledger, true);
            base->apply(st, ledger, true);
        }
    };
    return out;
}

inline double amplified_probability(double delta, long m) {
    double theta = std::asin(std::sqrt(std::min(1.0, std::max(0.0, delta))));
    double s = std::sin(static_cast<double>(2 * m + 1) * theta);
    return s * s;
}

// Tight lower bound (1 - (2m+1)^2 delta / 3) (2m+1)^2 delta on the amplified
// probability, valid under the round-count constraint of max_rounds.
inline double amplification_bound(double delta, long m) {
    double f = static_cast<double>(2 * m + 1) * static_cast<double>(2 * m + 1);
    return (1.0 - f * delta / 3.0) * f * delta;
}

// ------------------------------ Estimate ------------------------------------

enum class EstimateMode { oracle, faithful };

struct EstimateOptions {
    double c = 0.1;              // relative error target, in (0, 1]
    double p_floor = 1e-6;       // promise: success probability is 0 or >= p_floor
    double k_conf = 5.0;         // confidence parameter (failure prob 2^-k)
    EstimateMode mode = EstimateMode::oracle;
    double noise_scale = 0.9;    // oracle-mode noise amplitude as a fraction of c
    std::uint64_t seed = 0;
};

struct EstimateResult {
    double value = 0.0;
    bool promise_violated = false;
    double charged = 0.0;
};

namespace detail {

// Expected-cost form with the Theta-constant fixed at 1 (log base 2).
inline double estimate_charge_units(double eps_true, const EstimateOptions& opt) {
    double p = std::max(opt.p_floor, 1e-300);
    double loglog = 0.0;
    if (p < 0.5) {
        double l = std::log2(1.0 / p);
        if (l > 1.0) loglog = std::log2(l);
    }
    double denom = std::max(eps_true, opt.p_floor);
    return opt.k_conf * (1.0 + loglog) * std::sqrt(1.0 / denom);
}

// Measurement statistics of one n-bit estimation of the Grover iterate's
// eigenphase pair +-2 theta, folded back to [0, pi/2].
inline double sample_folded_theta(double theta, int n_bits, std::mt19937_64& rng) {
    long n = 1L << n_bits;
    double phase = theta / kPi;   // eigenphase fraction of e^{2 i theta}
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double sign = unif(rng) < 0.5 ? 1.0 : -1.0;
    double frac = sign * phase;
    // Draw from the single-run law around eigenphase `frac`.
    double u = unif(rng);
    double acc = 0.0;
    long drawn = 0;
    for (long k = 0; k < n; ++k) {
        double d = frac - static_cast<double>(k) / static_cast<double>(n);
        acc += fejer_ratio_sq(kPi * d, static_cast<double>(n));
        if (acc >= u) {
            drawn = k;
            break;
        }
        drawn = k;
    }
    long folded = std::min(drawn, n - drawn);
    return kPi * static_cast<double>(folded) / static_cast<double>(n);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace detail

// Relative-error amplitude estimation. Under the promise that the true
// success probability is 0 or >= p_floor, returns eps_tilde with
// |eps_true - eps_tilde| < c * eps_tilde (or exactly 0), and charges
// k (1 + log log 1/p) sqrt(1 / max(eps_true, p)) invocations of the
// algorithm.
//
// oracle mode reads the true probability from the state vector and adds
// seeded relative noise bounded by noise_scale * c; faithful mode simulates
// the measurement statistics of phase estimation on the Grover iterate with
// median boosting across an exponential precision schedule.
inline EstimateResult amp_estimate(const AmplifiableAlgorithm& alg, QuantumState& scratch,
                                   const EstimateOptions& opt, CostLedger& ledger) {
    require(opt.c > 0.0 && opt.c <= 1.0, "amp_estimate: c outside (0, 1]");
    require(opt.p_floor > 0.0 && opt.p_floor <= 1.0, "amp_estimate: p outside (0, 1]");

    CostLedger probe;   // the single probe run is not charged; Estimate's cost model is
    double eps_true = alg.success_probability(scratch, probe);

    EstimateResult out;
    out.promise_violated = eps_true > 1e-15 && eps_true < opt.p_floor;

    if (opt.mode == EstimateMode::oracle) {
        out.charged = detail::estimate_charge_units(eps_true, opt) * alg.cost;
        ledger.charge("amp_estimate", out.charged);
        if (eps_true <= 1e-15) {
            out.value = 0.0;
            return out;
        }
        auto rng = make_rng(opt.seed, 0xE57);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        double wiggle = opt.noise_scale * opt.c * unif(rng);
        out.value = eps_true / (1.0 + wiggle);
        return out;
    }

    // Faithful mode: exponential search over scales, median of repeats.
    auto rng = make_rng(opt.seed, 0xFA17);
    double theta_true = std::asin(std::sqrt(std::min(1.0, eps_true)));
    double theta_floor = std::asin(std::sqrt(opt.p_floor));
    long repeats = static_cast<long>(std::ceil(2.0 * opt.k_conf)) + 25;
    double charged_units = 0.0;
    double theta_hat = 0.0;
    bool detected = false;
    for (int n_bits = 3; n_bits <= 30; ++n_bits) {
        std::vector<double> draws;
        draws.reserve(repeats);
        for (long r = 0; r < repeats; ++r)
            draws.push_back(detail::sample_folded_theta(theta_true, n_bits, rng));
        charged_units += static_cast<double>(repeats) * std::pow(2.0, n_bits) * 2.0;
        theta_hat = detail::median(draws);
        double grid = kPi / std::pow(2.0, n_bits);
        if (theta_hat >= 4.0 * grid) {
            // Resolved above grid noise; refine until the grid is fine
            // relative to the estimate.
            if (grid <= 0.125 * opt.c * theta_hat) {
                detected = true;
                break;
            }
        } else if (grid < 0.25 * theta_floor) {
            break;   // any promised theta would have been visible by now
        }
    }
    out.charged = charged_units * alg.cost;
    ledger.charge("amp_estimate", out.charged);
    out.value = detected ? std::pow(std::sin(theta_hat), 2) : 0.0;
    return out;
}

}  // namespace vtamp
