// phase_estimation.hpp — eigenvalue estimation with the exact single-run
// outcome law, majority-vote unique estimation, and their reversible
// realizations on the E register.
//
// Grid convention: an n-bit estimate register resolves lambda values on the
// grid x_k = k * 2^(1-n), k = 0..2^n-1 (spacing 2^(1-n), half-spacing 2^-n).
// The grid is periodic with period 2 in lambda units.

#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "vtamp/common.hpp"
#include "vtamp/instance.hpp"
#include "vtamp/ledger.hpp"
#include "vtamp/state.hpp"

namespace vtamp {

struct EstimateGrid {
    int n_bits;

    long size() const noexcept { return 1L << n_bits; }
    double spacing() const noexcept { return std::pow(2.0, 1 - n_bits); }
    double value(long k) const noexcept { return static_cast<double>(k) * spacing(); }

    // Index of the grid point nearest to lambda, modulo the period.
    long nearest(double lambda) const noexcept {
        long k = std::lround(lambda / spacing());
        long n = size();
        return ((k % n) + n) % n;
    }
};

namespace detail {

// (sin(N*theta) / (N*sin(theta)))^2 with the N-independent limit at theta -> 0.
inline double fejer_ratio_sq(double theta, double n) {
    double s = std::sin(theta);
    if (std::abs(s) < 1e-12) return 1.0;
    double r = std::sin(n * theta) / (n * s);
    return r * r;
}

// Outcome distribution of one n-bit estimation run on an eigenstate with
// eigenvalue lambda, valid for lambda anywhere in (0, 2) (shifted spectra
// exceed 1). p(x_k) = (1/2^{2n}) sin^2(2^n pi (lambda-x_k)/2) / sin^2(pi (lambda-x_k)/2).
inline Eigen::VectorXd single_run_distribution_raw(double lambda, int n_bits) {
    EstimateGrid grid{n_bits};
    double n = static_cast<double>(grid.size());
    Eigen::VectorXd p(grid.size());
    for (long k = 0; k < grid.size(); ++k) {
        double theta = kPi * (lambda - grid.value(k)) / 2.0;
        p[k] = fejer_ratio_sq(theta, n);
    }
    return p;
}

}  // namespace detail

inline Eigen::VectorXd single_run_distribution(double lambda, int n_bits) {
    require(lambda > 0.0 && lambda <= 1.0, "single_run_distribution: lambda outside (0, 1]");
    require(n_bits >= 1, "single_run_distribution: n_bits must be >= 1");
    return detail::single_run_distribution_raw(lambda, n_bits);
}

// ------------------------- majority-vote estimation -------------------------

struct MajorityDistribution {
    Eigen::VectorXd q;           // Pr[majority lands on grid point k]
    Eigen::VectorXd std_error;   // per-point Monte Carlo standard error
    long trials = 0;
};

// Monte Carlo estimate of the distribution of the most frequent answer over
// k_uniq independent estimation runs. Ties break toward the smaller index.
inline MajorityDistribution majority_distribution(double lambda, int n_bits, long k_uniq,
                                                  long trials, std::uint64_t seed) {
    require(trials >= 1000, "majority_distribution: trials must be >= 1e3");
    require(k_uniq >= 1, "majority_distribution: k_uniq must be >= 1");
    Eigen::VectorXd p = detail::single_run_distribution_raw(lambda, n_bits);
    long n = p.size();

    Eigen::VectorXd cdf(n);
    double acc = 0.0;
    for (long k = 0; k < n; ++k) {
        acc += p[k];
        cdf[k] = acc;
    }

    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<long> counts(n, 0), wins(n, 0);
    for (long t = 0; t < trials; ++t) {
        std::fill(counts.begin(), counts.end(), 0L);
        for (long d = 0; d < k_uniq; ++d) {
            double u = unif(rng) * acc;
            long k = std::lower_bound(cdf.data(), cdf.data() + n, u) - cdf.data();
            if (k >= n) k = n - 1;
            ++counts[k];
        }
        long best = 0;
        for (long k = 1; k < n; ++k)
            if (counts[k] > counts[best]) best = k;
        ++wins[best];
    }

    MajorityDistribution out;
    out.q.resize(n);
    out.std_error.resize(n);
    out.trials = trials;
    for (long k = 0; k < n; ++k) {
        double q = static_cast<double>(wins[k]) / static_cast<double>(trials);
        out.q[k] = q;
        out.std_error[k] = std::sqrt(std::max(0.0, q * (1.0 - q) / static_cast<double>(trials)));
    }
    return out;
}

// ------------------------------ UniqueEst ----------------------------------

enum class UniqueEstMode { faithful, idealized };

struct UniqueEstConfig {
    int n_bits = 1;
    double epsilon = 0.1;
    long k_uniq = 0;
    UniqueEstMode mode = UniqueEstMode::idealized;
    long mc_trials = 10000;   // faithful-mode Monte Carlo sample count

    static long k_uniq_for(double epsilon) {
        return static_cast<long>(std::ceil(3.0 / (epsilon * epsilon) * std::log(1.0 / epsilon)));
    }

    static UniqueEstConfig make(int n_bits, double epsilon,
                                UniqueEstMode mode = UniqueEstMode::idealized) {
        require(epsilon > 0.0 && epsilon <= 0.1, "UniqueEstConfig: epsilon outside (0, 0.1]");
        require(n_bits >= 1, "UniqueEstConfig: n_bits must be >= 1");
        return UniqueEstConfig{n_bits, epsilon, k_uniq_for(epsilon), mode};
    }
};

// Where a shifted eigenvalue sits relative to the stage grid: a unique
// majority answer (good) or a two-candidate split (bad). k_main is the
// majority answer for good values and the upper candidate for bad ones.
struct GridClassification {
    bool good = true;
    long k_main = 0;
};

inline GridClassification classify_on_grid(double lambda_shifted, int n_bits, double epsilon) {
    EstimateGrid grid{n_bits};
    double step = grid.spacing();
    long k_near = grid.nearest(lambda_shifted);
    double d = lambda_shifted - std::round(lambda_shifted / step) * step;
    if (std::abs(d) < (1.0 - epsilon) * step / 2.0) return {true, k_near};
    long k_lo = static_cast<long>(std::floor(lambda_shifted / step));
    long n = grid.size();
    k_lo = ((k_lo % n) + n) % n;
    return {false, (k_lo + 1) % n};
}

// The limiting majority distribution used by idealized mode: mass 1-eps on
// the unique answer (eps/2 spilled to each neighbor), or (1-eps)/2 on each of
// the two candidates with eps/2 on each outer neighbor.
inline Eigen::VectorXd idealized_majority_distribution(double lambda_shifted, int n_bits,
                                                       double epsilon) {
    EstimateGrid grid{n_bits};
    long n = grid.size();
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    auto wrap = [n](long k) { return ((k % n) + n) % n; };
    GridClassification cls = classify_on_grid(lambda_shifted, n_bits, epsilon);
    double off_grid = lambda_shifted - std::round(lambda_shifted / grid.spacing()) *
                                           grid.spacing();
    if (std::abs(off_grid) < 1e-12) {
        // Exactly on a grid point every single run is already concentrated,
        // so the majority is deterministic.
        q[cls.k_main] = 1.0;
        return q;
    }
    if (cls.good) {
        q[cls.k_main] = 1.0 - epsilon;
        q[wrap(cls.k_main - 1)] += epsilon / 2.0;
        q[wrap(cls.k_main + 1)] += epsilon / 2.0;
    } else {
        long hi = cls.k_main, lo = wrap(cls.k_main - 1);
        q[hi] = (1.0 - epsilon) / 2.0;
        q[lo] += (1.0 - epsilon) / 2.0;
        q[wrap(hi + 1)] += epsilon / 2.0;
        q[wrap(lo - 1)] += epsilon / 2.0;
    }
    return q;
}

// ------------------- reversible E-register realizations ---------------------
//
// An estimation pass on eigencomponent i sends |0>_E to sum_x sqrt(q_i(x)) |x>_E.
// We realize it as the Householder reflection exchanging e_0 with the target
// vector: a concrete unitary whose first column is the required isometry and
// whose own adjoint is itself. Error branches produced by imperfect reversal
// land in the orthogonal complement of |0>_E, where the step logic flags them.

class EstimatePass {
  public:
    // targets[i] must be a unit vector of dimension 2^n_bits (sqrt of q_i).
    EstimatePass(int n_bits, std::vector<Eigen::VectorXd> targets, double charge_units,
                 std::string label)
        : n_bits_(n_bits), charge_(charge_units), label_(std::move(label)) {
        long dim = 1L << n_bits;
        w_.reserve(targets.size());
        w_norm_sq_.reserve(targets.size());
        for (auto& u : targets) {
            require(u.size() == dim, "EstimatePass: target dimension mismatch");
            Eigen::VectorXd w = -u;
            w[0] += 1.0;   // w = e_0 - u
            w_norm_sq_.push_back(w.squaredNorm());
            w_.push_back(w.cast<Complex>());
        }
    }

    int n_bits() const noexcept { return n_bits_; }
    double charge_units() const noexcept { return charge_; }
    const std::string& label() const noexcept { return label_; }

    // Self-adjoint: forward and reverse are the same reflection.
    void apply_slice(QuantumState& st, long i, int o, long s) const {
        long dim = 1L << n_bits_;
        st.touch(o, s, dim);
        if (w_norm_sq_[i] < 1e-30) return;   // target is e_0 itself
        auto seg = st.slice(i, o, s).head(dim);
        const Eigen::VectorXcd& w = w_[i];
        Complex proj = w.dot(seg) * (2.0 / w_norm_sq_[i]);
        seg -= proj * w;
    }

    void apply_all_slices(QuantumState& st, CostLedger& ledger) const {
        std::vector<std::pair<int, long>> occupied;
        for (int o = 0; o < st.layout().outcome_dim; ++o)
            for (long s = 0; s < st.layout().step_dim; ++s)
                if (st.extent(o, s) > 0) occupied.emplace_back(o, s);
        for (auto [o, s] : occupied)
            for (long i = 0; i < st.layout().input_dim; ++i) apply_slice(st, i, o, s);
        ledger.charge(label_, charge_);
    }

  private:
    int n_bits_;
    double charge_;
    std::string label_;
    std::vector<Eigen::VectorXcd> w_;
    std::vector<double> w_norm_sq_;
};

inline Eigen::VectorXd amplitude_target(const Eigen::VectorXd& dist) {
    Eigen::VectorXd u = dist.cwiseMax(0.0).cwiseSqrt();
    double norm = u.norm();
    require(norm > 0.0, "amplitude_target: empty distribution");
    return u / norm;
}

// Standard eigenvalue estimation as an EstimatePass over the instance's
// eigencomponents. Charges 2^n_bits per application.
inline EstimatePass make_phase_estimate_pass(const HermitianInstance& inst, int n_bits) {
    std::vector<Eigen::VectorXd> targets;
    targets.reserve(inst.dim());
    for (long i = 0; i < inst.dim(); ++i)
        targets.push_back(
            amplitude_target(detail::single_run_distribution_raw(inst.eigenvalue(i), n_bits)));
    return EstimatePass(n_bits, std::move(targets), std::pow(2.0, n_bits), "phase_estimate");
}

// UniqueEst as an EstimatePass: majority distribution per eigencomponent
// (seeded Monte Carlo in faithful mode, the limiting law in idealized mode).
// Charges k_uniq * 2^n_bits per application.
inline EstimatePass make_unique_est_pass(const HermitianInstance& inst,
                                         const UniqueEstConfig& cfg, std::uint64_t seed) {
    std::vector<Eigen::VectorXd> targets;
    targets.reserve(inst.dim());
    for (long i = 0; i < inst.dim(); ++i) {
        double lam = inst.eigenvalue(i);
        Eigen::VectorXd q;
        if (cfg.mode == UniqueEstMode::idealized) {
            q = idealized_majority_distribution(lam, cfg.n_bits, cfg.epsilon);
        } else {
            q = majority_distribution(lam, cfg.n_bits, cfg.k_uniq, cfg.mc_trials,
                                      mix_seed(seed, static_cast<std::uint64_t>(i)))
                    .q;
        }
        targets.push_back(amplitude_target(q));
    }
    return EstimatePass(cfg.n_bits, std::move(targets),
                        static_cast<double>(cfg.k_uniq) * std::pow(2.0, cfg.n_bits),
                        "unique_est");
}

namespace detail {

inline void check_e_cleared(const QuantumState& st, const char* who) {
    st.for_each_slice([&](long i, int o, long s, long ext) {
        for (long e = 1; e < ext; ++e)
            if (std::norm(st.at(i, o, s, e)) > tol::unitary * tol::unitary)
                fail(std::string(who) + ": E register not in |0> on an acted component");
    });
}

}  // namespace detail

// Spec-level operations acting on every occupied component. The forward
// direction requires E = |0>; the reverse is the exact adjoint and accepts
// anything.
inline void phase_estimate(QuantumState& st, const HermitianInstance& inst, int n_bits,
                           CostLedger& ledger, bool reverse = false) {
    if (!reverse) detail::check_e_cleared(st, "phase_estimate");
    make_phase_estimate_pass(inst, n_bits).apply_all_slices(st, ledger);
}

inline void unique_est(QuantumState& st, const HermitianInstance& inst,
                       const UniqueEstConfig& cfg, CostLedger& ledger, bool reverse = false,
                       std::uint64_t seed = 0) {
    if (!reverse) detail::check_e_cleared(st, "unique_est");
    make_unique_est_pass(inst, cfg, seed).apply_all_slices(st, ledger);
}

}  // namespace vtamp
