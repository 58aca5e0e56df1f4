#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "vtamp/amplitude.hpp"

using namespace vtamp;

namespace {

// Minimal two-level algorithm with tunable success probability: rotates the
// all-zeros state to sqrt(delta)|good> + sqrt(1-delta)|bad>.
AmplifiableAlgorithm toy_algorithm(double delta, double cost = 1.0) {
    RegisterLayout lay{1, 3, 2, 0};
    AmplifiableAlgorithm alg;
    alg.good = on_outcome({1});
    alg.cost = cost;
    alg.time_norm = cost;
    alg.initial = std::make_shared<QuantumState>(QuantumState::basis(lay, 0, 0, 1, 0));
    double c1 = std::sqrt(delta), c0 = std::sqrt(1.0 - delta);
    alg.apply = [c1, c0](QuantumState& st, CostLedger& ledger, bool adjoint) {
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
        ledger.charge("toy", 1.0);
    };
    return alg;
}

double simulated_success(const AmplifiableAlgorithm& alg) {
    QuantumState out(alg.initial->layout());
    CostLedger ledger;
    alg.run(out, ledger);
    return probability(out, alg.good);
}

}  // namespace

TEST_CASE("max_rounds closed-form cases") {
    CHECK(max_rounds(0.25) == 1);                       // pi/(4 pi/6) - 1/2 = 1
    CHECK(max_rounds(0.5) == 0);                        // bound is exactly 1/2
    double s = std::sin(kPi / 14.0);
    CHECK(max_rounds(s * s) == 3);                      // 14/4 - 1/2 = 3
    CHECK(max_rounds(1e-6) > 700);
    CHECK_THROWS(max_rounds(0.0));
    CHECK_THROWS(max_rounds(1.0));
}

TEST_CASE("amplified probability follows the exact trigonometric law") {
    // Oracle: closed form sin^2((2m+1) asin sqrt(delta)); implementation:
    // state-vector simulation of the Grover iterates.
    for (int g = 1; g <= 50; ++g) {
        double delta = g / 51.0;
        for (long m = 0; m <= 6; ++m) {
            AmplifiableAlgorithm amped = grover_amplify(toy_algorithm(delta), m);
            double simulated = simulated_success(amped);
            CHECK(std::abs(simulated - amplified_probability(delta, m)) < 1e-9);
        }
    }
}

TEST_CASE("m = 0 amplification is the identity case") {
    AmplifiableAlgorithm alg = toy_algorithm(0.37);
    AmplifiableAlgorithm same = grover_amplify(alg, 0);
    CHECK(simulated_success(same) == doctest::Approx(0.37).epsilon(1e-12));
    CHECK_THROWS(grover_amplify(alg, -1));
}

TEST_CASE("delta 1/4 with one round amplifies to certainty") {
    AmplifiableAlgorithm amped = grover_amplify(toy_algorithm(0.25), 1);
    CHECK(simulated_success(amped) == doctest::Approx(1.0).epsilon(1e-12));
    // Tight-bound value at this point: (1 - 9/12) * 9/4 = 0.5625 <= 1.
    CHECK(amplification_bound(0.25, 1) == doctest::Approx(0.5625));
}

TEST_CASE("observed probability dominates the tight bound on the admissible grid") {
    for (double eps : {0.05, 0.1, 0.25}) {
        long m = max_rounds(eps);
        for (int g = 1; g <= 50; ++g) {
            double delta = eps * g / 50.0;
            AmplifiableAlgorithm amped = grover_amplify(toy_algorithm(delta), m);
            double simulated = simulated_success(amped);
            CHECK(simulated >= amplification_bound(delta, m) - 1e-12);
        }
    }
}

TEST_CASE("amplification cost is exactly (2m+1) times the base cost") {
    AmplifiableAlgorithm alg = toy_algorithm(0.1, 3.5);
    for (long m : {1L, 2L, 5L}) {
        AmplifiableAlgorithm amped = grover_amplify(alg, m);
        CHECK(amped.cost == doctest::Approx((2.0 * m + 1.0) * 3.5));
        QuantumState out(alg.initial->layout());
        CostLedger ledger;
        amped.run(out, ledger);
        CHECK(ledger.invocations("toy") == 2 * m + 1);
    }
}

TEST_CASE("amplified algorithm composes with its adjoint to the identity") {
    AmplifiableAlgorithm amped = grover_amplify(toy_algorithm(0.2), 3);
    QuantumState st = testing::random_state(amped.initial->layout(), 11);
    QuantumState ref = st;
    CostLedger ledger;
    amped.apply(st, ledger, false);
    CHECK(std::abs(st.norm_sq() - 1.0) < tol::unitary);
    amped.apply(st, ledger, true);
    CHECK(distance(st, ref) < tol::algebraic);
}

TEST_CASE("oracle estimate returns zero for zero probability") {
    AmplifiableAlgorithm alg = toy_algorithm(0.0);
    QuantumState scratch(alg.initial->layout());
    CostLedger ledger;
    EstimateOptions opt;
    opt.p_floor = 0.01;
    EstimateResult res = amp_estimate(alg, scratch, opt, ledger);
    CHECK(res.value == 0.0);
    CHECK_FALSE(res.promise_violated);
}

TEST_CASE("oracle estimate satisfies the relative-error contract") {
    AmplifiableAlgorithm alg = toy_algorithm(0.25);
    QuantumState scratch(alg.initial->layout());
    EstimateOptions opt;
    opt.c = 0.1;
    opt.p_floor = 0.01;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        opt.seed = seed;
        CostLedger ledger;
        EstimateResult res = amp_estimate(alg, scratch, opt, ledger);
        CHECK(std::abs(0.25 - res.value) < opt.c * res.value);
    }
}

TEST_CASE("estimate charge follows the pinned cost form") {
    // At eps_true = p the charge is k (1 + log log 1/p) sqrt(1/p) times the
    // algorithm cost, with the constant fixed at 1.
    QuantumState scratch(toy_algorithm(0.0).initial->layout());
    EstimateOptions opt;
    opt.k_conf = 7.0;
    for (double p : {0.04, 0.01, 0.0025}) {
        opt.p_floor = p;
        AmplifiableAlgorithm promise_alg = toy_algorithm(p);
        CostLedger ledger;
        EstimateResult res = amp_estimate(promise_alg, scratch, opt, ledger);
        double expected =
            7.0 * (1.0 + std::log2(std::log2(1.0 / p))) * std::sqrt(1.0 / p);
        CHECK(res.charged == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("promise violation is detected") {
    AmplifiableAlgorithm alg = toy_algorithm(0.001);
    QuantumState scratch(alg.initial->layout());
    EstimateOptions opt;
    opt.p_floor = 0.01;
    CostLedger ledger;
    EstimateResult res = amp_estimate(alg, scratch, opt, ledger);
    CHECK(res.promise_violated);
}

TEST_CASE("faithful estimate meets the contract on seeded trials") {
    // eps_true = 0.25, c = 0.1, k = 7: the estimate must land within relative
    // error c in at least a 1 - 2^-7 fraction of seeded runs.
    AmplifiableAlgorithm alg = toy_algorithm(0.25);
    QuantumState scratch(alg.initial->layout());
    EstimateOptions opt;
    opt.c = 0.1;
    opt.p_floor = 0.01;
    opt.k_conf = 7.0;
    opt.mode = EstimateMode::faithful;
    long ok = 0, trials = 1000;
    for (long t = 0; t < trials; ++t) {
        opt.seed = 1000 + t;
        CostLedger ledger;
        EstimateResult res = amp_estimate(alg, scratch, opt, ledger);
        if (res.value > 0.0 && std::abs(0.25 - res.value) < opt.c * res.value) ++ok;
    }
    double target = 1.0 - std::pow(2.0, -7.0);
    CHECK(static_cast<double>(ok) / trials >= target);
}

TEST_CASE("faithful estimate returns zero when nothing succeeds") {
    AmplifiableAlgorithm alg = toy_algorithm(0.0);
    QuantumState scratch(alg.initial->layout());
    EstimateOptions opt;
    opt.p_floor = 0.05;
    opt.mode = EstimateMode::faithful;
    opt.seed = 9;
    CostLedger ledger;
    EstimateResult res = amp_estimate(alg, scratch, opt, ledger);
    CHECK(res.value == 0.0);
}
