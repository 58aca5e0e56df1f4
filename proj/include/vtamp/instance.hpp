// instance.hpp — dense Hermitian problem instances with cached
// eigendecomposition, exact Hamiltonian evolution, and the JSON file format.
//
// Phase convention: one time unit of the walk operator advances an
// eigencomponent with eigenvalue lambda by lambda/2 turns, i.e. the phase
// factor exp(2*pi*i * (lambda/2) * t). Eigenvalues in (0, 1] therefore never
// wrap, and n-bit estimation grids have spacing 2^(1-n) in lambda units.

#pragma once

#include <Eigen/Dense>

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vtamp/common.hpp"
#include "vtamp/ledger.hpp"
#include "vtamp/state.hpp"

namespace vtamp {

struct HermitianInstance {
    Eigen::MatrixXcd matrix;   // N x N Hermitian
    Eigen::VectorXd lambdas;   // eigenvalues, ascending
    Eigen::MatrixXcd basis;    // eigenvectors as columns, orthonormal
    double kappa = 1.0;        // declared condition bound: spectrum in [1/kappa, 1]
    double shift = 0.0;        // additive spectral shift (lambda units); see shifted()

    long dim() const noexcept { return matrix.rows(); }
    double eigenvalue(long i) const { return lambdas[i] + shift; }
};

// Validates Hermiticity and the declared spectral window, then caches the
// eigensystem. Rejection messages carry the offending magnitudes.
inline HermitianInstance eigendecompose(const Eigen::MatrixXcd& A, double kappa) {
    require(A.rows() == A.cols() && A.rows() >= 1, "eigendecompose: matrix must be square");
    require(kappa >= 1.0, "eigendecompose: kappa must be >= 1");
    double asym = (A - A.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
        fail("eigendecompose: input not Hermitian, max asymmetry " + std::to_string(asym));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(A);
    require(solver.info() == Eigen::Success, "eigendecompose: eigensolver failed");

    HermitianInstance inst;
    inst.matrix = A;
    inst.lambdas = solver.eigenvalues();
    inst.basis = solver.eigenvectors();
    inst.kappa = kappa;

    double lo = 1.0 / kappa - 1e-9, hi = 1.0 + 1e-9;
    for (long i = 0; i < inst.dim(); ++i)
        if (inst.lambdas[i] < lo || inst.lambdas[i] > hi)
            fail("eigendecompose: eigenvalue " + std::to_string(inst.lambdas[i]) +
                 " outside [1/kappa, 1] for kappa " + std::to_string(kappa));
    return inst;
}

// Shift every eigenvalue by delta * 2^(1-n_bits), one n-bit grid step scaled
// by delta. Eigenvectors are untouched; callers subtract the shift from
// estimates themselves.
inline HermitianInstance shifted(const HermitianInstance& inst, double delta, int n_bits) {
    require(delta >= 0.0 && delta <= 1.0, "shifted: delta must lie in [0, 1]");
    HermitianInstance out = inst;
    out.shift = inst.shift + delta * std::pow(2.0, 1 - n_bits);
    return out;
}

// Exact controlled evolution: on basis components (o, s) satisfying `control`,
// eigencomponent i acquires phase exp(2*pi*i * (lambda_i/2) * t). The state's
// I axis must be expressed in the instance's eigenbasis. Charges |t| units.
inline void evolve(QuantumState& st, const HermitianInstance& inst, double t,
                   const BasisPredicate& control, CostLedger& ledger) {
    require(st.layout().input_dim == inst.dim(), "evolve: I-register dimension mismatch");
    require(std::abs(t) <= static_cast<double>(st.layout().estimate_dim()),
            "evolve: |t| exceeds 2^n_max");
    st.for_each_slice([&](long i, int o, long s, long ext) {
        if (!control(o, s, 0)) return;
        Complex phase = std::polar(1.0, 2.0 * kPi * (inst.eigenvalue(i) / 2.0) * t);
        st.slice(i, o, s).head(ext) *= phase;
    });
    ledger.charge("evolve", std::abs(t));
}

// ---------------------------- instance file I/O ----------------------------
// {"n": N, "kappa": k, "matrix": [[[re,im],...],...], "b": [[re,im],...]}

struct ProblemInstance {
    HermitianInstance instance;
    Eigen::VectorXcd b;
};

inline nlohmann::json instance_to_json(const Eigen::MatrixXcd& A, double kappa,
                                       const Eigen::VectorXcd& b) {
    nlohmann::json j;
    long n = A.rows();
    j["n"] = n;
    j["kappa"] = kappa;
    auto& m = j["matrix"] = nlohmann::json::array();
    for (long r = 0; r < n; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (long c = 0; c < n; ++c) row.push_back({A(r, c).real(), A(r, c).imag()});
        m.push_back(std::move(row));
    }
    auto& bv = j["b"] = nlohmann::json::array();
    for (long r = 0; r < n; ++r) bv.push_back({b[r].real(), b[r].imag()});
    return j;
}

inline ProblemInstance instance_from_json(const nlohmann::json& j) {
    long n = j.at("n").get<long>();
    double kappa = j.at("kappa").get<double>();
    require(n >= 1, "instance_from_json: n must be >= 1");
    const auto& m = j.at("matrix");
    require(static_cast<long>(m.size()) == n, "instance_from_json: matrix row count != n");
    Eigen::MatrixXcd A(n, n);
    for (long r = 0; r < n; ++r) {
        require(static_cast<long>(m[r].size()) == n, "instance_from_json: ragged matrix");
        for (long c = 0; c < n; ++c)
            A(r, c) = Complex(m[r][c][0].get<double>(), m[r][c][1].get<double>());
    }
    const auto& bv = j.at("b");
    require(static_cast<long>(bv.size()) == n, "instance_from_json: b size != n");
    Eigen::VectorXcd b(n);
    for (long r = 0; r < n; ++r) b[r] = Complex(bv[r][0].get<double>(), bv[r][1].get<double>());
    return ProblemInstance{eigendecompose(A, kappa), std::move(b)};
}

inline void write_instance_file(const std::string& path, const Eigen::MatrixXcd& A, double kappa,
                                const Eigen::VectorXcd& b) {
    std::ofstream out(path);
    require(out.good(), "write_instance_file: cannot open " + path);
    out << instance_to_json(A, kappa, b).dump(2) << "\n";
}

inline ProblemInstance read_instance_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "read_instance_file: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return instance_from_json(j);
}

}  // namespace vtamp
