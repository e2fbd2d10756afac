#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "designham/effective_hamiltonian.hpp"
#include "designham/pauli.hpp"
#include "designham/propagator.hpp"
#include "designham/rng.hpp"
#include "designham/spin_system.hpp"

namespace designham {

/// Dense 2^n x 2^n unitary. Materialized only for n <= 10.
using DenseUnitary = Eigen::MatrixXcd;

inline constexpr int dense_max_qubits = 10;

inline bool is_unitary(const DenseUnitary& u, double tol = 1e-9) {
    Eigen::MatrixXcd gram = u.adjoint() * u;
    gram -= Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return gram.norm() <= tol;
}

/// Dense matrix of a Pauli string.
inline Eigen::MatrixXcd pauli_dense(const PauliString& p) {
    if (p.n() > dense_max_qubits) throw std::invalid_argument("pauli_dense: n too large");
    const auto d = static_cast<Eigen::Index>(p.dim());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
        auto bb = static_cast<std::uint64_t>(b);
        m(static_cast<Eigen::Index>(bb ^ p.flip_mask()), b) = p.entry_phase(bb);
    }
    return m;
}

/// min over global phases of ||U - e^{i phi} V|| in spectral norm. The
/// optimal phase is the phase of Tr(V^dagger U).
inline double phase_quotient_distance(const DenseUnitary& u, const DenseUnitary& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols())
        throw std::invalid_argument("phase_quotient_distance: dimension mismatch");
    cplx tr = (v.adjoint() * u).trace();
    cplx phase = std::abs(tr) > 1e-300 ? tr / std::abs(tr) : cplx{1.0, 0.0};
    Eigen::MatrixXcd diff = u - phase * v;
    return diff.jacobiSvd().singularValues()(0);
}

/// Diagonal propagator exp(-i H tau) of a Z-diagonal Hamiltonian, dense.
inline DenseUnitary dense_z_propagator(const EffectiveZHamiltonian& h, double tau_s) {
    if (h.n() > dense_max_qubits) throw std::invalid_argument("dense_z_propagator: n too large");
    auto diag = z_phase_diagonal(h, tau_s);
    const auto d = static_cast<Eigen::Index>(diag.phases.size());
    DenseUnitary u = DenseUnitary::Zero(d, d);
    for (Eigen::Index b = 0; b < d; ++b) u(b, b) = diag.phases[static_cast<std::size_t>(b)];
    return u;
}

namespace detail {

/// In-place left multiplication by the simultaneous pi rotation about x on
/// the qubits of `mask`: U := R U, R|b> = (-i)^{popcount(mask)} |b ^ mask>.
inline void left_multiply_pi_x(DenseUnitary& u, std::uint64_t mask) {
    if (mask == 0) return;
    const auto d = static_cast<std::uint64_t>(u.rows());
    static constexpr cplx minus_i_pow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    cplx factor = minus_i_pow[std::popcount(mask) & 3];
    for (std::uint64_t r = 0; r < d; ++r) {
        std::uint64_t p = r ^ mask;
        if (p < r) continue;
        u.row(static_cast<Eigen::Index>(r)).swap(u.row(static_cast<Eigen::Index>(p)));
    }
    u *= factor;
}

}  // namespace detail

/// Exact piecewise simulation of one random refocusing half-period: free
/// evolution under the static Hamiltonian interrupted by instantaneous pi
/// pulses about x at times lambda_s * T_half (slots with equal lambda flip
/// simultaneously), with terminal pi pulses on every qubit at T_half.
/// Matrices compose right to left: the earliest segment is the rightmost
/// factor.
inline DenseUnitary oracle_refocusing_propagator(const SpinSystem& system,
                                                 std::span<const double> lambda_m,
                                                 const SlotMap& slot_map, double t_half_s) {
    if (system.n > dense_max_qubits)
        throw std::invalid_argument("oracle_refocusing_propagator: n too large for dense simulation");
    if (lambda_m.size() != static_cast<std::size_t>(slot_map.slots))
        throw std::invalid_argument("oracle_refocusing_propagator: lambda length != slot count");
    if (slot_map.slot_of_qubit.size() != static_cast<std::size_t>(system.n))
        throw std::invalid_argument("oracle_refocusing_propagator: slot map does not cover the system");
    for (double v : lambda_m)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("oracle_refocusing_propagator: lambda outside [0,1]");
    if (!(t_half_s > 0.0))
        throw std::invalid_argument("oracle_refocusing_propagator: T_half must be positive");

    // group qubits by exact pulse time
    std::map<double, std::uint64_t> flips;
    for (int q = 0; q < system.n; ++q) {
        double t = lambda_m[static_cast<std::size_t>(slot_map.slot_of_qubit[static_cast<std::size_t>(q)])] * t_half_s;
        flips[t] |= std::uint64_t{1} << q;
    }
    const std::uint64_t all_mask = (std::uint64_t{1} << system.n) - 1;

    auto h = static_hamiltonian(system);
    auto energies = z_eigenvalues(h);
    const auto d = static_cast<Eigen::Index>(energies.size());

    auto left_multiply_free = [&](DenseUnitary& u, double tau) {
        if (tau == 0.0) return;
        for (Eigen::Index b = 0; b < d; ++b)
            u.row(b) *= std::polar(1.0, -energies[static_cast<std::size_t>(b)] * tau);
    };

    DenseUnitary u = DenseUnitary::Identity(d, d);
    double t_prev = 0.0;
    for (const auto& [t, mask] : flips) {
        left_multiply_free(u, t - t_prev);
        detail::left_multiply_pi_x(u, mask);
        t_prev = t;
    }
    left_multiply_free(u, t_half_s - t_prev);
    detail::left_multiply_pi_x(u, all_mask);  // terminal pulses on all qubits
    return u;
}

/// Haar-distributed random unitary: complex Ginibre matrix, QR
/// orthonormalization, column phases corrected by the phases of the
/// triangular factor's diagonal. Deterministic in the seed.
inline DenseUnitary haar_unitary(std::uint64_t rng_seed, int n) {
    if (n < 1 || n > dense_max_qubits) throw std::invalid_argument("haar_unitary: bad qubit count");
    const auto d = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    Rng rng(rng_seed);
    Eigen::MatrixXcd z(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) z(r, c) = cplx{rng.gaussian(), rng.gaussian()};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::VectorXcd rdiag = qr.matrixQR().diagonal();
    for (Eigen::Index c = 0; c < d; ++c) {
        double mag = std::abs(rdiag(c));
        q.col(c) *= (mag > 0.0) ? rdiag(c) / mag : cplx{1.0, 0.0};
    }
    return q;
}

}  // namespace designham
