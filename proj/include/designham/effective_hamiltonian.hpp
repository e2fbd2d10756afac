#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "designham/schedule.hpp"
#include "designham/spin_system.hpp"

namespace designham {

/// Sign of the single-qubit refocusing factor: the effective offset is
/// refocused_offset_sign * (1 - 2*lambda) * Omega. Fixed by matching the
/// exact piecewise pulse simulation (see oracle_refocusing_propagator and
/// its equivalence tests): a pulse at fraction lambda leaves duration-
/// weighted sign (2*lambda - 1) on the offset term, so the sign is -1.
inline constexpr double refocused_offset_sign = -1.0;

/// A Z-diagonal Hamiltonian H = sum_i a_i sz_i/2 + sum_{i<j} b_ij sz_i sz_j/2
/// with coefficients in rad/s, so evolution phases are coefficient * duration.
struct EffectiveZHamiltonian {
    std::vector<double> a;
    std::vector<std::vector<double>> b;

    int n() const { return static_cast<int>(a.size()); }

    void validate() const {
        auto sz = a.size();
        if (sz == 0) throw std::invalid_argument("EffectiveZHamiltonian: empty");
        if (b.size() != sz) throw std::invalid_argument("EffectiveZHamiltonian: b is not n x n");
        for (double v : a)
            if (!std::isfinite(v)) throw std::invalid_argument("EffectiveZHamiltonian: non-finite a");
        for (std::size_t i = 0; i < sz; ++i) {
            if (b[i].size() != sz) throw std::invalid_argument("EffectiveZHamiltonian: b is not n x n");
            if (b[i][i] != 0.0) throw std::invalid_argument("EffectiveZHamiltonian: b diagonal must be zero");
            for (std::size_t j = 0; j < sz; ++j) {
                if (!std::isfinite(b[i][j]))
                    throw std::invalid_argument("EffectiveZHamiltonian: non-finite b");
                if (b[i][j] != b[j][i])
                    throw std::invalid_argument("EffectiveZHamiltonian: b not symmetric");
            }
        }
    }
};

/// Rotating-frame Hamiltonian of the bare system: a_i = 2*pi*offset_hz,
/// b_ij = pi * J_ij.
inline EffectiveZHamiltonian static_hamiltonian(const SpinSystem& system) {
    EffectiveZHamiltonian h;
    auto sz = static_cast<std::size_t>(system.n);
    h.a.resize(sz);
    h.b.assign(sz, std::vector<double>(sz, 0.0));
    for (std::size_t i = 0; i < sz; ++i) {
        h.a[i] = 2.0 * std::numbers::pi * system.offset_hz[i];
        for (std::size_t j = 0; j < sz; ++j)
            if (i != j) h.b[i][j] = std::numbers::pi * system.coupling_hz[i][j];
    }
    return h;
}

/// Effective Hamiltonian of one refocused half-period. With lambda_i the
/// pulse fraction of the slot holding qubit i:
///   a_i  = refocused_offset_sign * (1 - 2*lambda_i)       * 2*pi*offset_hz[i]
///   b_ij = (1 - 2*|lambda_i - lambda_j|) * pi * J_ij
/// Qubits sharing a slot keep their full mutual coupling.
inline EffectiveZHamiltonian effective_z_hamiltonian(const SpinSystem& system,
                                                     std::span<const double> lambda_m,
                                                     const SlotMap& slot_map) {
    if (lambda_m.size() != static_cast<std::size_t>(slot_map.slots))
        throw std::invalid_argument("effective_z_hamiltonian: lambda length != slot count");
    if (slot_map.slot_of_qubit.size() != static_cast<std::size_t>(system.n))
        throw std::invalid_argument("effective_z_hamiltonian: slot map does not cover the system");
    for (double v : lambda_m)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("effective_z_hamiltonian: lambda outside [0,1]");

    auto sz = static_cast<std::size_t>(system.n);
    std::vector<double> lam(sz);
    for (std::size_t i = 0; i < sz; ++i)
        lam[i] = lambda_m[static_cast<std::size_t>(slot_map.slot_of_qubit[i])];

    EffectiveZHamiltonian h;
    h.a.resize(sz);
    h.b.assign(sz, std::vector<double>(sz, 0.0));
    for (std::size_t i = 0; i < sz; ++i) {
        h.a[i] = refocused_offset_sign * (1.0 - 2.0 * lam[i]) * 2.0 * std::numbers::pi *
                 system.offset_hz[i];
        for (std::size_t j = 0; j < sz; ++j)
            if (i != j)
                h.b[i][j] = (1.0 - 2.0 * std::abs(lam[i] - lam[j])) * std::numbers::pi *
                            system.coupling_hz[i][j];
    }
    return h;
}

enum class HalfPeriodBasis { Z, X };

/// The piecewise generator of an entire run: half-period m covers times
/// ((m-1)*T/2, m*T/2] and evolves under its effective Z Hamiltonian, read in
/// the Z basis for odd m and conjugated by the global Hadamard for even m.
class DesignTimeline {
  public:
    struct Sample {
        const EffectiveZHamiltonian& hamiltonian;
        HalfPeriodBasis basis;
        int halfperiod;  // 1-based
    };

    DesignTimeline(LambdaSchedule schedule, SpinSystem system)
        : schedule_(std::move(schedule)), system_(std::move(system)) {
        schedule_.validate();
        system_.validate();
        if (schedule_.slot_map.slot_of_qubit.size() != static_cast<std::size_t>(system_.n))
            throw std::invalid_argument("DesignTimeline: schedule slot map does not cover the system");
        hams_.reserve(schedule_.lambdas.size());
        for (const auto& row : schedule_.lambdas)
            hams_.push_back(effective_z_hamiltonian(system_, row, schedule_.slot_map));
    }

    const LambdaSchedule& schedule() const { return schedule_; }
    const SpinSystem& system() const { return system_; }
    int n() const { return system_.n; }
    int halfperiods() const { return schedule_.halfperiods(); }
    double period_s() const { return schedule_.period_s; }
    double half_period_s() const { return schedule_.half_period_s(); }
    double horizon_s() const { return schedule_.horizon_s(); }

    static HalfPeriodBasis basis_of_halfperiod(int m) {
        return (m % 2 == 1) ? HalfPeriodBasis::Z : HalfPeriodBasis::X;
    }

    const EffectiveZHamiltonian& halfperiod_hamiltonian(int m) const {
        if (m < 1 || m > halfperiods())
            throw std::out_of_range("DesignTimeline: half-period index out of range");
        return hams_[static_cast<std::size_t>(m - 1)];
    }

    /// Generator at time t: m = ceil(t / (T/2)), exact boundaries belong to
    /// the earlier half-period.
    Sample hamiltonian_at(double t) const {
        if (!(t > 0.0) || t > horizon_s() * (1.0 + 1e-12))
            throw std::out_of_range("DesignTimeline: time outside (0, M*T/2]");
        int m = static_cast<int>(std::ceil(t / half_period_s()));
        if (m < 1) m = 1;
        if (m > halfperiods()) m = halfperiods();
        return {halfperiod_hamiltonian(m), basis_of_halfperiod(m), m};
    }

  private:
    LambdaSchedule schedule_;
    SpinSystem system_;
    std::vector<EffectiveZHamiltonian> hams_;
};

inline DesignTimeline design_timeline(LambdaSchedule schedule, SpinSystem system) {
    return DesignTimeline(std::move(schedule), std::move(system));
}

}  // namespace designham
