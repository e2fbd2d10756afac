#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "designham/effective_hamiltonian.hpp"
#include "designham/parallel.hpp"

namespace designham {

using cplx = std::complex<double>;

/// In-place n-fold Hadamard transform of a length-2^n vector, including the
/// 1/sqrt(2^n) normalization. O(2^n * n) butterfly.
inline void walsh_hadamard_apply(std::span<cplx> v) {
    const std::size_t d = v.size();
    if (d == 0 || (d & (d - 1)) != 0)
        throw std::invalid_argument("walsh_hadamard_apply: length must be a power of two");
    for (std::size_t h = 1; h < d; h <<= 1) {
        for (std::size_t base = 0; base < d; base += h << 1) {
            for (std::size_t i = base; i < base + h; ++i) {
                cplx x = v[i], y = v[i + h];
                v[i] = x + y;
                v[i + h] = x - y;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto& x : v) x *= scale;
}

/// Eigenvalues E(b) of a Z-diagonal Hamiltonian over all basis states, in
/// rad/s: E(b) = sum_i a_i z_i/2 + sum_{i<j} b_ij z_i z_j / 2, z_i = +1 for
/// bit value 0 and -1 for bit value 1.
inline std::vector<double> z_eigenvalues(const EffectiveZHamiltonian& h) {
    const int n = h.n();
    if (n > 26) throw std::invalid_argument("z_eigenvalues: system too large");
    const std::uint64_t d = std::uint64_t{1} << n;
    std::vector<double> e(d, 0.0);
    for (std::uint64_t b = 0; b < d; ++b) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double zi = ((b >> i) & 1) ? -1.0 : 1.0;
            acc += 0.5 * h.a[static_cast<std::size_t>(i)] * zi;
            for (int j = i + 1; j < n; ++j) {
                double zj = ((b >> j) & 1) ? -1.0 : 1.0;
                acc += 0.5 * h.b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * zi * zj;
            }
        }
        e[b] = acc;
    }
    return e;
}

/// Diagonal propagator exp(-i H tau) of a Z-diagonal Hamiltonian.
struct ZPhaseDiagonal {
    int n = 0;
    std::vector<cplx> phases;  // entry b = exp(-i E(b) tau)
};

inline ZPhaseDiagonal z_phase_diagonal(const EffectiveZHamiltonian& h, double tau_s) {
    if (!(tau_s >= 0.0)) throw std::invalid_argument("z_phase_diagonal: tau must be >= 0");
    ZPhaseDiagonal diag;
    diag.n = h.n();
    auto energies = z_eigenvalues(h);
    diag.phases.resize(energies.size());
    for (std::size_t b = 0; b < energies.size(); ++b)
        diag.phases[b] = std::polar(1.0, -energies[b] * tau_s);
    return diag;
}

/// A unitary represented as an ordered sequence of Z-diagonal phase layers
/// and global Hadamard layers. Layer 0 acts first on a state vector; as a
/// matrix product the earliest layer is the rightmost factor.
///
/// With optimization on (the default), pushing a Hadamard directly after a
/// Hadamard cancels the pair, and consecutive diagonal layers are fused by
/// elementwise multiplication; both rewrites leave the operator unchanged.
class LayeredPropagator {
  public:
    struct DiagLayer {
        std::vector<cplx> phases;
    };
    struct HadamardLayer {};
    using Layer = std::variant<DiagLayer, HadamardLayer>;

    explicit LayeredPropagator(int n, bool optimize = true) : n_(n), optimize_(optimize) {
        if (n < 1 || n > 26) throw std::invalid_argument("LayeredPropagator: bad qubit count");
    }

    static LayeredPropagator identity(int n) { return LayeredPropagator(n); }

    int n() const { return n_; }
    std::uint64_t dim() const { return std::uint64_t{1} << n_; }
    std::size_t layer_count() const { return layers_.size(); }
    const std::vector<Layer>& layers() const { return layers_; }

    void push_diagonal(std::vector<cplx> phases) {
        if (phases.size() != dim())
            throw std::invalid_argument("LayeredPropagator: diagonal layer has wrong dimension");
        if (optimize_ && !layers_.empty()) {
            if (auto* prev = std::get_if<DiagLayer>(&layers_.back())) {
                for (std::size_t b = 0; b < phases.size(); ++b) prev->phases[b] *= phases[b];
                return;
            }
        }
        layers_.push_back(DiagLayer{std::move(phases)});
    }

    void push_diagonal(const ZPhaseDiagonal& diag) {
        if (diag.n != n_)
            throw std::invalid_argument("LayeredPropagator: diagonal layer has wrong qubit count");
        push_diagonal(diag.phases);
    }

    void push_global_hadamard() {
        if (optimize_ && !layers_.empty() && std::holds_alternative<HadamardLayer>(layers_.back())) {
            layers_.pop_back();
            return;
        }
        layers_.push_back(HadamardLayer{});
    }

    /// v := U v.
    void apply(std::span<cplx> v) const {
        if (v.size() != dim()) throw std::invalid_argument("LayeredPropagator::apply: dimension mismatch");
        for (const auto& layer : layers_) {
            if (const auto* diag = std::get_if<DiagLayer>(&layer)) {
                for (std::size_t b = 0; b < v.size(); ++b) v[b] *= diag->phases[b];
            } else {
                walsh_hadamard_apply(v);
            }
        }
    }

    /// v := U^dagger v.
    void apply_adjoint(std::span<cplx> v) const {
        if (v.size() != dim())
            throw std::invalid_argument("LayeredPropagator::apply_adjoint: dimension mismatch");
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
            if (const auto* diag = std::get_if<DiagLayer>(&*it)) {
                for (std::size_t b = 0; b < v.size(); ++b) v[b] *= std::conj(diag->phases[b]);
            } else {
                walsh_hadamard_apply(v);
            }
        }
    }

  private:
    int n_;
    bool optimize_;
    std::vector<Layer> layers_;
};

namespace detail {

/// Appends exp(-i H tau), conjugated by the global Hadamard for X-basis
/// half-periods.
inline void append_halfperiod_segment(LayeredPropagator& u, const EffectiveZHamiltonian& h,
                                      HalfPeriodBasis basis, double tau_s) {
    if (tau_s == 0.0) return;
    auto diag = z_phase_diagonal(h, tau_s);
    if (basis == HalfPeriodBasis::X) {
        u.push_global_hadamard();
        u.push_diagonal(diag);
        u.push_global_hadamard();
    } else {
        u.push_diagonal(diag);
    }
}

}  // namespace detail

/// Extends `u` by the timeline evolution from t_from to t_to, splitting at
/// half-period boundaries.
inline void append_evolution(LayeredPropagator& u, const DesignTimeline& timeline, double t_from,
                             double t_to) {
    if (t_from < 0.0 || t_to < t_from || t_to > timeline.horizon_s() * (1.0 + 1e-12))
        throw std::out_of_range("append_evolution: time range outside the schedule horizon");
    if (u.n() != timeline.n()) throw std::invalid_argument("append_evolution: qubit count mismatch");
    const double half = timeline.half_period_s();
    double t = t_from;
    while (t_to - t > half * 1e-12) {
        // half-period containing (t, ...]: boundaries belong to the earlier one
        int m = static_cast<int>(std::floor(t / half + 1e-9)) + 1;
        if (m > timeline.halfperiods()) m = timeline.halfperiods();
        double seg_end = std::min(t_to, m * half);
        detail::append_halfperiod_segment(u, timeline.halfperiod_hamiltonian(m),
                                          DesignTimeline::basis_of_halfperiod(m), seg_end - t);
        t = seg_end;
    }
}

/// Propagator of the first `upto_halfperiods` half-periods.
inline LayeredPropagator design_propagator(const DesignTimeline& timeline, int upto_halfperiods) {
    if (upto_halfperiods < 0 || upto_halfperiods > timeline.halfperiods())
        throw std::out_of_range("design_propagator: half-period count out of range");
    LayeredPropagator u(timeline.n());
    for (int m = 1; m <= upto_halfperiods; ++m)
        detail::append_halfperiod_segment(u, timeline.halfperiod_hamiltonian(m),
                                          DesignTimeline::basis_of_halfperiod(m),
                                          timeline.half_period_s());
    return u;
}

/// Propagator at an arbitrary time within the horizon; t = 0 gives the
/// identity.
inline LayeredPropagator propagator_at_time(const DesignTimeline& timeline, double t) {
    LayeredPropagator u(timeline.n());
    append_evolution(u, timeline, 0.0, t);
    return u;
}

/// Tr(U V^dagger), streaming one basis column at a time. Column work items
/// are independent; the reduction is deterministic.
inline cplx trace_overlap(const LayeredPropagator& u, const LayeredPropagator& v,
                          std::size_t threads = 0) {
    if (u.n() != v.n()) throw std::invalid_argument("trace_overlap: dimension mismatch");
    const std::uint64_t d = u.dim();
    std::vector<cplx> terms(d);
    parallel_for(
        d,
        [&](std::size_t b) {
            std::vector<cplx> w(d, cplx{0.0, 0.0});
            w[b] = 1.0;
            v.apply_adjoint(w);
            u.apply(w);
            terms[b] = w[b];
        },
        threads);
    return pairwise_sum(std::move(terms));
}

/// U rho U^dagger for a dense operator. Applies the layer stack to all
/// columns, then to all rows via a conjugate-transpose pass. Guarded to
/// n <= 10; larger workloads stream columns instead of materializing.
inline Eigen::MatrixXcd conjugate_operator(const LayeredPropagator& u, const Eigen::MatrixXcd& rho,
                                           std::size_t threads = 0) {
    const auto d = static_cast<Eigen::Index>(u.dim());
    if (rho.rows() != d || rho.cols() != d)
        throw std::invalid_argument("conjugate_operator: dimension mismatch");
    if (u.n() > 10) throw std::invalid_argument("conjugate_operator: dense form limited to n <= 10");
    Eigen::MatrixXcd out = rho;
    auto apply_to_columns = [&](Eigen::MatrixXcd& m) {
        parallel_for(
            static_cast<std::size_t>(d),
            [&](std::size_t j) {
                std::vector<cplx> col(static_cast<std::size_t>(d));
                for (Eigen::Index i = 0; i < d; ++i) col[static_cast<std::size_t>(i)] = m(i, static_cast<Eigen::Index>(j));
                u.apply(col);
                for (Eigen::Index i = 0; i < d; ++i) m(i, static_cast<Eigen::Index>(j)) = col[static_cast<std::size_t>(i)];
            },
            threads);
    };
    apply_to_columns(out);            // U rho
    out.adjointInPlace();             // (U rho)^dagger = rho^dagger U^dagger
    apply_to_columns(out);            // U rho^dagger U^dagger
    out.adjointInPlace();             // U rho U^dagger
    return out;
}

/// Dense matrix of a layered propagator (n <= 10).
inline Eigen::MatrixXcd to_dense(const LayeredPropagator& u, std::size_t threads = 0) {
    if (u.n() > 10) throw std::invalid_argument("to_dense: limited to n <= 10");
    const auto d = static_cast<Eigen::Index>(u.dim());
    Eigen::MatrixXcd m(d, d);
    parallel_for(
        static_cast<std::size_t>(d),
        [&](std::size_t j) {
            std::vector<cplx> col(static_cast<std::size_t>(d), cplx{0.0, 0.0});
            col[j] = 1.0;
            u.apply(col);
            for (Eigen::Index i = 0; i < d; ++i) m(i, static_cast<Eigen::Index>(j)) = col[static_cast<std::size_t>(i)];
        },
        threads);
    return m;
}

}  // namespace designham
