#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "designham/effective_hamiltonian.hpp"
#include "designham/parallel.hpp"
#include "designham/pauli.hpp"
#include "designham/propagator.hpp"

namespace designham {

/// Coherence order of a density-operator element |row><col| in the Zeeman
/// representation: the difference of total-magnetization quantum numbers,
/// which reduces to popcount(col) - popcount(row) with bit value 0 standing
/// for the +1/2 eigenstate.
inline int coherence_order(std::uint64_t row_basis, std::uint64_t col_basis, int n) {
    const std::uint64_t d = std::uint64_t{1} << n;
    if (row_basis >= d || col_basis >= d)
        throw std::invalid_argument("coherence_order: basis index out of range");
    return std::popcount(col_basis) - std::popcount(row_basis);
}

/// Intensities I(nu) over coherence orders nu = -n..n, normalized so they
/// sum to 1 for a normalized operator.
struct CoherenceSpectrum {
    int n = 0;
    std::vector<double> intensities;  // index nu + n

    double at(int nu) const {
        if (nu < -n || nu > n) throw std::out_of_range("CoherenceSpectrum: order out of range");
        return intensities[static_cast<std::size_t>(nu + n)];
    }
    double& at(int nu) {
        if (nu < -n || nu > n) throw std::out_of_range("CoherenceSpectrum: order out of range");
        return intensities[static_cast<std::size_t>(nu + n)];
    }
    double sum() const {
        double s = 0.0;
        for (double v : intensities) s += v;
        return s;
    }
};

/// Spectrum of a dense Hermitian operator: I(nu) is the squared Frobenius
/// norm of the order-nu block divided by Tr(rho^2). One O(4^n) pass.
inline CoherenceSpectrum mqc_spectrum(const Eigen::MatrixXcd& rho) {
    const Eigen::Index d = rho.rows();
    if (d < 2 || rho.cols() != d || (d & (d - 1)) != 0)
        throw std::invalid_argument("mqc_spectrum: operator must be 2^n x 2^n");
    const int n = std::countr_zero(static_cast<std::uint64_t>(d));
    double herm_err = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i; j < d; ++j)
            herm_err = std::max(herm_err, std::abs(rho(i, j) - std::conj(rho(j, i))));
    if (herm_err > 1e-8) throw std::invalid_argument("mqc_spectrum: operator is not Hermitian");

    CoherenceSpectrum spec;
    spec.n = n;
    spec.intensities.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
    double total = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        int pc_col = std::popcount(static_cast<std::uint64_t>(j));
        for (Eigen::Index i = 0; i < d; ++i) {
            double w = std::norm(rho(i, j));
            int nu = pc_col - std::popcount(static_cast<std::uint64_t>(i));
            spec.intensities[static_cast<std::size_t>(nu + n)] += w;
            total += w;
        }
    }
    if (!(total > 0.0)) throw std::invalid_argument("mqc_spectrum: zero operator");
    for (double& v : spec.intensities) v /= total;
    return spec;
}

/// Spectrum of U rho0 U^dagger for a Pauli-string initial operator, streaming
/// one column at a time so no 4^n matrix is materialized. The Pauli string is
/// normalized to unit Frobenius norm, so intensities sum to 1.
inline CoherenceSpectrum evolved_mqc_spectrum(const PauliString& rho0, const LayeredPropagator& u,
                                              std::size_t threads = 0) {
    if (rho0.n() != u.n()) throw std::invalid_argument("evolved_mqc_spectrum: size mismatch");
    const int n = u.n();
    const std::uint64_t d = u.dim();
    const std::size_t bins = static_cast<std::size_t>(2 * n + 1);

    std::vector<std::vector<double>> per_column(d);
    parallel_for(
        d,
        [&](std::size_t j) {
            std::vector<cplx> w(d, cplx{0.0, 0.0});
            w[j] = 1.0;
            u.apply_adjoint(w);
            rho0.apply(w);
            u.apply(w);
            std::vector<double> local(bins, 0.0);
            int pc_col = std::popcount(static_cast<std::uint64_t>(j));
            for (std::uint64_t i = 0; i < d; ++i) {
                int nu = pc_col - std::popcount(i);
                local[static_cast<std::size_t>(nu + n)] += std::norm(w[i]);
            }
            per_column[j] = std::move(local);
        },
        threads);

    CoherenceSpectrum spec;
    spec.n = n;
    spec.intensities.assign(bins, 0.0);
    for (std::size_t bin = 0; bin < bins; ++bin) {
        std::vector<double> col(d);
        for (std::uint64_t j = 0; j < d; ++j) col[j] = per_column[j][bin];
        spec.intensities[bin] = pairwise_sum(std::move(col));
    }
    double total = spec.sum();  // = Tr(rho0^2) * d for an unnormalized Pauli
    for (double& v : spec.intensities) v /= total;
    return spec;
}

/// Sampled multiple-quantum signal S(phi) = Tr[phi_z rho(t) phi_z^dag rho(t)].
struct MQSignal {
    std::vector<double> phis;
    std::vector<cplx> values;
};

/// phi = 2*pi*l / points, l = 1..points.
inline std::vector<double> default_phi_grid(int points = 256) {
    if (points < 1) throw std::invalid_argument("default_phi_grid: need at least one point");
    std::vector<double> phis(static_cast<std::size_t>(points));
    for (int l = 1; l <= points; ++l)
        phis[static_cast<std::size_t>(l - 1)] =
            2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(points);
    return phis;
}

/// Signal of a dense evolved operator: for each phi the collective rotation
/// e^{-i M_z phi} is applied entrywise and the overlap trace evaluated in a
/// full O(4^n) pass. Expects Tr(rho_t^2) = 1.
inline MQSignal mq_signal_dense(const Eigen::MatrixXcd& rho_t, std::span<const double> phis,
                                std::size_t threads = 0) {
    if (phis.empty()) throw std::invalid_argument("mq_signal: empty angle grid");
    const Eigen::Index d = rho_t.rows();
    if (d < 2 || rho_t.cols() != d || (d & (d - 1)) != 0)
        throw std::invalid_argument("mq_signal: operator must be 2^n x 2^n");
    const int n = std::countr_zero(static_cast<std::uint64_t>(d));

    std::vector<double> mz(static_cast<std::size_t>(d));
    for (Eigen::Index b = 0; b < d; ++b)
        mz[static_cast<std::size_t>(b)] =
            0.5 * (n - 2 * std::popcount(static_cast<std::uint64_t>(b)));

    MQSignal sig;
    sig.phis.assign(phis.begin(), phis.end());
    sig.values.resize(phis.size());
    parallel_for(
        phis.size(),
        [&](std::size_t p) {
            const double phi = phis[p];
            // Tr[phi_z rho phi_z^dag rho] = sum_ij e^{-i phi (m_i - m_j)} rho_ij rho_ji
            std::vector<cplx> row_phase(static_cast<std::size_t>(d));
            for (Eigen::Index b = 0; b < d; ++b)
                row_phase[static_cast<std::size_t>(b)] =
                    std::polar(1.0, -phi * mz[static_cast<std::size_t>(b)]);
            cplx acc{0.0, 0.0};
            for (Eigen::Index j = 0; j < d; ++j) {
                cplx col = std::conj(row_phase[static_cast<std::size_t>(j)]);
                cplx inner{0.0, 0.0};
                for (Eigen::Index i = 0; i < d; ++i)
                    inner += row_phase[static_cast<std::size_t>(i)] * rho_t(i, j) * rho_t(j, i);
                acc += col * inner;
            }
            sig.values[p] = acc;
        },
        threads);
    return sig;
}

/// Signal of U rho0 U^dagger for a Pauli-string initial operator, streaming
/// columns. Per column the weight is bucketed by row magnetization sector;
/// the per-phi sum then runs over the (n+1)^2 sector table.
inline MQSignal mq_signal(const PauliString& rho0, const LayeredPropagator& u,
                          std::span<const double> phis, std::size_t threads = 0) {
    if (phis.empty()) throw std::invalid_argument("mq_signal: empty angle grid");
    if (rho0.n() != u.n()) throw std::invalid_argument("mq_signal: size mismatch");
    const int n = u.n();
    const std::uint64_t d = u.dim();
    const std::size_t sectors = static_cast<std::size_t>(n + 1);

    // W[p][q] = sum over entries with row popcount p, column popcount q of |rho_ij|^2
    std::vector<std::vector<double>> per_column(d);
    parallel_for(
        d,
        [&](std::size_t j) {
            std::vector<cplx> w(d, cplx{0.0, 0.0});
            w[j] = 1.0;
            u.apply_adjoint(w);
            rho0.apply(w);
            u.apply(w);
            std::vector<double> rows(sectors, 0.0);
            for (std::uint64_t i = 0; i < d; ++i)
                rows[static_cast<std::size_t>(std::popcount(i))] += std::norm(w[i]);
            per_column[j] = std::move(rows);
        },
        threads);

    std::vector<std::vector<double>> table(sectors, std::vector<double>(sectors, 0.0));
    double total = 0.0;
    for (std::uint64_t j = 0; j < d; ++j) {
        auto q = static_cast<std::size_t>(std::popcount(j));
        for (std::size_t p = 0; p < sectors; ++p) {
            table[p][q] += per_column[j][p];
            total += per_column[j][p];
        }
    }
    if (!(total > 0.0)) throw std::invalid_argument("mq_signal: zero operator");

    MQSignal sig;
    sig.phis.assign(phis.begin(), phis.end());
    sig.values.resize(phis.size());
    for (std::size_t idx = 0; idx < phis.size(); ++idx) {
        const double phi = phis[idx];
        cplx acc{0.0, 0.0};
        for (std::size_t p = 0; p < sectors; ++p) {
            double mp = 0.5 * (n - 2.0 * static_cast<double>(p));
            for (std::size_t q = 0; q < sectors; ++q) {
                double mq = 0.5 * (n - 2.0 * static_cast<double>(q));
                acc += std::polar(table[p][q] / total, -phi * (mp - mq));
            }
        }
        sig.values[idx] = acc;
    }
    return sig;
}

/// Extracts I(nu) from a sampled signal by discrete Fourier transform at the
/// integer frequencies -n..n. The grid must be uniform with spacing 2*pi/P
/// and at least 2n+1 points; frequencies beyond |n| must carry no weight.
inline CoherenceSpectrum spectrum_from_signal(const MQSignal& signal, int n) {
    const std::size_t points = signal.phis.size();
    if (points < static_cast<std::size_t>(2 * n + 1))
        throw std::invalid_argument("spectrum_from_signal: need at least 2n+1 grid points");
    if (signal.values.size() != points)
        throw std::invalid_argument("spectrum_from_signal: phis/values length mismatch");
    const double step = 2.0 * std::numbers::pi / static_cast<double>(points);
    for (std::size_t l = 1; l < points; ++l)
        if (std::abs((signal.phis[l] - signal.phis[l - 1]) - step) > 1e-9)
            throw std::invalid_argument("spectrum_from_signal: grid is not uniform over [0, 2pi)");

    auto bin = [&](long freq) {
        cplx acc{0.0, 0.0};
        for (std::size_t l = 0; l < points; ++l)
            acc += signal.values[l] * std::polar(1.0, static_cast<double>(freq) * signal.phis[l]);
        return acc / static_cast<double>(points);
    };

    CoherenceSpectrum spec;
    spec.n = n;
    spec.intensities.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
    for (int nu = -n; nu <= n; ++nu) spec.intensities[static_cast<std::size_t>(nu + n)] = bin(nu).real();

    // aliasing guard: all representable frequencies beyond |n| must vanish
    long half = static_cast<long>(points) / 2;
    for (long f = -half + 1; f <= half; ++f) {
        if (std::abs(f) <= n) continue;
        if (std::abs(bin(f)) > 1e-9)
            throw std::runtime_error("spectrum_from_signal: signal carries frequencies beyond n");
    }
    return spec;
}

/// Reference profile of a fully scrambled operator: I(nu) = C(2n, n-nu)/4^n.
/// Binomials are exact in 64-bit integers for every allowed n, and the
/// division by 4^n is exact in binary floating point, so the profile sums to
/// one exactly.
struct TypicalProfile {
    int n = 0;
    std::vector<double> intensities;  // index nu + n

    double at(int nu) const {
        if (nu < -n || nu > n) throw std::out_of_range("TypicalProfile: order out of range");
        return intensities[static_cast<std::size_t>(nu + n)];
    }
};

inline TypicalProfile typical_profile(int n) {
    if (n < 1 || n > 26) throw std::invalid_argument("typical_profile: n out of range");
    // Pascal triangle row 2n
    std::vector<std::uint64_t> row(static_cast<std::size_t>(2 * n + 1), 0);
    row[0] = 1;
    for (int r = 1; r <= 2 * n; ++r)
        for (int c = r; c >= 1; --c) row[static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(c - 1)];
    const double denom = std::ldexp(1.0, 2 * n);  // 4^n
    TypicalProfile prof;
    prof.n = n;
    prof.intensities.resize(static_cast<std::size_t>(2 * n + 1));
    for (int nu = -n; nu <= n; ++nu)
        prof.intensities[static_cast<std::size_t>(nu + n)] =
            static_cast<double>(row[static_cast<std::size_t>(n - nu)]) / denom;
    return prof;
}

/// Normalized Gaussian approximation exp(-nu^2/n), for plots only.
inline std::vector<double> typical_profile_gaussian(int n) {
    std::vector<double> g(static_cast<std::size_t>(2 * n + 1));
    double sum = 0.0;
    for (int nu = -n; nu <= n; ++nu) {
        double v = std::exp(-static_cast<double>(nu) * nu / static_cast<double>(n));
        g[static_cast<std::size_t>(nu + n)] = v;
        sum += v;
    }
    for (double& v : g) v /= sum;
    return g;
}

/// Relative deviation ||I - I_typical|| / ||I_typical|| in Euclidean norm
/// over the full signed order vector.
inline double deviation_epsilon(const CoherenceSpectrum& spectrum, const TypicalProfile& ref) {
    if (spectrum.n != ref.n) throw std::invalid_argument("deviation_epsilon: dimension mismatch");
    double diff2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < ref.intensities.size(); ++i) {
        double delta = spectrum.intensities[i] - ref.intensities[i];
        diff2 += delta * delta;
        ref2 += ref.intensities[i] * ref.intensities[i];
    }
    return std::sqrt(diff2) / std::sqrt(ref2);
}

/// Spectra along the evolution, built by extending one propagator
/// incrementally across the sorted sample times.
struct GrowthPoint {
    double t_s = 0.0;
    CoherenceSpectrum spectrum;
    double epsilon = 0.0;
};

inline std::vector<GrowthPoint> mqc_growth_series(const PauliString& rho0,
                                                  const DesignTimeline& timeline,
                                                  std::span<const double> sample_times,
                                                  std::size_t threads = 0) {
    if (rho0.n() != timeline.n()) throw std::invalid_argument("mqc_growth_series: size mismatch");
    std::vector<double> times(sample_times.begin(), sample_times.end());
    for (double t : times)
        if (t < 0.0 || t > timeline.horizon_s() * (1.0 + 1e-12))
            throw std::out_of_range("mqc_growth_series: time outside the schedule horizon");
    std::vector<std::size_t> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    auto ref = typical_profile(timeline.n());
    std::vector<GrowthPoint> out(times.size());
    LayeredPropagator u(timeline.n());
    double t_prev = 0.0;
    for (std::size_t idx : order) {
        append_evolution(u, timeline, t_prev, times[idx]);
        t_prev = times[idx];
        GrowthPoint point;
        point.t_s = times[idx];
        point.spectrum = evolved_mqc_spectrum(rho0, u, threads);
        point.epsilon = deviation_epsilon(point.spectrum, ref);
        out[idx] = std::move(point);
    }
    return out;
}

}  // namespace designham
