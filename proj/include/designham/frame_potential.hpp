#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "designham/dense.hpp"
#include "designham/parallel.hpp"
#include "designham/pauli.hpp"
#include "designham/propagator.hpp"
#include "designham/rng.hpp"
#include "designham/schedule.hpp"

namespace designham {

/// An ensemble of unitaries, each held either as a layered propagator or as
/// a dense matrix. Small members are densified so pairwise overlaps are a
/// single elementwise pass.
struct UnitaryEnsemble {
    using Member = std::variant<DenseUnitary, LayeredPropagator>;

    int n = 0;
    std::vector<Member> members;
    std::string provenance;

    std::uint64_t dim() const { return std::uint64_t{1} << n; }
    std::size_t size() const { return members.size(); }

    void add(LayeredPropagator u, bool densify = true) {
        if (u.n() != n) throw std::invalid_argument("UnitaryEnsemble: member qubit count mismatch");
        if (densify && n <= 8)
            members.emplace_back(to_dense(u));
        else
            members.emplace_back(std::move(u));
    }

    void add(DenseUnitary u) {
        if (u.rows() != static_cast<Eigen::Index>(dim()))
            throw std::invalid_argument("UnitaryEnsemble: member dimension mismatch");
        members.emplace_back(std::move(u));
    }
};

/// Tr(U V^dagger) for any mix of member representations.
inline cplx member_overlap(const UnitaryEnsemble::Member& u, const UnitaryEnsemble::Member& v) {
    if (const auto* ud = std::get_if<DenseUnitary>(&u)) {
        if (const auto* vd = std::get_if<DenseUnitary>(&v))
            return (ud->array() * vd->array().conjugate()).sum();
        // Tr(U V^dagger) = conj(Tr(V U^dagger))
        return std::conj(member_overlap(v, u));
    }
    const auto& ul = std::get<LayeredPropagator>(u);
    if (const auto* vd = std::get_if<DenseUnitary>(&v)) {
        const auto d = static_cast<std::uint64_t>(vd->rows());
        std::vector<cplx> terms(d);
        std::vector<cplx> w(d);
        for (std::uint64_t b = 0; b < d; ++b) {
            for (std::uint64_t j = 0; j < d; ++j)
                w[j] = std::conj((*vd)(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)));
            ul.apply(w);
            terms[b] = w[b];
        }
        return pairwise_sum(std::move(terms));
    }
    return trace_overlap(ul, std::get<LayeredPropagator>(v), 1);
}

/// Sampled frame potential: f_tilde is the off-diagonal pair mean, f the
/// full-sum reconstruction f = d^{2k}/|E| + (|E|-1)/|E| * f_tilde.
struct FramePotentialEstimate {
    int k = 0;
    double f_tilde = 0.0;
    double f = 0.0;
    std::size_t ensemble_size = 0;
    std::size_t pair_count = 0;  // distinct unordered pairs evaluated
};

namespace detail {

/// |Tr(U_i U_j^dagger)|^2 for the requested unordered pairs, evaluated in
/// parallel with a deterministic layout.
inline std::vector<double> overlap_squares(const UnitaryEnsemble& ensemble,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                           std::size_t threads) {
    std::vector<double> sq(pairs.size());
    parallel_for(
        pairs.size(),
        [&](std::size_t p) {
            cplx tr = member_overlap(ensemble.members[pairs[p].first], ensemble.members[pairs[p].second]);
            sq[p] = std::norm(tr);
        },
        threads);
    return sq;
}

inline std::vector<std::pair<std::size_t, std::size_t>> all_unordered_pairs(std::size_t m) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(m * (m - 1) / 2);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
    return pairs;
}

}  // namespace detail

/// Exact k-th frame potential: (1/|E|^2) sum_{i,j} |Tr(U_i U_j^dagger)|^{2k},
/// diagonal included.
inline double frame_potential_exact(const UnitaryEnsemble& ensemble, int k, std::size_t threads = 0) {
    if (ensemble.members.empty()) throw std::invalid_argument("frame_potential_exact: empty ensemble");
    if (k < 1) throw std::invalid_argument("frame_potential_exact: k must be >= 1");
    const auto m = static_cast<double>(ensemble.size());
    const double d = static_cast<double>(ensemble.dim());
    auto pairs = detail::all_unordered_pairs(ensemble.size());
    auto sq = detail::overlap_squares(ensemble, pairs, threads);
    std::vector<double> powered(sq.size());
    for (std::size_t p = 0; p < sq.size(); ++p) powered[p] = std::pow(sq[p], k);
    double off = pairwise_sum(std::move(powered));
    double diag = m * std::pow(d * d, k);
    return (diag + 2.0 * off) / (m * m);
}

/// Off-diagonal estimator over distinct pairs: all of them when their number
/// is at most max_pairs, otherwise a seeded uniform subsample without
/// replacement.
inline FramePotentialEstimate frame_potential_estimate(const UnitaryEnsemble& ensemble, int k,
                                                       std::size_t max_pairs, std::uint64_t rng_seed,
                                                       std::size_t threads = 0) {
    if (ensemble.size() < 2)
        throw std::invalid_argument("frame_potential_estimate: need at least two members");
    if (k < 1) throw std::invalid_argument("frame_potential_estimate: k must be >= 1");
    auto pairs = detail::all_unordered_pairs(ensemble.size());
    if (pairs.size() > max_pairs) {
        Rng rng(rng_seed);
        for (std::size_t i = 0; i < max_pairs; ++i) {
            std::size_t j = i + rng.uniform_below(pairs.size() - i);
            std::swap(pairs[i], pairs[j]);
        }
        pairs.resize(max_pairs);
    }
    auto sq = detail::overlap_squares(ensemble, pairs, threads);

    FramePotentialEstimate est;
    est.k = k;
    est.ensemble_size = ensemble.size();
    est.pair_count = pairs.size();
    std::vector<double> powered(sq.size());
    for (std::size_t p = 0; p < sq.size(); ++p) powered[p] = std::pow(sq[p], k);
    est.f_tilde = pairwise_sum(std::move(powered)) / static_cast<double>(pairs.size());
    const auto m = static_cast<double>(ensemble.size());
    const double d = static_cast<double>(ensemble.dim());
    est.f = std::pow(d * d, k) / m + (m - 1.0) / m * est.f_tilde;
    return est;
}

/// One overlap evaluation per pair, reused across every requested k.
inline std::vector<FramePotentialEstimate> frame_potential_estimate_multi(
    const UnitaryEnsemble& ensemble, std::span<const int> k_list, std::size_t max_pairs,
    std::uint64_t rng_seed, std::size_t threads = 0) {
    if (ensemble.size() < 2)
        throw std::invalid_argument("frame_potential_estimate: need at least two members");
    auto pairs = detail::all_unordered_pairs(ensemble.size());
    if (pairs.size() > max_pairs) {
        Rng rng(rng_seed);
        for (std::size_t i = 0; i < max_pairs; ++i) {
            std::size_t j = i + rng.uniform_below(pairs.size() - i);
            std::swap(pairs[i], pairs[j]);
        }
        pairs.resize(max_pairs);
    }
    auto sq = detail::overlap_squares(ensemble, pairs, threads);
    const auto m = static_cast<double>(ensemble.size());
    const double d = static_cast<double>(ensemble.dim());
    std::vector<FramePotentialEstimate> out;
    out.reserve(k_list.size());
    for (int k : k_list) {
        if (k < 1) throw std::invalid_argument("frame_potential_estimate: k must be >= 1");
        FramePotentialEstimate est;
        est.k = k;
        est.ensemble_size = ensemble.size();
        est.pair_count = pairs.size();
        std::vector<double> powered(sq.size());
        for (std::size_t p = 0; p < sq.size(); ++p) powered[p] = std::pow(sq[p], k);
        est.f_tilde = pairwise_sum(std::move(powered)) / static_cast<double>(pairs.size());
        est.f = std::pow(d * d, k) / m + (m - 1.0) / m * est.f_tilde;
        out.push_back(est);
    }
    return out;
}

/// Ensemble of design-Hamiltonian propagators at evolution time t: one
/// independently sampled schedule per member, seeded from the master seed.
inline UnitaryEnsemble design_ensemble(const SpinSystem& system, const SlotMap& slot_map,
                                       double period_s, double t_s, std::size_t size,
                                       std::uint64_t master_seed, std::size_t threads = 0) {
    if (size == 0) throw std::invalid_argument("design_ensemble: empty ensemble");
    int halfperiods = std::max(1, static_cast<int>(std::ceil(t_s / (period_s / 2.0) - 1e-9)));
    UnitaryEnsemble ensemble;
    ensemble.n = system.n;
    ensemble.provenance = "design-hamiltonian t=" + std::to_string(t_s) + "s";
    ensemble.members.resize(size);
    parallel_for(
        size,
        [&](std::size_t i) {
            auto schedule =
                sample_lambda(derive_seed(master_seed, i), slot_map, halfperiods, period_s);
            DesignTimeline timeline(std::move(schedule), system);
            auto u = propagator_at_time(timeline, t_s);
            if (system.n <= 8)
                ensemble.members[i] = to_dense(u, 1);
            else
                ensemble.members[i] = std::move(u);
        },
        threads);
    return ensemble;
}

/// Ensemble of seeded Haar-random unitaries.
inline UnitaryEnsemble haar_ensemble(int n, std::size_t size, std::uint64_t master_seed,
                                     std::size_t threads = 0) {
    if (size == 0) throw std::invalid_argument("haar_ensemble: empty ensemble");
    UnitaryEnsemble ensemble;
    ensemble.n = n;
    ensemble.provenance = "haar";
    ensemble.members.resize(size);
    parallel_for(
        size, [&](std::size_t i) { ensemble.members[i] = haar_unitary(derive_seed(master_seed, i), n); },
        threads);
    return ensemble;
}

/// F~(k) at each requested time, from ensemble_size independently scheduled
/// evolutions.
struct ConvergenceCurve {
    std::vector<double> abscissa;
    std::vector<double> values;
    int k = 0;
};

inline ConvergenceCurve convergence_vs_time(const SpinSystem& system, const SlotMap& slot_map,
                                            double period_s, std::span<const double> times, int k,
                                            std::size_t ensemble_size, std::uint64_t rng_seed,
                                            std::size_t max_pairs = SIZE_MAX,
                                            std::size_t threads = 0) {
    if (times.empty()) throw std::invalid_argument("convergence_vs_time: no times requested");
    double t_max = *std::max_element(times.begin(), times.end());
    double t_min = *std::min_element(times.begin(), times.end());
    if (t_min < 0.0) throw std::invalid_argument("convergence_vs_time: negative time");
    int halfperiods = std::max(1, static_cast<int>(std::ceil(t_max / (period_s / 2.0) - 1e-9)));

    std::vector<DesignTimeline> timelines;
    timelines.reserve(ensemble_size);
    for (std::size_t i = 0; i < ensemble_size; ++i)
        timelines.emplace_back(sample_lambda(derive_seed(rng_seed, i), slot_map, halfperiods, period_s),
                               system);

    ConvergenceCurve curve;
    curve.k = k;
    const double d2k = std::pow(static_cast<double>(std::uint64_t{1} << system.n) *
                                    static_cast<double>(std::uint64_t{1} << system.n),
                                k);
    for (double t : times) {
        curve.abscissa.push_back(t);
        if (t == 0.0) {
            // all members are the identity
            curve.values.push_back(d2k);
            continue;
        }
        UnitaryEnsemble ensemble;
        ensemble.n = system.n;
        ensemble.provenance = "design-hamiltonian convergence";
        ensemble.members.resize(ensemble_size);
        parallel_for(
            ensemble_size,
            [&](std::size_t i) {
                auto u = propagator_at_time(timelines[i], t);
                if (system.n <= 8)
                    ensemble.members[i] = to_dense(u, 1);
                else
                    ensemble.members[i] = std::move(u);
            },
            threads);
        auto est = frame_potential_estimate(ensemble, k, max_pairs, derive_seed(rng_seed, 1u << 20),
                                            threads);
        curve.values.push_back(est.f_tilde);
    }
    return curve;
}

/// Frame potential through the averaged-correlator identity: with Pauli
/// operators normalized to unit Frobenius norm,
///   F(k) = sum over tuples (A_1..A_k, B_1..B_k) of
///          | avg_i Tr(A_1 U_i B_1 U_i^dag ... A_k U_i B_k U_i^dag) |^2.
/// Enumerates all 4^(2nk) tuples; feasible only for n*k <= 4.
inline double otoc_frame_potential(const UnitaryEnsemble& ensemble, int k, std::size_t threads = 0) {
    if (ensemble.members.empty()) throw std::invalid_argument("otoc_frame_potential: empty ensemble");
    if (k < 1) throw std::invalid_argument("otoc_frame_potential: k must be >= 1");
    const int n = ensemble.n;
    if (n * k > 4)
        throw std::invalid_argument("otoc_frame_potential: tuple enumeration infeasible for n*k > 4");
    const auto d = static_cast<Eigen::Index>(ensemble.dim());
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    // normalized Pauli basis
    const std::size_t np = std::size_t{1} << (2 * n);
    std::vector<Eigen::MatrixXcd> paulis(np);
    {
        std::vector<PauliLetter> letters(static_cast<std::size_t>(n));
        for (std::size_t code = 0; code < np; ++code) {
            std::size_t c = code;
            for (int q = 0; q < n; ++q) {
                letters[static_cast<std::size_t>(q)] = static_cast<PauliLetter>(c & 3);
                c >>= 2;
            }
            paulis[code] = pauli_dense(PauliString(letters)) * inv_sqrt_d;
        }
    }

    // per member: dense form and the products A * (U B U^dagger)
    const std::size_t m = ensemble.size();
    std::vector<std::vector<Eigen::MatrixXcd>> blocks(m);  // blocks[i][a*np+b]
    for (std::size_t i = 0; i < m; ++i) {
        Eigen::MatrixXcd u;
        if (const auto* dense = std::get_if<DenseUnitary>(&ensemble.members[i]))
            u = *dense;
        else
            u = to_dense(std::get<LayeredPropagator>(ensemble.members[i]));
        std::vector<Eigen::MatrixXcd> conj(np);
        for (std::size_t b = 0; b < np; ++b) conj[b] = u * paulis[b] * u.adjoint();
        blocks[i].resize(np * np);
        for (std::size_t a = 0; a < np; ++a)
            for (std::size_t b = 0; b < np; ++b) blocks[i][a * np + b] = paulis[a] * conj[b];
    }

    // enumerate tuples; tuple index encodes (a_1, b_1, ..., a_k, b_k) base 4^n
    std::size_t tuple_count = 1;
    for (int level = 0; level < 2 * k; ++level) tuple_count *= np;
    std::vector<double> contributions(tuple_count);
    parallel_for(
        tuple_count,
        [&](std::size_t code) {
            std::size_t c = code;
            cplx acc{0.0, 0.0};
            std::vector<std::size_t> ab(static_cast<std::size_t>(2 * k));
            for (int level = 0; level < 2 * k; ++level) {
                ab[static_cast<std::size_t>(level)] = c % np;
                c /= np;
            }
            for (std::size_t i = 0; i < m; ++i) {
                Eigen::MatrixXcd prod = blocks[i][ab[0] * np + ab[1]];
                for (int level = 1; level < k; ++level)
                    prod = prod * blocks[i][ab[static_cast<std::size_t>(2 * level)] * np +
                                            ab[static_cast<std::size_t>(2 * level + 1)]];
                acc += prod.trace();
            }
            acc /= static_cast<double>(m);
            contributions[code] = std::norm(acc);
        },
        threads);
    return pairwise_sum(std::move(contributions));
}

/// Monte Carlo estimate of E |<alpha| U A U^dagger |beta>|^2 over Haar
/// samples, with A a Pauli string normalized to unit Frobenius norm and the
/// fixed basis states alpha = |0...0>, beta = |0...1>. Converges to 1/d^2.
inline double haar_monomial_check(int n, const PauliString& a, std::size_t samples,
                                  std::uint64_t rng_seed, std::size_t threads = 0) {
    if (a.n() != n) throw std::invalid_argument("haar_monomial_check: operator size mismatch");
    if (a.is_identity())
        throw std::invalid_argument("haar_monomial_check: operator must be traceless");
    if (samples == 0) throw std::invalid_argument("haar_monomial_check: need samples");
    const auto d = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const Eigen::Index alpha = 0, beta = 1;

    std::vector<double> values(samples);
    parallel_for(
        samples,
        [&](std::size_t s) {
            DenseUnitary u = haar_unitary(derive_seed(rng_seed, s), n);
            std::vector<cplx> x(static_cast<std::size_t>(d));
            for (Eigen::Index j = 0; j < d; ++j)
                x[static_cast<std::size_t>(j)] = std::conj(u(beta, j));  // U^dagger e_beta
            a.apply(x);
            cplx amp{0.0, 0.0};
            for (Eigen::Index j = 0; j < d; ++j) amp += u(alpha, j) * x[static_cast<std::size_t>(j)];
            values[s] = std::norm(amp * inv_sqrt_d);
        },
        threads);
    return pairwise_sum(std::move(values)) / static_cast<double>(samples);
}

}  // namespace designham
