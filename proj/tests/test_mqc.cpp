#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "designham/mqc.hpp"
#include "designham/dense.hpp"
#include "test_util.hpp"

using namespace designham;

namespace {

SpinSystem random_system(int n, std::uint64_t seed) {
    Rng rng(seed);
    SpinSystem sys;
    sys.n = n;
    for (int i = 0; i < n; ++i) sys.labels.push_back("Q" + std::to_string(i + 1));
    sys.offset_hz.resize((std::size_t)n);
    for (auto& v : sys.offset_hz) v = rng.uniform(-14000.0, 14000.0);
    sys.coupling_hz.assign((std::size_t)n, std::vector<double>((std::size_t)n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = rng.uniform(-170.0, 170.0);
            sys.coupling_hz[(std::size_t)i][(std::size_t)j] = v;
            sys.coupling_hz[(std::size_t)j][(std::size_t)i] = v;
        }
    sys.validate();
    return sys;
}

}  // namespace

TEST_CASE("coherence_order") {
    CHECK(coherence_order(0b00, 0b11, 2) == 2);
    CHECK(coherence_order(0b01, 0b01, 2) == 0);
    CHECK(coherence_order(0b01, 0b11, 2) == 1);
    CHECK(coherence_order(0b11, 0b00, 2) == -2);
    CHECK_THROWS(coherence_order(4, 0, 2));
}

TEST_CASE("mqc_spectrum on elementary operators") {
    SECTION("sigma_z is pure zero-order coherence") {
        auto rho = testutil::op_on_qubit(3, 1, testutil::sigma_z());
        auto spec = mqc_spectrum(rho);
        CHECK(spec.at(0) == Catch::Approx(1.0));
        CHECK(spec.at(1) == 0.0);
        CHECK(spec.at(-1) == 0.0);
    }
    SECTION("sigma_x splits between +1 and -1") {
        auto rho = testutil::op_on_qubit(2, 0, testutil::sigma_x());
        auto spec = mqc_spectrum(rho);
        CHECK(spec.at(1) == Catch::Approx(0.5));
        CHECK(spec.at(-1) == Catch::Approx(0.5));
        CHECK(spec.at(0) == 0.0);
    }
    SECTION("rejects non-Hermitian input") {
        Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
        bad(0, 1) = 1.0;
        CHECK_THROWS(mqc_spectrum(bad));
    }
    SECTION("rejects the zero operator") {
        CHECK_THROWS(mqc_spectrum(Eigen::MatrixXcd::Zero(4, 4)));
    }
}

TEST_CASE("spectrum invariants for random Hermitian operators") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto rho = testutil::random_hermitian_unit(3, seed);
        auto spec = mqc_spectrum(rho);
        CHECK(spec.sum() == Catch::Approx(1.0).margin(1e-9));
        for (int nu = 1; nu <= 3; ++nu)
            CHECK(spec.at(nu) == Catch::Approx(spec.at(-nu)).margin(1e-9));
    }
}

TEST_CASE("Z-diagonal evolution leaves the spectrum unchanged") {
    auto rho = testutil::random_hermitian_unit(3, 17);
    auto before = mqc_spectrum(rho);

    EffectiveZHamiltonian h;
    Rng rng(18);
    h.a = {rng.uniform(-5.0, 5.0) * 1e3, rng.uniform(-5.0, 5.0) * 1e3, rng.uniform(-5.0, 5.0) * 1e3};
    h.b.assign(3, std::vector<double>(3, 0.0));
    h.b[0][1] = h.b[1][0] = 300.0;
    h.b[1][2] = h.b[2][1] = -150.0;
    LayeredPropagator v(3);
    v.push_diagonal(z_phase_diagonal(h, 1e-3));
    auto after = mqc_spectrum(conjugate_operator(v, rho));
    for (int nu = -3; nu <= 3; ++nu)
        CHECK(after.at(nu) == Catch::Approx(before.at(nu)).margin(1e-9));
}

TEST_CASE("mq_signal of a dense operator") {
    SECTION("phi = 0 returns the purity") {
        auto rho = testutil::random_hermitian_unit(2, 5);
        std::vector<double> phis{0.0, 1.0};
        auto sig = mq_signal_dense(rho, phis);
        CHECK(sig.values[0].real() == Catch::Approx(1.0).margin(1e-9));
        CHECK(std::abs(sig.values[0].imag()) < 1e-9);
    }
    SECTION("signal is real and even for Hermitian input") {
        auto rho = testutil::random_hermitian_unit(3, 6);
        std::vector<double> phis{0.7, -0.7, 2.2, -2.2};
        auto sig = mq_signal_dense(rho, phis);
        for (const auto& v : sig.values) CHECK(std::abs(v.imag()) < 1e-9);
        CHECK(sig.values[0].real() == Catch::Approx(sig.values[1].real()).margin(1e-9));
        CHECK(sig.values[2].real() == Catch::Approx(sig.values[3].real()).margin(1e-9));
    }
    SECTION("single-qubit sigma_x gives a cosine") {
        Eigen::MatrixXcd rho = testutil::sigma_x() / std::sqrt(2.0);
        auto phis = default_phi_grid(16);
        auto sig = mq_signal_dense(rho, phis);
        for (std::size_t i = 0; i < phis.size(); ++i)
            CHECK(sig.values[i].real() == Catch::Approx(std::cos(phis[i])).margin(1e-9));
    }
}

TEST_CASE("spectrum_from_signal") {
    SECTION("constant signal is pure DC") {
        MQSignal sig;
        sig.phis = default_phi_grid(32);
        sig.values.assign(32, cplx(1.0, 0.0));
        auto spec = spectrum_from_signal(sig, 2);
        CHECK(spec.at(0) == Catch::Approx(1.0).margin(1e-12));
        CHECK(spec.at(1) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("cosine recovers I(+-1) = 1/2") {
        MQSignal sig;
        sig.phis = default_phi_grid(64);
        sig.values.resize(64);
        for (std::size_t i = 0; i < 64; ++i) sig.values[i] = std::cos(sig.phis[i]);
        auto spec = spectrum_from_signal(sig, 1);
        CHECK(spec.at(1) == Catch::Approx(0.5).margin(1e-12));
        CHECK(spec.at(-1) == Catch::Approx(0.5).margin(1e-12));
        CHECK(spec.at(0) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("rejects non-uniform grids") {
        MQSignal sig;
        sig.phis = {0.1, 0.5, 2.0};
        sig.values.assign(3, cplx(1.0, 0.0));
        CHECK_THROWS(spectrum_from_signal(sig, 1));
    }
    SECTION("rejects too few points") {
        MQSignal sig;
        sig.phis = default_phi_grid(4);
        sig.values.assign(4, cplx(1.0, 0.0));
        CHECK_THROWS(spectrum_from_signal(sig, 2));
    }
    SECTION("flags frequencies beyond n") {
        MQSignal sig;
        sig.phis = default_phi_grid(32);
        sig.values.resize(32);
        for (std::size_t i = 0; i < 32; ++i) sig.values[i] = std::cos(3.0 * sig.phis[i]);
        CHECK_THROWS(spectrum_from_signal(sig, 2));  // order-3 content, n = 2
    }
}

TEST_CASE("dual-path spectra agree") {
    auto sys = random_system(4, 900);
    auto sched = sample_lambda(901, identity_slot_map(4), 4, 0.03);
    DesignTimeline tl(sched, sys);
    auto u = design_propagator(tl, 3);

    SECTION("dense route for a random state") {
        auto rho = testutil::random_hermitian_unit(4, 902);
        auto rho_t = conjugate_operator(u, rho);
        auto direct = mqc_spectrum(rho_t);
        auto fourier = spectrum_from_signal(mq_signal_dense(rho_t, default_phi_grid(256)), 4);
        for (int nu = -4; nu <= 4; ++nu)
            CHECK(fourier.at(nu) == Catch::Approx(direct.at(nu)).margin(1e-10));
    }
    SECTION("streaming route for a Pauli initial operator") {
        auto rho0 = PauliString::parse("ZXIY");
        auto streamed = evolved_mqc_spectrum(rho0, u);
        Eigen::MatrixXcd rho_dense = pauli_dense(rho0) / std::sqrt(16.0);
        auto dense = mqc_spectrum(conjugate_operator(u, rho_dense));
        for (int nu = -4; nu <= 4; ++nu)
            CHECK(streamed.at(nu) == Catch::Approx(dense.at(nu)).margin(1e-12));

        auto sig = mq_signal(rho0, u, default_phi_grid(64));
        auto sig_dense = mq_signal_dense(conjugate_operator(u, rho_dense), default_phi_grid(64));
        for (std::size_t i = 0; i < sig.values.size(); ++i)
            CHECK(std::abs(sig.values[i] - sig_dense.values[i]) < 1e-10);
    }
}

TEST_CASE("typical_profile") {
    SECTION("n = 12 reproduces the tabulated values") {
        auto prof = typical_profile(12);
        const double table[13] = {0.1612, 0.1488, 0.1169, 0.0779, 0.0438, 0.0206, 0.0080,
                                  0.0025, 0.0006, 0.0001, 1.65e-5, 1.43e-6, 5.96e-8};
        for (int nu = 0; nu <= 9; ++nu) {
            CHECK(prof.at(nu) == Catch::Approx(table[nu]).margin(5e-5));
            CHECK(prof.at(-nu) == prof.at(nu));
        }
        for (int nu = 10; nu <= 12; ++nu)
            CHECK(prof.at(nu) == Catch::Approx(table[nu]).epsilon(5e-3));
    }
    SECTION("profile sums to one exactly") {
        for (int n : {1, 2, 6, 12, 20}) {
            auto prof = typical_profile(n);
            double sum = 0.0;
            for (double v : prof.intensities) sum += v;
            CHECK(sum == 1.0);
        }
    }
    SECTION("n = 1 is the binomial quarter-half-quarter") {
        auto prof = typical_profile(1);
        CHECK(prof.at(-1) == 0.25);
        CHECK(prof.at(0) == 0.5);
        CHECK(prof.at(1) == 0.25);
    }
    SECTION("gaussian approximation is normalized") {
        auto g = typical_profile_gaussian(12);
        double sum = 0.0;
        for (double v : g) sum += v;
        CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("deviation_epsilon") {
    auto ref = typical_profile(12);
    SECTION("zero for the reference itself") {
        CoherenceSpectrum spec;
        spec.n = 12;
        spec.intensities = ref.intensities;
        CHECK(deviation_epsilon(spec, ref) == 0.0);
    }
    SECTION("delta spike matches direct vector arithmetic") {
        CoherenceSpectrum spike;
        spike.n = 12;
        spike.intensities.assign(25, 0.0);
        spike.at(0) = 1.0;
        double num = 0.0, den = 0.0;
        for (int nu = -12; nu <= 12; ++nu) {
            double d = (nu == 0 ? 1.0 : 0.0) - ref.at(nu);
            num += d * d;
            den += ref.at(nu) * ref.at(nu);
        }
        CHECK(deviation_epsilon(spike, ref) == Catch::Approx(std::sqrt(num / den)).epsilon(1e-14));
    }
    SECTION("dimension mismatch is rejected") {
        CoherenceSpectrum spec;
        spec.n = 3;
        spec.intensities.assign(7, 0.0);
        CHECK_THROWS(deviation_epsilon(spec, ref));
    }
}

TEST_CASE("mqc_growth_series") {
    auto sys = random_system(4, 950);
    auto sched = sample_lambda(951, identity_slot_map(4), 4, 0.03);
    DesignTimeline tl(sched, sys);
    auto rho0 = PauliString::parse("IZII");

    std::vector<double> times{0.0, 0.005, 0.010, 0.015, 0.020, 0.030, 0.060};
    auto series = mqc_growth_series(rho0, tl, times);
    REQUIRE(series.size() == times.size());

    SECTION("t = 0 reproduces the initial operator's spectrum") {
        CHECK(series[0].spectrum.at(0) == Catch::Approx(1.0));
    }
    SECTION("intensities stay normalized at every time") {
        for (const auto& point : series) CHECK(point.spectrum.sum() == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("Z-basis half-period leaves the spectrum unchanged") {
        // times 0, 5, 10, 15 ms all lie in the first (Z) half-period
        for (std::size_t i : {1u, 2u, 3u}) {
            for (int nu = -4; nu <= 4; ++nu)
                CHECK(series[i].spectrum.at(nu) ==
                      Catch::Approx(series[0].spectrum.at(nu)).margin(1e-9));
        }
        // the X half-period spreads coherence
        double moved = 0.0;
        for (int nu = -4; nu <= 4; ++nu)
            moved += std::abs(series[4].spectrum.at(nu) - series[0].spectrum.at(nu));
        CHECK(moved > 1e-3);
    }
    SECTION("epsilon is attached against the typical profile") {
        auto ref = typical_profile(4);
        for (const auto& point : series)
            CHECK(point.epsilon == Catch::Approx(deviation_epsilon(point.spectrum, ref)).margin(1e-12));
    }
    SECTION("out-of-horizon times are rejected") {
        std::vector<double> bad{0.07};
        CHECK_THROWS(mqc_growth_series(rho0, tl, bad));
    }
}
