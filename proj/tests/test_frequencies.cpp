#include <catch2/catch_amalgamated.hpp>

#include "hb/frequencies.hpp"
#include "hb/birkhoff.hpp"
#include "hb/kdv.hpp"

using namespace hb;

namespace {
struct Pipeline {
    SpectralData sd;
    PsiSystem ps;
};

Pipeline pipeline(const Potential& q, int n_max) {
    HillSolver s(q);
    SpectrumOptions so;
    so.validate_with_oracle = false;
    Pipeline p;
    p.sd = compute_spectrum(s, n_max, so);
    p.ps = solve_psi_zeros(p.sd);
    return p;
}
}  // namespace

TEST_CASE("free frequencies are 8 pi^3 n^3") {
    auto p = pipeline(Potential{}, 10);
    auto fd = kdv_frequencies(p.sd, p.ps, 0.0);
    for (int n = 1; n <= 10; ++n) {
        const double expect = 8.0 * std::pow(pi, 3) * std::pow(double(n), 3);
        CHECK_THAT(fd.omega_of(n), Catch::Matchers::WithinRel(expect, 1e-9));
        CHECK(fd.omega_of(-n) == -fd.omega_of(n));
    }
    CHECK(fd.omega_of(0) == 0.0);
}

TEST_CASE("mean shift is exactly 12 c n pi") {
    Potential q = Potential::from_positive({cx(0.1), cx(0.03, 0.02)}, 0.0);
    auto p = pipeline(q, 8);
    auto f0 = kdv_frequencies(p.sd, p.ps, 0.0);
    auto fc = kdv_frequencies(p.sd, p.ps, 0.7);
    for (int n = 1; n <= 8; ++n) {
        const double shift = fc.omega_c_of(n) - f0.omega_c_of(n);
        CHECK(std::abs(shift - 12.0 * 0.7 * n * pi) <= 1e-15 * std::abs(fc.omega_c_of(n)));
        CHECK(fc.airy_of(n) == std::pow(2 * pi * n, 3) + 12.0 * 0.7 * n * pi);
    }
}

TEST_CASE("frequency asymptotics: n |omega_n - (2 pi n)^3| stays bounded") {
    Rng rng(3);
    std::vector<cx> pos;
    for (int n = 1; n <= 6; ++n)
        pos.push_back(rng.uniform(0.3, 0.6) / double(n * n) * std::exp(cx(0.0, rng.uniform(0.0, 2 * pi))));
    Potential q = Potential::from_positive(pos, 0.0);
    auto p = pipeline(q, 24);
    auto fd = kdv_frequencies(p.sd, p.ps, 0.0);
    std::vector<double> scaled;
    for (int n = 4; n <= 24; ++n)
        scaled.push_back(n * std::abs(fd.omega_of(n) - std::pow(2 * pi * n, 3)));
    double head = 0, tail = 0;
    for (std::size_t i = 0; i < 6; ++i) head = std::max(head, scaled[i]);
    for (std::size_t i = scaled.size() - 6; i < scaled.size(); ++i) tail = std::max(tail, scaled[i]);
    CHECK(tail < 2.5 * head + 1e-6);
}

TEST_CASE("synthetic phase-slope measurement recovers the Airy frequency") {
    // single mode rotated by s_n^c, mapped through phi0: slope must be exact
    const double c = 0.2;
    const int n_track = 3;
    const double s3 = std::pow(2 * pi * n_track, 3) + 12 * c * n_track * pi;
    Potential q = Potential::from_positive({cx(0.0), cx(0.0), cx(0.4, 0.1)}, 0.0);
    std::vector<double> times;
    std::vector<SequenceVector> zs;
    const double dt = 0.4 * pi / s3;
    for (int i = 0; i < 24; ++i) {
        const double t = i * dt;
        times.push_back(t);
        zs.push_back(phi0(airy_flow(q, c, t)));
    }
    auto m = measure_frequencies(times, zs, {n_track});
    CHECK_THAT(m[n_track], Catch::Matchers::WithinRel(s3, 1e-10));
}

TEST_CASE("phase aliasing is rejected with a hint") {
    const int n_track = 2;
    Potential q = Potential::from_positive({cx(0.0), cx(0.3)}, 0.0);
    const double s2 = std::pow(2 * pi * n_track, 3);
    std::vector<double> times;
    std::vector<SequenceVector> zs;
    const double dt = 1.05 * pi / s2;  // too coarse
    for (int i = 0; i < 20; ++i) {
        const double t = i * dt;
        times.push_back(t);
        zs.push_back(phi0(airy_flow(q, 0.0, t)));
    }
    CHECK_THROWS_AS(measure_frequencies(times, zs, {n_track}), numeric_error);
}

TEST_CASE("amplitude floor is enforced") {
    Potential q = Potential::from_positive({cx(1e-10)}, 0.0);
    std::vector<double> times;
    std::vector<SequenceVector> zs;
    for (int i = 0; i < 20; ++i) {
        times.push_back(i * 1e-4);
        zs.push_back(phi0(q));
    }
    CHECK_THROWS_AS(measure_frequencies(times, zs, {1}), numeric_error);
}
