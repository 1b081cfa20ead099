#include <catch2/catch_amalgamated.hpp>

#include "hb/birkhoff.hpp"

using namespace hb;

namespace {
Potential random_potential(int K, std::uint64_t seed, double target_l2 = 0.5, int decay = 2) {
    Rng rng(seed);
    std::vector<cx> pos(static_cast<std::size_t>(K));
    for (int n = 1; n <= K; ++n) {
        const double r = rng.uniform(0.5, 1.0) / std::pow(double(n), decay);
        pos[std::size_t(n - 1)] = r * std::exp(cx(0.0, rng.uniform(0.0, 2 * pi)));
    }
    Potential p = Potential::from_positive(pos, 0.0);
    return p.scaled(target_l2 / l2_norm(p, false));
}

BirkhoffOptions fast_opts() {
    BirkhoffOptions o;
    o.spectrum.validate_with_oracle = false;
    return o;
}
}  // namespace

TEST_CASE("free operator: xi = 1/sqrt(pi n), I = 0, z = 0") {
    auto res = birkhoff_map(Potential{}, 10, fast_opts());
    for (int n = 1; n <= 10; ++n) {
        const auto& r = res.data.at(n);
        CHECK_THAT(r.xi, Catch::Matchers::WithinAbs(1.0 / std::sqrt(pi * n), 1e-9));
        CHECK(std::abs(r.I) < 1e-12);
        CHECK(std::abs(r.z) < 1e-9);
        CHECK(std::abs(r.u_plus) < 1e-9);
        CHECK(std::abs(r.v_plus - cx(1.0)) < 1e-9);
        CHECK(r.beta_sum == 0.0);
    }
}

TEST_CASE("Parseval for KdV: sum 2 pi n I_n = ||q||^2 / 2") {
    for (std::uint64_t seed : {21ull, 22ull}) {
        Potential q = random_potential(6, seed, 0.6);
        auto res = birkhoff_map(q, 28, fast_opts());
        double sum = 0;
        for (int n = 1; n <= res.data.n_max; ++n) sum += 2 * pi * n * res.data.at(n).I;
        const double target = 0.5 * sq(l2_norm(q, false));
        CHECK_THAT(sum, Catch::Matchers::WithinRel(target, 1e-6));
    }
}

TEST_CASE("action identity I_n = z_n z_{-n} / 2 and reality") {
    Potential q = random_potential(5, 33, 0.5);
    auto res = birkhoff_map(q, 16, fast_opts());
    for (int n = 1; n <= 16; ++n) {
        const auto& r = res.data.at(n);
        // reality: z_{-n} = conj(z_n); u_-/u_+ conjugate
        CHECK(std::abs(r.z_neg - std::conj(r.z)) < 1e-12);
        CHECK(std::abs(r.u_minus - std::conj(r.u_plus)) < 1e-14);
        CHECK(std::abs(r.v_minus - std::conj(r.v_plus)) < 1e-14);
        // z route vs quadrature route
        const cx prod = r.z * r.z_neg / 2.0;
        CHECK(std::abs(prod.imag()) < 1e-12);
        if (res.spectral.at(n).open_gap && r.I > 1e-14)
            CHECK_THAT(prod.real(), Catch::Matchers::WithinRel(r.I, 1e-7));
    }
}

TEST_CASE("translation leaves |z_n| and I_n invariant") {
    Potential q = random_potential(4, 8, 0.5);
    auto a = birkhoff_map(q, 12, fast_opts());
    auto b = birkhoff_map(q.translated(0.23), 12, fast_opts());
    for (int n = 1; n <= 12; ++n) {
        CHECK(std::abs(std::abs(a.data.at(n).z) - std::abs(b.data.at(n).z)) < 1e-7);
        CHECK(std::abs(a.data.at(n).I - b.data.at(n).I) < 1e-9);
    }
}

TEST_CASE("v factors: near one and reciprocal") {
    Potential q = random_potential(5, 44, 0.5);
    auto res = birkhoff_map(q, 20, fast_opts());
    for (int n = 1; n <= 20; ++n) {
        const auto& r = res.data.at(n);
        CHECK(std::abs(r.v_plus) <= 1.0 + 1e-12);  // unit modulus for open gaps
        CHECK(std::abs(r.v_plus - cx(1.0)) < 4.0 / n);
        CHECK(std::abs(r.v_plus * r.v_minus - cx(1.0)) < 1e-13);
    }
}

TEST_CASE("u closed form matches the angle-integral factorization on wide gaps") {
    // optional cross-check: z_n^{+-} = gamma e^{+- i beta_nn} for a well-open gap
    Potential q = Potential::from_positive({cx(0.25, 0.1)}, 0.0);
    HillSolver s(q);
    SpectrumOptions so;
    so.validate_with_oracle = false;
    auto sd = compute_spectrum(s, 10, so);
    REQUIRE(sd.at(1).open_gap);
    auto ps = solve_psi_zeros(sd);
    auto bd = birkhoff_from_spectral(sd, ps, q, fast_opts());
    ActionQuadratureConfig qc;
    const double bnn = beta_nn(sd, ps, 1, qc);
    const cx expect = sd.at(1).gamma * std::exp(cx(0.0, bnn));
    CHECK(std::abs(bd.at(1).z_plus - expect) < 1e-7 * std::max(1.0, std::abs(expect)));
}

TEST_CASE("beta sums are real and O(1/n)") {
    Potential q = Potential::from_positive({cx(0.15), cx(0.05, 0.08)}, 0.0);
    auto res = birkhoff_map(q, 16, fast_opts());
    double max_scaled = 0;
    for (int n = 1; n <= 16; ++n)
        max_scaled = std::max(max_scaled, double(n) * std::abs(res.data.at(n).beta_sum));
    CHECK(max_scaled < 1.0);  // n beta_n stays bounded at this amplitude
    CHECK(max_scaled > 0.0);  // and the integrals are not trivially zero
}

TEST_CASE("delta_n stays within [-1,1] and actions are nonnegative") {
    Potential q = random_potential(6, 91, 0.8);
    auto res = birkhoff_map(q, 16, fast_opts());
    for (int n = 1; n <= 16; ++n) {
        CHECK(std::abs(res.data.at(n).delta) <= 1.0 + 1e-9);
        CHECK(res.data.at(n).I >= 0.0);
        CHECK(res.data.at(n).xi > 0.0);
    }
}

TEST_CASE("mean-carrying input is rejected") {
    Potential q = random_potential(3, 1, 0.3);
    q.set_mean(0.4);
    CHECK_THROWS_AS(birkhoff_map(q, 8, fast_opts()), std::invalid_argument);
}
