#include <catch2/catch_amalgamated.hpp>

#include "hb/fourier.hpp"

using namespace hb;

namespace {
Potential cos_potential(double amp, int mode, int K) {
    // amp * 2 cos(2 pi mode x) as a degree-K polynomial
    std::vector<cx> pos(std::size_t(K), cx(0.0));
    pos[std::size_t(mode - 1)] = amp;
    return Potential::from_positive(pos, 0.0);
}

Potential random_potential(int K, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<cx> pos(static_cast<std::size_t>(K));
    for (int n = 1; n <= K; ++n) {
        const double r = scale * rng.uniform(0.2, 1.0) / (n * n);
        const double ph = rng.uniform(0.0, 2 * pi);
        pos[std::size_t(n - 1)] = r * std::exp(cx(0.0, ph));
    }
    return Potential::from_positive(pos, 0.0);
}
}  // namespace

TEST_CASE("sobolev norms of basic potentials") {
    Potential zero;
    CHECK(sobolev_norm(zero, 0.0, true) == 0.0);

    Potential p = cos_potential(1.0, 1, 1);  // 2 cos(2 pi x)
    CHECK_THAT(sobolev_norm(p, 0.0, false), Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-14));
    CHECK_THAT(sobolev_norm(p, 1.0, false), Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-14));
    CHECK_THROWS_AS(sobolev_norm(p, -0.5, false), std::invalid_argument);
}

TEST_CASE("grid evaluation reproduces coefficients under the DFT") {
    Potential p = random_potential(6, 42);
    const int m = 2 * p.K() + 2;
    auto hat = dft_coeffs(p.sample(m));
    for (int n = 0; n <= p.K(); ++n)
        CHECK(std::abs(hat[std::size_t(n)] - p.hat(n)) <=
              1e-12 * std::max(1.0, std::abs(p.hat(n))));
}

TEST_CASE("Parseval: grid L2 norm matches coefficient norm") {
    Potential p = random_potential(16, 7, 2.0);
    p.set_mean(0.3);
    const int m = 256;
    auto s = p.sample(m);
    double g = 0;
    for (double v : s) g += v * v;
    g = std::sqrt(g / m);
    CHECK_THAT(g, Catch::Matchers::WithinRel(sobolev_norm(p, 0.0, true), 1e-12));
}

TEST_CASE("projection P_L") {
    Potential p = cos_potential(1.0, 1, 3) + cos_potential(1.0, 3, 3);
    Potential pl = project_PL(p, 2);
    CHECK(pl.hat(1) == cx(1.0));
    CHECK(pl.hat(3) == cx(0.0));

    Potential full = project_PL(p, 5);
    for (int n = 1; n <= 3; ++n) CHECK(full.hat(n) == p.hat(n));
    Potential tail = tail_QL(p, 5);
    CHECK(sobolev_norm(tail, 0.0, true) == 0.0);

    // idempotent and a contraction in every H^s
    Potential q = random_potential(12, 99);
    for (double s : {0.0, 0.75, 2.0}) {
        CHECK(sobolev_norm(project_PL(q, 5), s, true) <= sobolev_norm(q, s, true) + 1e-15);
    }
    Potential pp = project_PL(project_PL(q, 5), 5);
    for (int n = 1; n <= q.K(); ++n) CHECK(pp.hat(n) == project_PL(q, 5).hat(n));
}

TEST_CASE("phi0 and its inverse") {
    Potential p = cos_potential(1.0, 1, 1);
    auto z = phi0(p);
    CHECK_THAT(z.get(1).real(), Catch::Matchers::WithinAbs(1.0 / std::sqrt(pi), 1e-15));
    CHECK_THAT(z.get(-1).real(), Catch::Matchers::WithinAbs(1.0 / std::sqrt(pi), 1e-15));

    SequenceVector zero(4);
    CHECK(phi0_inverse(zero).is_zero());

    Potential q = random_potential(20, 11);
    Potential back = phi0_inverse(phi0(q));
    for (int n = 1; n <= q.K(); ++n)
        CHECK(std::abs(back.hat(n) - q.hat(n)) <= 1e-13 * std::max(1.0, std::abs(q.hat(n))));

    Potential with_mean = q;
    with_mean.set_mean(0.5);
    CHECK_THROWS_AS(phi0(with_mean), std::invalid_argument);

    // norm identity || phi0(p) ||_{s+1/2}^2 = (1/pi) ||p||_{H^s}^2 (mean-free)
    for (double s : {0.0, 1.0, 1.5}) {
        const double lhs = sq(phi0(q).norm_alpha(s + 0.5));
        const double rhs = sq(sobolev_norm(q, s, false)) / pi;
        CHECK_THAT(lhs, Catch::Matchers::WithinRel(rhs, 1e-12));
    }
}

TEST_CASE("JSON round trip enforces reality") {
    Potential p = random_potential(5, 3);
    p.set_mean(-0.25);
    auto j = to_json(p);
    Potential back = potential_from_json(j);
    CHECK(back.K() == p.K());
    CHECK(back.mean() == p.mean());
    for (int n = -p.K(); n <= p.K(); ++n)
        CHECK(std::abs(back.hat(n) - p.hat(n)) <= 1e-15);

    nlohmann::json bad;
    bad["K"] = 1;
    bad["mean"] = 0.0;
    bad["coeffs"] = nlohmann::json::array({{1, 1.0, 0.0}, {-1, 2.0, 0.0}});
    CHECK_THROWS_AS(potential_from_json(bad), std::invalid_argument);
}

TEST_CASE("sequence vector norms and reality") {
    SequenceVector z(8);
    z.set_pair(1, cx(1.0, 2.0));
    z.set_pair(3, cx(0.0, -1.0));
    CHECK(z.real_type());
    const double expect = std::sqrt(2 * (5.0) + 2 * std::pow(3.0, 3) * 1.0);
    CHECK_THAT(z.norm_alpha(1.5), Catch::Matchers::WithinRel(expect, 1e-13));
    z.set(2, cx(1.0, 0.0));  // break symmetry
    CHECK(!z.real_type());
}

TEST_CASE("translation acts as phase on coefficients") {
    Potential p = random_potential(4, 17);
    Potential t = p.translated(0.3);
    const int m = 64;
    for (int i = 0; i < m; ++i) {
        const double x = double(i) / m;
        CHECK_THAT(t.evaluate(x), Catch::Matchers::WithinAbs(p.evaluate(x + 0.3), 1e-12));
    }
}
