#pragma once

// Periodic/Dirichlet/Neumann spectra of the Hill operator, gap data, Floquet
// exponents and the critical points of the discriminant.
//
// Eigenvalue extraction is organized around conditioning. The critical point
// lam_dot_n (simple zero of dDelta) and the Dirichlet/Neumann roots (simple
// zeros of y2(1,.) / y1'(1,.)) are always well conditioned. The individual
// periodic edges of a small gap are not: Delta -+ 2 is quadratic there, so a
// direct root search amplifies evaluation noise by 1/gamma. Wide gaps are
// refined edge-by-edge; small gaps get gamma from the identity
//     gamma^2 = 4 (tau - mu)^2 + (4 pi n sinh kappa)^2 / Delta_n(mu)
// whose ingredients (mu, kappa, the gap-free product Delta_n) are all stable,
// and tau from lam_dot plus a product-logarithm correction.

#include <cstdio>

#include "hb/hill.hpp"
#include "hb/oracle.hpp"

namespace hb {

struct SpectrumOptions {
    double closure_tol = 1e-10;        // min |Delta -+ 2| below this is a double root
    double wide_gap_threshold = 0.02;  // edge-refinement route above this width
    bool validate_with_oracle = true;
    int oracle_basis_factor = 8;
};

struct GapData {
    double lam_lo = 0, lam_hi = 0;  // lambda_{2n-1}, lambda_{2n}
    double mu = 0, eta = 0;
    double gamma = 0, tau = 0;
    double kappa = 0;
    double lam_dot = 0;
    double star_root_at_mu = 0;   // y1(1,mu_n) - y2'(1,mu_n)
    double delta_n_at_mu = 1.0;   // gap-free product Delta_n(mu_n)
    double delta_min = 0;         // Delta(lam_dot) - 2(-1)^n
    bool open_gap = false;
};

struct SpectralData {
    double lambda0 = 0;
    double eta0 = 0;
    double mean_shift = 0;  // qhat_0 of the potential the data belongs to
    int n_max = 0;
    std::vector<GapData> gap;  // gap[n-1]

    const GapData& at(int n) const { return gap[std::size_t(n - 1)]; }
    GapData& at(int n) { return gap[std::size_t(n - 1)]; }

    double gap_tol(int n) const { return 1e-8 * std::max(1.0, double(n)); }

    // (lam_hi_m - lambda)(lam_lo_m - lambda)
    double Q(int m, double lam) const {
        const auto& g = at(m);
        return (g.lam_hi - lam) * (g.lam_lo - lam);
    }

    std::vector<int> open_indices() const {
        std::vector<int> o;
        for (int n = 1; n <= n_max; ++n)
            if (at(n).open_gap) o.push_back(n);
        return o;
    }

    void dump_csv(const std::string& path) const {
        std::FILE* fp = std::fopen(path.c_str(), "w");
        if (!fp) throw std::runtime_error("cannot open " + path);
        std::fprintf(fp, "# lambda0 = %.17g, eta0 = %.17g\n", lambda0, eta0);
        std::fprintf(fp, "n,lam_lo,lam_hi,mu,eta,gamma,tau,kappa,lam_dot,star_root_at_mu,open_gap\n");
        for (int n = 1; n <= n_max; ++n) {
            const auto& g = at(n);
            std::fprintf(fp, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", n,
                         g.lam_lo, g.lam_hi, g.mu, g.eta, g.gamma, g.tau, g.kappa, g.lam_dot,
                         g.star_root_at_mu, g.open_gap ? 1 : 0);
        }
        std::fclose(fp);
    }
};

namespace detail {

// sin(sqrt(l))/sqrt(l), continued through l <= 0.
inline double sinc_sqrt(double l) {
    if (l > 1e-8) {
        const double r = std::sqrt(l);
        return std::sin(r) / r;
    }
    if (l < -1e-8) {
        const double r = std::sqrt(-l);
        return std::sinh(r) / r;
    }
    return 1.0 - l / 6.0 + l * l / 120.0;
}

// prod_{m > M} ((m^2 pi^2 - l)/(m^2 pi^2))^2 via the closed form
// prod_{m >= 1} (1 - l/(m^2 pi^2)) = sin(sqrt l)/sqrt l, for lam in the n-th
// window. The n-th partial factor and the zero of sin share a root within
// round-off of each other, so their quotient is formed analytically:
// S(l)/(1 - l/(n^2 pi^2)) = (-1)^{n+1} n^2 pi^2 sinc(u) / (sqrt(l)(sqrt(l)+n pi)),
// u = (l - n^2 pi^2)/(sqrt(l) + n pi).
inline double product_tail_sq(double lam, int M, int n) {
    if (n < 1 || lam <= 0.0) {
        double partial = 1.0;
        for (int m = 1; m <= M; ++m) partial *= 1.0 - lam / sq(m * pi);
        const double t = sinc_sqrt(lam) / partial;
        return t * t;
    }
    const double np = n * pi;
    const double d = lam - np * np;
    const double r = std::sqrt(lam);
    const double u = d / (r + np);
    const double sinc_u =
        (std::abs(u) < 1e-4) ? (1.0 - u * u / 6.0 * (1.0 - u * u / 20.0)) : std::sin(u) / u;
    const double sign = (n % 2 == 0) ? -1.0 : 1.0;  // (-1)^{n+1}
    double t = sign * np * np * sinc_u / (r * (r + np));
    for (int m = 1; m <= M; ++m) {
        if (m == n) continue;
        t /= 1.0 - lam / sq(m * pi);
    }
    return t * t;
}

}  // namespace detail

class SpectrumComputer {
  public:
    SpectrumComputer(const HillSolver& solver, SpectrumOptions opt = {})
        : s_(solver), opt_(opt), mean_(solver.potential().mean()) {}

    // window half-width factor: |lambda - mean - n^2 pi^2| < r pi^2
    double window_r() const { return 0.25 + l2_norm(s_.potential(), false); }

    SpectralData compute(int n_max, int jobs = 0) const {
        SpectralData sd;
        sd.n_max = n_max;
        sd.mean_shift = mean_;
        sd.gap.resize(std::size_t(n_max));

        sd.lambda0 = find_lambda0();
        sd.eta0 = find_eta0(sd.lambda0);

        // pass 1: per-window quantities needing only local shooting data
        parallel_for(std::size_t(n_max), jobs, [&](std::size_t i) {
            pass1(int(i) + 1, sd.at(int(i) + 1));
        });

        // pass 2: cross-window products (cheap, needs pass-1 output)
        const std::vector<GapData> prelim = sd.gap;
        parallel_for(std::size_t(n_max), jobs, [&](std::size_t i) {
            pass2(int(i) + 1, sd, prelim, sd.at(int(i) + 1));
        });

        if (opt_.validate_with_oracle) validate_counts(sd);
        return sd;
    }

    const HillSolver& solver() const { return s_; }
    const SpectrumOptions& options() const { return opt_; }

    // gap-free product Delta_n(lam) over m <= n_max with the free-operator tail
    static double delta_n_product(int n, double lam, double lambda0, double mean,
                                  const std::vector<GapData>& edges) {
        const int M = int(edges.size());
        double p = 4.0 * (lam - lambda0) / sq(n * pi);
        const double lam0c = lam - mean;  // tail factors sit at m^2 pi^2 + mean
        for (int m = 1; m <= M; ++m) {
            if (m == n) continue;
            const auto& gm = edges[std::size_t(m - 1)];
            p *= (gm.lam_hi - lam) * (gm.lam_lo - lam) / sq(sq(m * pi));
        }
        return p * detail::product_tail_sq(lam0c, M, n);
    }

  private:
    double disc(double lam, long steps) const {
        const auto f = s_.propagate<double>(lam, false, steps);
        return f.y1_1.real() + f.dy2_1.real();
    }
    double ddisc(double lam, long steps) const {
        const auto f = s_.propagate<double>(lam, true, steps);
        return (*f.dlam)[0].real() + (*f.dlam)[3].real();
    }

    double find_lambda0() const {
        const double lo_start = -s_.potential().linf_bound() - 1.0 + mean_;
        const long steps = s_.steps_for(std::max(4 * sq(pi), std::abs(lo_start)));
        double a = lo_start;
        double fa = disc(a, steps) - 2.0;
        if (fa <= 0) throw numeric_error("lambda0 search: no positive start");
        const double step = sq(pi) / 8.0;
        for (int it = 0; it < 4000; ++it) {
            const double b = a + step;
            const double fb = disc(b, steps) - 2.0;
            if (fb <= 0.0)
                return brent_root([&](double l) { return disc(l, steps) - 2.0; }, a, b, fa, fb,
                                  1e-13 * std::max(1.0, std::abs(b)));
            a = b;
            fa = fb;
        }
        throw numeric_error("lambda0 not found");
    }

    double find_eta0(double lambda0) const {
        const long steps = s_.steps_for(std::abs(lambda0) + 4 * sq(pi));
        auto g = [&](double l) { return s_.propagate<double>(l, false, steps).dy1_1.real(); };
        double b = lambda0 + 1e-9 * std::max(1.0, std::abs(lambda0)) + 1e-9;
        double fb = g(b);
        double step = std::max(0.25, (std::abs(lambda0) + 1.0) / 8.0);
        for (int it = 0; it < 200; ++it) {
            const double a = b - step;
            const double fa = g(a);
            if ((fa > 0) != (fb > 0) || fa == 0.0)
                return brent_root(g, a, b, fa, fb, 1e-13 * std::max(1.0, std::abs(a)));
            b = a;
            fb = fa;
            step *= 1.25;
        }
        throw numeric_error("eta0 not found");
    }

    void pass1(int n, GapData& g) const {
        const double center = sq(n * pi) + mean_;
        const double half = window_r() * sq(pi);
        const double wa = center - half, wb = center + half;
        const long steps = s_.steps_for(std::abs(wb));
        const double sn = (n % 2 == 0) ? 1.0 : -1.0;  // Delta = 2 sn at the n-th pair

        auto dD = [&](double l) { return ddisc(l, steps); };
        double fa = dD(wa), fb = dD(wb);
        if ((fa > 0) == (fb > 0))
            throw numeric_error("window " + std::to_string(n) +
                                ": dDelta does not change sign; widen r or reduce ||q||");
        const double lam_dot = brent_root(dD, wa, wb, fa, fb, 1e-13 * std::max(1.0, center));
        g.lam_dot = lam_dot;

        const double D = disc(lam_dot, steps) - 2.0 * sn;
        g.delta_min = D;

        // curvature of Delta at lam_dot by central difference of dDelta
        const double hfd = std::max(0.05, 2e-6 * std::abs(center));
        const double d2 = (dD(lam_dot + hfd) - dD(lam_dot - hfd)) / (2 * hfd);

        double gamma_quad = 0.0;
        if (sn * D > opt_.closure_tol && d2 != 0.0)
            gamma_quad = 2.0 * std::sqrt(std::abs(2.0 * D / d2));

        if (gamma_quad >= opt_.wide_gap_threshold) {
            auto f = [&](double l) { return disc(l, steps) - 2.0 * sn; };
            g.lam_lo = refine_edge(f, lam_dot, D, gamma_quad, -1, wa, wb, center);
            g.lam_hi = refine_edge(f, lam_dot, D, gamma_quad, +1, wa, wb, center);
            g.tau = 0.5 * (g.lam_lo + g.lam_hi);
            g.gamma = g.lam_hi - g.lam_lo;
        } else {
            // provisional; pass 2 reconstructs gamma and corrects tau
            g.tau = lam_dot;
            g.gamma = gamma_quad;
            g.lam_lo = lam_dot - 0.5 * gamma_quad;
            g.lam_hi = lam_dot + 0.5 * gamma_quad;
        }

        g.mu = simple_root(
            [&](double l) { return s_.propagate<double>(l, false, steps).y2_1.real(); },
            [&](double l) { return (*s_.propagate<double>(l, true, steps).dlam)[1].real(); },
            lam_dot, half, center, n);
        g.eta = simple_root(
            [&](double l) { return s_.propagate<double>(l, false, steps).dy1_1.real(); },
            [&](double l) { return (*s_.propagate<double>(l, true, steps).dlam)[2].real(); },
            lam_dot, half, center, n);

        const auto fm = s_.propagate<double>(g.mu, false, steps);
        const double arg = ((n % 2 == 0) ? 1.0 : -1.0) * fm.dy2_1.real();
        if (arg <= 0.0)
            throw numeric_error("window " + std::to_string(n) +
                                ": (-1)^n y2'(1,mu) <= 0, spectral mislocation");
        g.kappa = std::log(arg);
        g.star_root_at_mu = fm.y1_1.real() - fm.dy2_1.real();
    }

    template <class F>
    double refine_edge(F&& f, double lam_dot, double D, double width_guess, int dir, double wa,
                       double wb, double scale) const {
        double x_in = lam_dot, f_in = D;
        double w = 0.55 * width_guess;
        for (int it = 0; it < 64; ++it) {
            double x_out = lam_dot + dir * w;
            if (x_out <= wa || x_out >= wb)
                throw numeric_error("gap edge bracket hit window boundary");
            const double f_out = f(x_out);
            if (f_out == 0.0) return x_out;
            if ((f_out > 0) != (f_in > 0)) {
                double a = std::min(x_in, x_out), b = std::max(x_in, x_out);
                double va = (a == x_in) ? f_in : f_out;
                double vb = (b == x_in) ? f_in : f_out;
                return brent_root(f, a, b, va, vb, 1e-13 * std::max(1.0, scale));
            }
            x_in = x_out;
            f_in = f_out;
            w *= 1.4142135623730951;
        }
        throw numeric_error("gap edge bracket failed");
    }

    template <class F, class DF>
    double simple_root(F&& f, DF&& df, double seed, double half, double scale, int n) const {
        const double a = seed - 0.5 * half, b = seed + 0.5 * half;
        const double fa = f(a), fb = f(b);
        if ((fa > 0) == (fb > 0))
            throw numeric_error("window " + std::to_string(n) + ": simple root bracket failed");
        double x = brent_root(f, a, b, fa, fb, 1e-11 * std::max(1.0, scale));
        for (int it = 0; it < 2; ++it) {  // Newton polish with the variational derivative
            const double fx = f(x), dfx = df(x);
            if (dfx == 0.0) break;
            const double step = fx / dfx;
            if (!std::isfinite(step) || std::abs(step) > half) break;
            x -= step;
        }
        return x;
    }

    void pass2(int n, const SpectralData& sd, const std::vector<GapData>& prelim, GapData& g) const {
        const GapData& p1 = prelim[std::size_t(n - 1)];
        g.delta_n_at_mu = delta_n_product(n, p1.mu, sd.lambda0, mean_, prelim);
        if (g.delta_n_at_mu <= 0.0)
            throw numeric_error("Delta_n(mu) <= 0 at n = " + std::to_string(n));

        if (p1.gamma < opt_.wide_gap_threshold) {
            double tau = p1.lam_dot;
            double gam2 = 0;
            for (int pass = 0; pass < 2; ++pass) {
                const double im = 4.0 * pi * n * std::sinh(p1.kappa);
                gam2 = 4.0 * sq(tau - p1.mu) + im * im / g.delta_n_at_mu;
                const double hfd = std::max(0.05, 2e-6 * std::abs(p1.lam_dot));
                const double dln =
                    (std::log(delta_n_product(n, p1.lam_dot + hfd, sd.lambda0, mean_, prelim)) -
                     std::log(delta_n_product(n, p1.lam_dot - hfd, sd.lambda0, mean_, prelim))) /
                    (2 * hfd);
                tau = p1.lam_dot - gam2 / 8.0 * dln;
            }
            g.tau = tau;
            g.gamma = std::sqrt(std::max(0.0, gam2));
            g.lam_lo = g.tau - 0.5 * g.gamma;
            g.lam_hi = g.tau + 0.5 * g.gamma;
        }

        g.open_gap = g.gamma > sd.gap_tol(n);
        if (!g.open_gap) {
            g.gamma = 0.0;
            g.lam_lo = g.lam_hi = g.tau;
            if (std::abs(g.mu - g.tau) <= sd.gap_tol(n)) g.mu = g.tau;
        }
    }

    void validate_counts(const SpectralData& sd) const {
        const double Lam = sq((sd.n_max + 0.5) * pi) + mean_;
        const int count = 2 * sd.n_max + 1;
        auto eigs = matrix_oracle_spectrum(s_.potential(), Boundary::periodic_2, count + 4,
                                           opt_.oracle_basis_factor * (count + 4) / 2);
        int below = 0;
        for (double e : eigs)
            if (e <= Lam) ++below;
        if (below != count)
            throw numeric_error("bracket validation: oracle counts " + std::to_string(below) +
                                " periodic eigenvalues below Lambda, expected " +
                                std::to_string(count));
        const double half = window_r() * sq(pi);
        for (int n = 1; n <= sd.n_max; ++n) {
            const double c = sq(n * pi) + mean_;
            int cnt = 0;
            for (int k = 1; k <= 2 * sd.n_max; ++k)
                if (std::abs(eigs[std::size_t(k)] - c) < half) ++cnt;
            if (cnt < 2)
                throw numeric_error("bracket validation: window " + std::to_string(n) +
                                    " does not isolate its eigenvalue pair");
        }
    }

    const HillSolver& s_;
    SpectrumOptions opt_;
    double mean_;
};

inline SpectralData compute_spectrum(const HillSolver& solver, int n_max, SpectrumOptions opt = {},
                                     int jobs = 0) {
    return SpectrumComputer(solver, opt).compute(n_max, jobs);
}

}  // namespace hb
