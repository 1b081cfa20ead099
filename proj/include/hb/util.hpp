#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hb {

using cx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// Thrown when a numerical procedure cannot reach its accuracy contract
// (bracket failures, Newton divergence, drift beyond tolerance, ...).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double sq(double x) { return x * x; }

// ---------------------------------------------------------------------------
// Deterministic RNG. std::uniform_real_distribution is implementation-defined,
// so reports built from it would not be reproducible across standard libraries.
// splitmix64 seeds xoshiro256**, uniforms come straight from the bit pattern.
// ---------------------------------------------------------------------------
struct SplitMix64 {
    std::uint64_t s;
    explicit SplitMix64(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

struct Rng {
    std::uint64_t s[4];
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& x : s) x = sm.next();
    }
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t next() {
        std::uint64_t result = rotl(s[1] * 5, 7) * 9;
        std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
    // uniform in [0,1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

// ---------------------------------------------------------------------------
// Least squares line fit y ~ a + b x. Returns {slope, intercept, r2}.
// ---------------------------------------------------------------------------
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
};

inline LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("line_fit: need >= 2 points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / double(n), my = sy / double(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0) throw std::invalid_argument("line_fit: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy == 0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

// Fit of log|y| vs log n over the index window [lo, hi]; values below `floor`
// are clamped so noise-level residuals do not produce fake steep slopes.
inline LineFit loglog_fit(const std::vector<int>& n, const std::vector<double>& y,
                          double floor_value = 1e-300) {
    std::vector<double> lx, ly;
    lx.reserve(n.size());
    ly.reserve(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        lx.push_back(std::log(double(n[i])));
        ly.push_back(std::log(std::max(std::abs(y[i]), floor_value)));
    }
    return line_fit(lx, ly);
}

// ---------------------------------------------------------------------------
// Quadrature rules.
// ---------------------------------------------------------------------------

// Gauss-Chebyshev: \int_{-1}^{1} f(t)/sqrt(1-t^2) dt ~ (pi/n) sum f(t_i).
inline std::vector<double> chebyshev_nodes(int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = std::cos((2 * i + 1) * pi / (2 * n));
    return t;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) : x(n), w(n) {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
                }
                pp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
    }
    // integrate f over [a,b]
    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(c + h * x[i]);
        return s * h;
    }
};

// ---------------------------------------------------------------------------
// parallel_for: run fn(i) for i in [0, count) on up to `jobs` threads.
// Tasks must be independent; exceptions are rethrown on the caller thread.
// ---------------------------------------------------------------------------
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    int hw = int(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 4;
    if (jobs <= 0) jobs = hw;
    jobs = int(std::min<std::size_t>(std::size_t(jobs), count));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(jobs);
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) return;
                    fn(i);
                }
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

// Brent root finder on [a,b] with f(a)f(b) <= 0.
template <class F>
double brent_root(F&& f, double a, double b, double fa, double fb,
                  double xtol, int maxit = 200) {
    if (fa == 0) return a;
    if (fb == 0) return b;
    if ((fa > 0) == (fb > 0)) throw numeric_error("brent_root: endpoints do not bracket");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < maxit; ++it) {
        if ((fb > 0) == (fc > 0)) { c = a; fc = fa; d = e = b - a; }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2 * 1e-16 * std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0) return b;
        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = e = m;
        } else {
            double p, q, r, s = fb / fa;
            if (a == c) {
                p = 2 * m * s;
                q = 1 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2 * m * q * (q - r) - (b - a) * (r - 1));
                q = (q - 1) * (r - 1) * (s - 1);
            }
            if (p > 0) q = -q;
            p = std::abs(p);
            if (2 * p < std::min(3 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = e = m;
            }
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
        fb = f(b);
    }
    return b;
}

}  // namespace hb
