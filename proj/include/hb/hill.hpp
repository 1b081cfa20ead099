#pragma once

// Fundamental solutions of -y'' + q y = lambda y on [0,1], the discriminant
// Delta(lambda) = tr M(1,lambda) and its lambda-derivative.
//
// The propagator is a 3-stage Gauss-Legendre collocation scheme (order 6).
// Being symplectic it preserves the Wronskian det M = 1 up to round-off, so
// the computed monodromy stays that of a self-adjoint Hill problem; this is
// what keeps near-closed spectral gaps from being split by integration error.
// lambda-derivatives are propagated with the variational system, reusing the
// stage LU factorization.

#include <array>
#include <cstdio>
#include <deque>
#include <mutex>
#include <optional>

#include <Eigen/Dense>

#include "hb/fourier.hpp"
#include "hb/util.hpp"

namespace hb {

struct IntegratorConfig {
    double accuracy_target = 1e-11;  // phase-error model target per unit length
    int min_points_per_wavelength = 16;
    int min_steps = 32;
    long max_steps = 40'000'000;
    double lambda_cap = 1e7;  // hard ceiling on |lambda|
};

struct FundamentalData {
    cx lambda;
    cx y1_1, y2_1, dy1_1, dy2_1;           // M(1, lambda) entries
    std::optional<std::array<cx, 4>> dlam;  // d/dlambda of (y1, y2, y1', y2') at x = 1
    double wronskian_defect = 0.0;          // max |det M - 1| over 8 interior checkpoints

    cx wronskian() const { return y1_1 * dy2_1 - y2_1 * dy1_1; }
};

namespace detail {

// Gauss-Legendre s=3 tableau (order 6).
struct Gauss6 {
    static constexpr double r15 = 3.8729833462074168852;  // sqrt(15)
    static constexpr double c[3] = {0.5 - r15 / 10.0, 0.5, 0.5 + r15 / 10.0};
    static constexpr double a[3][3] = {
        {5.0 / 36.0, 2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0},
        {5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r15 / 24.0},
        {5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0}};
    static constexpr double b[3] = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
};

// Potential samples at the collocation nodes of a fixed uniform step grid.
// Cached per step count: every lambda evaluation at the same resolution
// shares them, which makes the spectral root searches cheap.
struct NodeSamples {
    long steps = 0;
    std::vector<double> v;  // size 3*steps, v[3*k+i] = q((k + c_i) h)
};

inline NodeSamples sample_nodes(const Potential& q, long steps) {
    NodeSamples s;
    s.steps = steps;
    s.v.resize(std::size_t(3 * steps));
    const double h = 1.0 / double(steps);
    for (long k = 0; k < steps; ++k)
        for (int i = 0; i < 3; ++i)
            s.v[std::size_t(3 * k + i)] = q.evaluate((double(k) + Gauss6::c[i]) * h);
    return s;
}

template <class S>
using Mat2 = Eigen::Matrix<S, 2, 2>;

// One Gauss6 step for M' = A(x) M (and optionally the variational system
// V' = A V + A_lam M) where A = [[0,1],[q - lambda, 0]], A_lam = [[0,0],[-1,0]].
template <class S>
void gauss6_step(const double* qnodes, S lambda, double h, Mat2<S>& M, Mat2<S>* V) {
    using M6 = Eigen::Matrix<S, 6, 6>;
    using V6 = Eigen::Matrix<S, 6, 1>;
    std::array<S, 3> v;
    for (int i = 0; i < 3; ++i) v[std::size_t(i)] = S(qnodes[i]) - lambda;

    M6 B = M6::Identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            // block(i,j) -= h a_ij A_i ; A_i = [[0,1],[v_i,0]]
            B(2 * i, 2 * j + 1) -= h * Gauss6::a[i][j];
            B(2 * i + 1, 2 * j) -= h * Gauss6::a[i][j] * v[std::size_t(i)];
        }
    Eigen::PartialPivLU<M6> lu(B);

    // stage derivatives for both columns of M
    std::array<Eigen::Matrix<S, 6, 1>, 2> K;
    for (int col = 0; col < 2; ++col) {
        V6 rhs;
        for (int i = 0; i < 3; ++i) {
            rhs(2 * i) = M(1, col);
            rhs(2 * i + 1) = v[std::size_t(i)] * M(0, col);
        }
        K[std::size_t(col)] = lu.solve(rhs);
    }

    if (V) {
        // stage values M_i = M + h sum_j a_ij K_j (needed as sources)
        std::array<Mat2<S>, 3> Mi;
        for (int i = 0; i < 3; ++i) {
            Mi[std::size_t(i)] = M;
            for (int j = 0; j < 3; ++j)
                for (int col = 0; col < 2; ++col) {
                    Mi[std::size_t(i)](0, col) += h * Gauss6::a[i][j] * K[std::size_t(col)](2 * j);
                    Mi[std::size_t(i)](1, col) += h * Gauss6::a[i][j] * K[std::size_t(col)](2 * j + 1);
                }
        }
        for (int col = 0; col < 2; ++col) {
            V6 rhs;
            for (int i = 0; i < 3; ++i) {
                rhs(2 * i) = (*V)(1, col);
                rhs(2 * i + 1) = v[std::size_t(i)] * (*V)(0, col) - Mi[std::size_t(i)](0, col);
            }
            V6 KV = lu.solve(rhs);
            for (int i = 0; i < 3; ++i) {
                (*V)(0, col) += h * Gauss6::b[i] * KV(2 * i);
                (*V)(1, col) += h * Gauss6::b[i] * KV(2 * i + 1);
            }
        }
    }

    for (int col = 0; col < 2; ++col)
        for (int i = 0; i < 3; ++i) {
            M(0, col) += h * Gauss6::b[i] * K[std::size_t(col)](2 * i);
            M(1, col) += h * Gauss6::b[i] * K[std::size_t(col)](2 * i + 1);
        }
}

}  // namespace detail

// The shooting context for one potential. Holds the node-sample caches.
class HillSolver {
  public:
    explicit HillSolver(Potential q, IntegratorConfig cfg = {})
        : q_(std::move(q)), cfg_(cfg) {}

    const Potential& potential() const { return q_; }
    const IntegratorConfig& config() const { return cfg_; }

    long steps_for(double abs_lambda) const {
        // phase-error model for the Pade(3,3) stability function:
        // err ~ (2 pi)^6 sqrt(L) / (100800 p^6) <= target, with a ~3x margin
        const double L = std::min(std::max(abs_lambda, 1.0), cfg_.lambda_cap);
        const double w = std::sqrt(L);
        double p = std::pow(2.0 * w / cfg_.accuracy_target, 1.0 / 6.0);
        p = std::max(p, double(cfg_.min_points_per_wavelength));
        const double wavenumber = std::max(w, 2.0 * pi * q_.K());
        long steps = long(std::ceil(wavenumber * p / (2 * pi)));
        steps = std::max<long>(steps, cfg_.min_steps);
        steps = ((steps + 63) / 64) * 64;  // quantize so nearby lambdas share node caches
        if (steps > cfg_.max_steps)
            throw numeric_error("hill: step count overflow at |lambda| = " + std::to_string(abs_lambda));
        return steps;
    }

    template <class S>
    FundamentalData propagate(S lambda, bool need_derivative, long steps_override = 0) const {
        const double al = std::abs(cx(lambda));
        if (al > cfg_.lambda_cap)
            throw numeric_error("hill: |lambda| exceeds configured window");
        const long steps = steps_override > 0 ? steps_override : steps_for(al);
        const detail::NodeSamples& ns = nodes(steps);
        const double h = 1.0 / double(steps);

        detail::Mat2<S> M = detail::Mat2<S>::Identity();
        detail::Mat2<S> V = detail::Mat2<S>::Zero();
        double wdef = 0.0;
        const long check_every = std::max<long>(1, steps / 8);
        for (long k = 0; k < steps; ++k) {
            detail::gauss6_step<S>(&ns.v[std::size_t(3 * k)], lambda, h, M,
                                   need_derivative ? &V : nullptr);
            if ((k + 1) % check_every == 0 || k + 1 == steps) {
                const S det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
                wdef = std::max(wdef, std::abs(cx(det) - cx(1.0)));
            }
        }

        FundamentalData out;
        out.lambda = cx(lambda);
        out.y1_1 = cx(M(0, 0));
        out.y2_1 = cx(M(0, 1));
        out.dy1_1 = cx(M(1, 0));
        out.dy2_1 = cx(M(1, 1));
        out.wronskian_defect = wdef;
        if (need_derivative)
            out.dlam = std::array<cx, 4>{cx(V(0, 0)), cx(V(0, 1)), cx(V(1, 0)), cx(V(1, 1))};
        return out;
    }

    FundamentalData fundamental_matrix(double lambda, bool need_derivative) const {
        return propagate<double>(lambda, need_derivative);
    }
    FundamentalData fundamental_matrix(cx lambda, bool need_derivative) const {
        if (lambda.imag() == 0.0) return propagate<double>(lambda.real(), need_derivative);
        return propagate<cx>(lambda, need_derivative);
    }

    double discriminant(double lambda) const {
        const auto f = propagate<double>(lambda, false);
        return f.y1_1.real() + f.dy2_1.real();
    }
    cx discriminant(cx lambda) const {
        const auto f = fundamental_matrix(lambda, false);
        return f.y1_1 + f.dy2_1;
    }
    // (Delta, dDelta/dlambda)
    std::pair<double, double> discriminant_with_derivative(double lambda) const {
        const auto f = propagate<double>(lambda, true);
        return {f.y1_1.real() + f.dy2_1.real(), (*f.dlam)[0].real() + (*f.dlam)[3].real()};
    }

    void dump_delta_csv(const std::string& path, double lam_min, double lam_max, int samples) const {
        std::FILE* fp = std::fopen(path.c_str(), "w");
        if (!fp) throw std::runtime_error("cannot open " + path);
        std::fprintf(fp, "lambda,delta_re,delta_im\n");
        for (int i = 0; i < samples; ++i) {
            const double lam = lam_min + (lam_max - lam_min) * i / double(samples - 1);
            const double d = discriminant(lam);
            std::fprintf(fp, "%.17g,%.17g,%.17g\n", lam, d, 0.0);
        }
        std::fclose(fp);
    }

  private:
    const detail::NodeSamples& nodes(long steps) const {
        std::lock_guard<std::mutex> lock(mu_);
        for (const auto& ns : cache_)
            if (ns.steps == steps) return ns;
        cache_.push_back(detail::sample_nodes(q_, steps));
        return cache_.back();
    }

    Potential q_;
    IntegratorConfig cfg_;
    mutable std::mutex mu_;
    mutable std::deque<detail::NodeSamples> cache_;
};

}  // namespace hb
