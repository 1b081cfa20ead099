#pragma once

// Independent eigenvalue oracle: -d^2/dx^2 + q discretized in a Fourier basis
// (periodic on [0,2]) or sine/cosine basis (Dirichlet/Neumann on [0,1]).
// Shares no code with the shooting path; used only for cross-checks.

#include <Eigen/Dense>

#include "hb/fourier.hpp"
#include "hb/util.hpp"

namespace hb {

enum class Boundary { periodic_2, dirichlet, neumann };

namespace detail {

// integral over [0,1] of q(x) cos(m pi x); q is 1-periodic.
inline double q_cos_halfmode(const Potential& q, int m) {
    if (m % 2 == 0) {
        const int j = m / 2;
        if (j == 0) return q.mean();
        return q.hat(j).real();
    }
    // odd m: int_0^1 e^{2 pi i p x} cos(m pi x) dx = (i/pi) [1/(2p+m) + 1/(2p-m)]
    double acc = 0.0;
    for (int p = -q.K(); p <= q.K(); ++p) {
        const cx qp = q.hat(p);
        const double c = 1.0 / (2.0 * p + m) + 1.0 / (2.0 * p - m);
        acc += (cx(0.0, 1.0 / pi) * c * qp).real();
    }
    return acc;
}

inline std::vector<double> hermitian_eigs(const Eigen::MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return out;
}

}  // namespace detail

// Lowest `count` eigenvalues, ascending. `dim` is the basis size per block;
// dim <= 0 picks the spec default 8*count.
inline std::vector<double> matrix_oracle_spectrum(const Potential& q, Boundary bc, int count,
                                                  int dim = 0) {
    if (dim <= 0) dim = 8 * count;
    std::vector<double> eigs;

    if (bc == Boundary::periodic_2) {
        // modes e^{i pi m x} on [0,2]; q couples only m ≡ m' (mod 2):
        // even block = periodic on [0,1], odd block = antiperiodic.
        const int J = dim / 2;
        for (int parity = 0; parity <= 1; ++parity) {
            std::vector<int> modes;
            for (int j = -J; j <= J; ++j) modes.push_back(2 * j + parity);
            const int N = int(modes.size());
            Eigen::MatrixXcd H(N, N);
            for (int r = 0; r < N; ++r)
                for (int c = 0; c < N; ++c) {
                    const int m = modes[std::size_t(r)], mp = modes[std::size_t(c)];
                    cx v = (m == mp) ? cx(sq(pi * m)) : cx(0.0);
                    v += q.hat((m - mp) / 2);  // (m - mp) even by construction
                    H(r, c) = v;
                }
            auto e = detail::hermitian_eigs(H);
            eigs.insert(eigs.end(), e.begin(), e.end());
        }
        std::sort(eigs.begin(), eigs.end());
    } else if (bc == Boundary::dirichlet) {
        // basis sqrt(2) sin(k pi x), k = 1..dim
        Eigen::MatrixXcd H(dim, dim);
        for (int r = 1; r <= dim; ++r)
            for (int c = 1; c <= dim; ++c) {
                double v = (r == c) ? sq(pi * r) : 0.0;
                v += detail::q_cos_halfmode(q, std::abs(r - c)) - detail::q_cos_halfmode(q, r + c);
                H(r - 1, c - 1) = v;
            }
        eigs = detail::hermitian_eigs(H);
    } else {
        // basis 1, sqrt(2) cos(k pi x), k = 1..dim-1
        Eigen::MatrixXcd H(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                double v = (r == c) ? sq(pi * r) : 0.0;
                double scale = 1.0;
                if (r == 0 && c == 0) scale = 1.0;
                else if (r == 0 || c == 0) scale = std::sqrt(2.0);
                v += scale * (detail::q_cos_halfmode(q, std::abs(r - c)) +
                              ((r == 0 || c == 0) ? 0.0 : detail::q_cos_halfmode(q, r + c)));
                if (r == 0 && c == 0) v += 0.0;  // mean already in q_cos_halfmode(0)
                H(r, c) = v;
            }
        eigs = detail::hermitian_eigs(H);
    }

    if (int(eigs.size()) < count) throw numeric_error("matrix oracle: basis smaller than count");
    eigs.resize(std::size_t(count));
    return eigs;
}

// Basis-size sufficiency: eigenvalues must be stable under doubling the basis.
inline double oracle_drift(const Potential& q, Boundary bc, int count, int dim) {
    auto a = matrix_oracle_spectrum(q, bc, count, dim);
    auto b = matrix_oracle_spectrum(q, bc, count, 2 * dim);
    double d = 0;
    for (int i = 0; i < count; ++i)
        d = std::max(d, std::abs(a[std::size_t(i)] - b[std::size_t(i)]) /
                            std::max(1.0, std::abs(b[std::size_t(i)])));
    return d;
}

}  // namespace hb
