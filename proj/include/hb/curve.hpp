#pragma once

// Square-root branches on the spectral curve, the localized products chi_n /
// zeta_n, and the psi-function zeros sigma_m^n determined by the contour
// normalization conditions.
//
// All contour integrals are evaluated in collapsed form: a circuit around a
// gap equals twice the integral over the gap against the principal root
// sqrt+((lam_hi - l)(l - lam_lo)), which the substitution l = tau + t gamma/2
// turns into a Gauss-Chebyshev sum. Only the s-root and principal roots ever
// appear; products are written with per-factor orientation so every factor is
// positive on the real window and closed gaps drop out exactly.

#include <map>

#include <Eigen/Dense>

#include "hb/spectrum.hpp"

namespace hb {

// Branch of sqrt((b - lambda)(lambda - a)) on C \ [a,b] that behaves like
// +i(lambda - tau) for large |lambda|. Equals -sqrt+((b-l)(l-a)) on the upper
// rim of the cut and +sqrt+ on the lower rim; one full loop around [a,b]
// flips the sign.
inline cx s_root(double a, double b, cx lambda) {
    return cx(0.0, 1.0) * std::sqrt(lambda - a) * std::sqrt(lambda - b);
}

// (zero_j - lambda) / sqrt+(Q_j(lambda)), oriented so the value is positive
// for real lambda in the window of gap `ref` (j < ref lies left, j > ref
// right). Closed gaps give exactly 1 and must be skipped by the caller.
inline double oriented_factor(const SpectralData& sd, int j, int ref, double lam, double zero_j) {
    const double q = sd.Q(j, lam);
    if (q <= 0.0) throw numeric_error("oriented_factor: lambda inside foreign gap");
    const double num = (j > ref) ? (zero_j - lam) : (lam - zero_j);
    return num / std::sqrt(q);
}

// chi_n(lambda) on the n-th window: n pi / sqrt+(lambda - lambda0) times the
// oriented product over open gaps m != n with zeros at the critical points.
inline double chi_n(const SpectralData& sd, int n, double lam) {
    if (lam <= sd.lambda0) throw numeric_error("chi_n: lambda below lambda0");
    double p = n * pi / std::sqrt(lam - sd.lambda0);
    for (int m : sd.open_indices()) {
        if (m == n) continue;
        p *= oriented_factor(sd, m, n, lam, sd.at(m).lam_dot);
    }
    return p;
}

struct PsiSystem {
    int n_max = 0;
    std::vector<int> open;                         // all open gap indices
    std::vector<std::map<int, double>> sigma;      // sigma[n-1][m] for open m != n
    std::vector<double> cond_residual;             // max |C_m| at the solution, per n
    std::vector<double> norm_residual;             // |(1/2pi) circuit_n - 1|, per n

    double sigma_of(int n, int m, const SpectralData& sd) const {
        const auto& mp = sigma[std::size_t(n - 1)];
        const auto it = mp.find(m);
        return it != mp.end() ? it->second : sd.at(m).tau;  // closed gaps: tau exactly
    }
};

// zeta_n(lambda): as chi_n with the critical points replaced by sigma_m^n.
inline double zeta_n(const SpectralData& sd, const PsiSystem& psis, int n, double lam) {
    if (lam <= sd.lambda0) throw numeric_error("zeta_n: lambda below lambda0");
    double p = n * pi / std::sqrt(lam - sd.lambda0);
    for (int m : psis.open) {
        if (m == n) continue;
        p *= oriented_factor(sd, m, n, lam, psis.sigma_of(n, m, sd));
    }
    return p;
}

struct PsiOptions {
    int cheb_nodes = 64;
    double residual_tol = 1e-10;  // dimensionless in-gap units
    double hard_tol = 1e-8;       // per the contract: failure beyond this aborts
    int max_iterations = 60;
    double fd_step = 1e-6;        // forward-difference step in in-gap units
};

namespace detail {

// weight of the m-th collapsed condition for psi_n, normalized to ~1:
//   m pi / sqrt+(lam - lambda0) * |tau_n - c_m|/sqrt+(Q_n) * prod_{open j != m,n} factor_j
struct ConditionWeight {
    const SpectralData& sd;
    int n, m;
    double center_m;
    double operator()(double lam, const std::map<int, double>& sig) const {
        double p = m * pi / std::sqrt(lam - sd.lambda0);
        if (n <= sd.n_max) {
            const double qn = sd.Q(n, lam);
            if (qn <= 0.0) throw numeric_error("condition weight: lambda inside gap n");
            p *= std::abs(sd.at(n).tau - center_m) / std::sqrt(qn);
        }
        for (const auto& [j, sj] : sig) {
            if (j == m) continue;
            p *= oriented_factor(sd, j, m, lam, sj);
        }
        return p;
    }
};

}  // namespace detail

// Solve, for each n = 1..n_max, the zeros {sigma_m^n : m open, m != n} from
// the conditions that the circuit integral of psi_n around every open gap
// m != n vanishes. Newton iteration in in-gap coordinates s = 2(sigma-tau)/gamma,
// seeded at s = 0, forward-difference Jacobian.
inline PsiSystem solve_psi_zeros(const SpectralData& sd, PsiOptions opt = {}, int jobs = 0) {
    PsiSystem ps;
    ps.n_max = sd.n_max;
    ps.open = sd.open_indices();
    ps.sigma.resize(std::size_t(sd.n_max));
    ps.cond_residual.assign(std::size_t(sd.n_max), 0.0);
    ps.norm_residual.assign(std::size_t(sd.n_max), 0.0);

    const auto tnodes = chebyshev_nodes(opt.cheb_nodes);

    parallel_for(std::size_t(sd.n_max), jobs, [&](std::size_t idx) {
        const int n = int(idx) + 1;
        std::vector<int> unknowns;
        for (int m : ps.open)
            if (m != n) unknowns.push_back(m);
        const int d = int(unknowns.size());
        if (d == 0) return;

        auto sigma_map = [&](const Eigen::VectorXd& s) {
            std::map<int, double> mp;
            for (int k = 0; k < d; ++k) {
                const auto& g = sd.at(unknowns[std::size_t(k)]);
                mp[unknowns[std::size_t(k)]] = g.tau + 0.5 * g.gamma * s(k);
            }
            if (n <= sd.n_max && !sd.at(n).open_gap) {
                // nothing: closed n contributes no sigma entry
            }
            return mp;
        };

        // residual vector of all conditions
        auto residual = [&](const Eigen::VectorXd& s) {
            const auto sig = sigma_map(s);
            Eigen::VectorXd C(d);
            for (int k = 0; k < d; ++k) {
                const int m = unknowns[std::size_t(k)];
                const auto& gm = sd.at(m);
                detail::ConditionWeight W{sd, n, m, sq(m * pi) + sd.mean_shift};
                const double w0 = W(gm.tau, sig);
                double acc = 0;
                for (double t : tnodes) {
                    const double lam = gm.tau + 0.5 * gm.gamma * t;
                    acc += (s(k) - t) * W(lam, sig) / w0;
                }
                C(k) = acc / double(opt.cheb_nodes);
            }
            return C;
        };

        Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
        Eigen::VectorXd C = residual(s);
        double best = C.lpNorm<Eigen::Infinity>();
        int it = 0;
        for (; it < opt.max_iterations && best > opt.residual_tol; ++it) {
            Eigen::MatrixXd J(d, d);
            for (int k = 0; k < d; ++k) {
                Eigen::VectorXd sp = s;
                sp(k) += opt.fd_step;
                J.col(k) = (residual(sp) - C) / opt.fd_step;
            }
            Eigen::VectorXd step = J.partialPivLu().solve(-C);
            double scale = 1.0;
            for (int damp = 0; damp < 8; ++damp) {
                Eigen::VectorXd s_try = s + scale * step;
                bool in_range = true;
                for (int k = 0; k < d; ++k)
                    if (std::abs(s_try(k)) > 3.0) in_range = false;
                if (in_range) {
                    Eigen::VectorXd C_try = residual(s_try);
                    const double v = C_try.lpNorm<Eigen::Infinity>();
                    if (v < best) {
                        s = s_try;
                        C = C_try;
                        best = v;
                        break;
                    }
                }
                scale *= 0.5;
                if (damp == 7)
                    throw numeric_error("psi system: damped Newton stalled at n = " +
                                        std::to_string(n));
            }
        }
        if (best > opt.hard_tol)
            throw numeric_error("psi system: residual " + std::to_string(best) +
                                " after " + std::to_string(it) + " iterations at n = " +
                                std::to_string(n));
        ps.cond_residual[idx] = best;
        const auto sig = sigma_map(s);
        ps.sigma[idx] = sig;
    });

    // normalization checks: (1/2pi) circuit_n psi_n / sqrt(Delta^2-4) = 1
    parallel_for(std::size_t(sd.n_max), jobs, [&](std::size_t idx) {
        const int n = int(idx) + 1;
        const auto& g = sd.at(n);
        double val;
        if (g.open_gap) {
            double acc = 0;
            for (double t : tnodes) acc += zeta_n(sd, ps, n, g.tau + 0.5 * g.gamma * t);
            val = acc / double(opt.cheb_nodes);
        } else {
            val = zeta_n(sd, ps, n, g.tau);
        }
        ps.norm_residual[idx] = std::abs(val - 1.0);
    });

    return ps;
}

// psi_n(lambda) / psi_k(lambda) as a ratio of oriented products; closed gaps
// and the truncation tail cancel exactly.
inline double psi_ratio(const SpectralData& sd, const PsiSystem& psis, int n, int k, double lam) {
    double p = double(n) / double(k);
    // (sigma_k^n - lam) / (sigma_n^k - lam) and the remaining open-gap ratios
    const double num_k = psis.sigma_of(n, k, sd) - lam;
    const double den_n = psis.sigma_of(k, n, sd) - lam;
    if (den_n == 0.0) throw numeric_error("psi_ratio: lambda hits sigma_n^k");
    p *= num_k / den_n;
    for (int j : psis.open) {
        if (j == n || j == k) continue;
        p *= (psis.sigma_of(n, j, sd) - lam) / (psis.sigma_of(k, j, sd) - lam);
    }
    return p;
}

inline nlohmann::json psi_to_json(const SpectralData& sd, const PsiSystem& ps) {
    nlohmann::json j;
    j["n_max"] = ps.n_max;
    j["open"] = ps.open;
    auto rows = nlohmann::json::array();
    for (int n = 1; n <= ps.n_max; ++n) {
        nlohmann::json row;
        row["n"] = n;
        row["cond_residual"] = ps.cond_residual[std::size_t(n - 1)];
        row["norm_residual"] = ps.norm_residual[std::size_t(n - 1)];
        auto sig = nlohmann::json::array();
        for (const auto& [m, s] : ps.sigma[std::size_t(n - 1)])
            sig.push_back({m, s, s - sd.at(m).tau});
        row["sigma"] = sig;
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

}  // namespace hb
