#pragma once

// Actions I_n, normalizers xi_n, the closed-form u_n+-, the quadrature
// v_n+-, off-diagonal angle sums beta_n, Birkhoff coordinates z_n, and the
// nonlinear part A = Phi - Phi_0 of the Birkhoff map.
//
// z_n+- is assembled exclusively through the uv-factorization
//   z_n+- = u_n+- v_n+-,   u_n+- = 2(tau-mu) +- i (2 pi n / sqrt(Delta_n(mu))) 2 sinh kappa,
// which stays finite through closed gaps; the angle integral along the gap is
// used only as a cross-check on well-open gaps.

#include "hb/curve.hpp"

namespace hb {

struct ActionQuadratureConfig {
    int cheb_nodes = 64;
    int gl_nodes = 64;          // v / beta path quadrature
    int gl_nodes_max = 512;     // node-doubling limit
    double quad_tol = 1e-9;     // doubling convergence requirement
    double edge_snap = 1e-9;    // |mu - edge| below this means mu sits at the edge
};

struct BirkhoffRow {
    double I = 0;          // action
    double xi = 0;         // sqrt(8 I_n / gamma_n^2), continued through closed gaps
    double delta = 0;      // 2 (lam_dot - tau)/gamma for open gaps
    cx u_plus, u_minus;
    cx v_plus, v_minus;
    cx z_plus, z_minus;    // u v
    double beta_sum = 0;   // sum_{k != n} beta_{n,k}
    cx z;                  // z_n
    cx z_neg;              // z_{-n}
    cx A;                  // z_n - (Phi_0)_n
    cx A_neg;              // z_{-n} - (Phi_0)_{-n}
};

struct BirkhoffData {
    int n_max = 0;
    std::vector<BirkhoffRow> row;  // row[n-1]
    std::vector<std::string> warnings;

    const BirkhoffRow& at(int n) const { return row[std::size_t(n - 1)]; }
    BirkhoffRow& at(int n) { return row[std::size_t(n - 1)]; }

    SequenceVector to_sequence() const {
        SequenceVector z(n_max);
        for (int n = 1; n <= n_max; ++n) z.set_pair(n, at(n).z);
        return z;
    }
    SequenceVector remainder_sequence() const {
        SequenceVector a(n_max);
        for (int n = 1; n <= n_max; ++n) a.set_pair(n, at(n).A);
        return a;
    }
};

namespace detail {

// Endpoint-desingularized integral of f(lambda)/sqrt+((hi-l)(l-lo)) from the
// edge `from` to the interior point `to` (the other edge is `other`):
// substituting l = from +- (to-from) s^2 removes the 1/sqrt at the start.
template <class F>
double gap_path_integral(F&& f, double from, double other, double to, const GaussLegendre& gl) {
    const double span = to - from;             // signed
    if (span == 0.0) return 0.0;
    return gl.integrate(
        [&](double s) {
            const double lam = from + span * s * s;
            const double inner = (other - lam) * (span > 0 ? 1.0 : -1.0);
            if (inner <= 0.0) throw numeric_error("gap path integral: degenerate geometry");
            return 2.0 * (span > 0 ? 1.0 : -1.0) * std::sqrt(std::abs(span)) * f(lam) /
                   std::sqrt(inner);
        },
        0.0, 1.0);
}

template <class F>
double converged_gap_integral(F&& f, double from, double other, double to,
                              const ActionQuadratureConfig& cfg, const char* what) {
    int n = cfg.gl_nodes;
    GaussLegendre gl(n);
    double v = gap_path_integral(f, from, other, to, gl);
    while (n < cfg.gl_nodes_max) {
        GaussLegendre gl2(2 * n);
        const double v2 = gap_path_integral(f, from, other, to, gl2);
        if (std::abs(v2 - v) <= cfg.quad_tol * std::max(1.0, std::abs(v2))) return v2;
        v = v2;
        n *= 2;
    }
    GaussLegendre gl2(2 * n);
    const double v2 = gap_path_integral(f, from, other, to, gl2);
    if (std::abs(v2 - v) > 10 * cfg.quad_tol * std::max(1.0, std::abs(v2)))
        throw numeric_error(std::string("quadrature did not converge in ") + what);
    return v2;
}

}  // namespace detail

// xi_n^2 = (2 / (pi^2 n)) * int_{-1}^{1} (t - delta_n)^2 chi_n(tau + t gamma/2) dt/sqrt(1-t^2),
// finite for closed gaps; I_n = gamma_n^2 xi_n^2 / 8.
inline void compute_action(const SpectralData& sd, int n, const ActionQuadratureConfig& cfg,
                           BirkhoffRow& r) {
    const auto& g = sd.at(n);
    r.delta = g.open_gap ? 2.0 * (g.lam_dot - g.tau) / g.gamma : 0.0;
    if (std::abs(r.delta) > 1.0 + 1e-9)
        throw numeric_error("delta_n out of [-1,1] at n = " + std::to_string(n));
    const auto tnodes = chebyshev_nodes(cfg.cheb_nodes);
    double acc = 0;
    for (double t : tnodes) {
        const double lam = g.tau + 0.5 * g.gamma * t;
        acc += sq(t - r.delta) * chi_n(sd, n, lam);
    }
    const double xi2 = 2.0 / (pi * n) * acc / double(cfg.cheb_nodes);
    if (xi2 <= 0.0) throw numeric_error("negative xi^2 radicand at n = " + std::to_string(n));
    r.xi = std::sqrt(xi2);
    r.I = sq(g.gamma) * xi2 / 8.0;
}

// u_n+- from tau - mu, the Floquet exponent and the gap-free product.
inline void compute_u(const SpectralData& sd, int n, BirkhoffRow& r) {
    const auto& g = sd.at(n);
    const double re = 2.0 * (g.tau - g.mu);
    const double im = 2.0 * pi * n / std::sqrt(g.delta_n_at_mu) * 2.0 * std::sinh(g.kappa);
    r.u_plus = cx(re, im);
    r.u_minus = cx(re, -im);
}

// v_n+- = exp(+- i s* J) with J the desingularized path integral of
// (zeta_n - 1) along the gap from the nearer edge to mu.
inline void compute_v(const SpectralData& sd, const PsiSystem& psis, int n,
                      const ActionQuadratureConfig& cfg, BirkhoffData& bd) {
    BirkhoffRow& r = bd.at(n);
    const auto& g = sd.at(n);
    if (!g.open_gap) {
        if (g.mu == g.tau) {
            r.v_plus = r.v_minus = cx(1.0);
            return;
        }
        // degenerate-limit form: exponent from (zeta(l) - zeta(tau))/|tau - l|
        const double zt = zeta_n(sd, psis, n, g.tau);
        const double sgn = (((n % 2 == 0) ? -1.0 : 1.0) * g.star_root_at_mu >= 0) ? 1.0 : -1.0;
        GaussLegendre gl(cfg.gl_nodes);
        const double J = gl.integrate(
            [&](double lam) {
                return (zeta_n(sd, psis, n, lam) - zt) / std::abs(g.tau - lam);
            },
            std::min(g.tau, g.mu), std::max(g.tau, g.mu)) *
            ((g.mu > g.tau) ? 1.0 : -1.0);
        r.v_plus = std::exp(+sgn * J);
        r.v_minus = std::exp(-sgn * J);
        return;
    }

    const double dlo = g.mu - g.lam_lo, dhi = g.lam_hi - g.mu;
    if (std::min(dlo, dhi) <= cfg.edge_snap * std::max(1.0, g.gamma)) {
        r.v_plus = r.v_minus = cx(1.0);  // mu at an edge: empty path
        return;
    }
    const double sstar = (g.kappa >= 0) ? 1.0 : -1.0;
    auto zf = [&](double lam) { return zeta_n(sd, psis, n, lam) - 1.0; };
    double J;
    if (dlo <= dhi) {
        J = detail::converged_gap_integral(zf, g.lam_lo, g.lam_hi, g.mu, cfg, "v_pm");
    } else {
        J = detail::converged_gap_integral(zf, g.lam_hi, g.lam_lo, g.mu, cfg, "v_pm");
    }
    const cx e = std::exp(cx(0.0, sstar * J));
    r.v_plus = e;
    r.v_minus = std::conj(e);
}

// beta_{n,k} for one open gap k != n, and the sum beta_n.
inline double beta_nk(const SpectralData& sd, const PsiSystem& psis, int n, int k,
                      const ActionQuadratureConfig& cfg, std::vector<std::string>* warnings) {
    const auto& g = sd.at(k);
    if (!g.open_gap) return 0.0;
    const double dlo = g.mu - g.lam_lo, dhi = g.lam_hi - g.mu;
    if (std::min(dlo, dhi) <= cfg.edge_snap * std::max(1.0, g.gamma)) {
        if (warnings && std::min(dlo, dhi) > 0 && std::min(dlo, dhi) < 1e-9)
            warnings->push_back("beta_{" + std::to_string(n) + "," + std::to_string(k) +
                                "}: mu within 1e-9 of a gap edge, contribution snapped to 0");
        return 0.0;
    }
    const double sstar = (g.kappa >= 0) ? 1.0 : -1.0;
    auto f = [&](double lam) { return psi_ratio(sd, psis, n, k, lam) * zeta_n(sd, psis, k, lam); };
    double J;
    if (dlo <= dhi) {
        J = detail::converged_gap_integral(f, g.lam_lo, g.lam_hi, g.mu, cfg, "beta_nk");
    } else {
        J = detail::converged_gap_integral(f, g.lam_hi, g.lam_lo, g.mu, cfg, "beta_nk");
    }
    return sstar * J;
}

// Optional cross-check integral beta_{n,n} (well-open gaps only):
// z_n+- should equal gamma_n e^{+- i beta_nn}.
inline double beta_nn(const SpectralData& sd, const PsiSystem& psis, int n,
                      const ActionQuadratureConfig& cfg) {
    const auto& g = sd.at(n);
    if (!g.open_gap) throw numeric_error("beta_nn: gap closed");
    const double sstar = (g.kappa >= 0) ? 1.0 : -1.0;
    auto f = [&](double lam) { return zeta_n(sd, psis, n, lam); };
    const double dlo = g.mu - g.lam_lo, dhi = g.lam_hi - g.mu;
    double J;
    if (dlo <= dhi) {
        J = detail::converged_gap_integral(f, g.lam_lo, g.lam_hi, g.mu, cfg, "beta_nn");
    } else {
        // int_lo^mu = int_lo^hi + int_hi^mu = pi/ s-ish + exchanged path; use
        // the normalization: int over the full gap of zeta/sqrt+ equals pi.
        J = pi + detail::converged_gap_integral(f, g.lam_hi, g.lam_lo, g.mu, cfg, "beta_nn");
    }
    return sstar * J;
}

// Full map: q must be real-type with zero mean. n_max defaults to spectrum size.
struct BirkhoffOptions {
    ActionQuadratureConfig quad;
    PsiOptions psi;
    SpectrumOptions spectrum;
    int jobs = 0;
};

inline BirkhoffData birkhoff_from_spectral(const SpectralData& sd, const PsiSystem& psis,
                                           const Potential& q, const BirkhoffOptions& opt = {}) {
    BirkhoffData bd;
    bd.n_max = sd.n_max;
    bd.row.resize(std::size_t(sd.n_max));
    std::vector<std::vector<std::string>> warn(std::size_t(sd.n_max));

    parallel_for(std::size_t(sd.n_max), opt.jobs, [&](std::size_t i) {
        const int n = int(i) + 1;
        BirkhoffRow& r = bd.at(n);
        compute_action(sd, n, opt.quad, r);
        compute_u(sd, n, r);
        compute_v(sd, psis, n, opt.quad, bd);
        double beta = 0;
        for (int k : psis.open)
            if (k != n) beta += beta_nk(sd, psis, n, k, opt.quad, &warn[i]);
        r.beta_sum = beta;
        r.z_plus = r.u_plus * r.v_plus;
        r.z_minus = r.u_minus * r.v_minus;
        const cx phase = std::exp(cx(0.0, beta));
        r.z_neg = r.xi * 0.5 * r.z_plus * phase;
        r.z = r.xi * 0.5 * r.z_minus * std::conj(phase);
        const cx phi0_n = q.hat(n) / std::sqrt(double(n) * pi);
        const cx phi0_neg = q.hat(-n) / std::sqrt(double(n) * pi);
        r.A = r.z - phi0_n;
        r.A_neg = r.z_neg - phi0_neg;
    });
    for (auto& w : warn) bd.warnings.insert(bd.warnings.end(), w.begin(), w.end());
    return bd;
}

struct BirkhoffResult {
    SpectralData spectral;
    PsiSystem psis;
    BirkhoffData data;
};

inline BirkhoffResult birkhoff_map(const Potential& q, int n_max, BirkhoffOptions opt = {}) {
    const double nrm = l2_norm(q, true);
    if (std::abs(q.mean()) > 1e-10 * std::max(1.0, nrm))
        throw std::invalid_argument("birkhoff_map: potential must have zero mean");
    HillSolver solver(q);
    BirkhoffResult res;
    res.spectral = compute_spectrum(solver, n_max, opt.spectrum, opt.jobs);
    res.psis = solve_psi_zeros(res.spectral, opt.psi, opt.jobs);
    res.data = birkhoff_from_spectral(res.spectral, res.psis, q, opt);
    return res;
}

inline nlohmann::json birkhoff_to_json(const BirkhoffData& bd) {
    auto rows = nlohmann::json::array();
    for (int n = 1; n <= bd.n_max; ++n) {
        const auto& r = bd.at(n);
        rows.push_back({{"n", n},
                        {"I", r.I},
                        {"xi", r.xi},
                        {"z_re", r.z.real()},
                        {"z_im", r.z.imag()},
                        {"A_re", r.A.real()},
                        {"A_im", r.A.imag()}});
    }
    nlohmann::json j;
    j["rows"] = rows;
    if (!bd.warnings.empty()) j["warnings"] = bd.warnings;
    return j;
}

}  // namespace hb
