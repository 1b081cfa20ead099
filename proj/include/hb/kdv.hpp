#pragma once

// Pseudospectral KdV evolution u_t = -u_xxx + 6 u u_x on the circle, the
// phase-rotated approximant, the Airy flow, remainder tables and tail studies.
//
// Time stepping: the third derivative is removed exactly by an integrating
// factor, the nonlinearity 3 d_x(u^2) is advanced with classical RK4. The
// quadratic term is evaluated on a grid with at least 3 Kstate + 1 points, so
// it is alias-free for the retained modes. The mode n = 0 is conserved
// identically by construction.

#include <fftw3.h>

#include "hb/fourier.hpp"
#include "hb/frequencies.hpp"

namespace hb {

struct StepControl {
    double dt_factor = 0.5;        // (2 pi K)^3 dt <= dt_factor
    double drift_tol = 1e-9;       // allowed relative drift of ||u||^2 per unit time
    int max_halvings = 6;
    int state_modes = 0;           // K_state; 0 = max(4K, 32)
};

struct FlowTrajectory {
    std::vector<double> times;
    std::vector<Potential> states;     // oracle u(t)
    std::vector<Potential> wkb;        // phase-rotated initial data
    std::vector<Potential> remainder;  // u(t) - wkb(t)
    std::vector<Potential> airy;       // e^{t L_c} q (optional)
    std::vector<double> mass, l2sq, hamiltonian;

    void dump_jsonl(const std::string& path) const {
        std::FILE* fp = std::fopen(path.c_str(), "w");
        if (!fp) throw std::runtime_error("cannot open " + path);
        for (std::size_t i = 0; i < times.size(); ++i) {
            nlohmann::json j;
            j["t"] = times[i];
            j["state"] = to_json(states[i]);
            const std::string line = j.dump();
            std::fprintf(fp, "%s\n", line.c_str());
        }
        std::fclose(fp);
    }
};

namespace detail {

class RealGridFFT {
  public:
    explicit RealGridFFT(int m) : m_(m) {
        grid_ = fftw_alloc_real(std::size_t(m));
        spec_ = fftw_alloc_complex(std::size_t(m / 2 + 1));
        static std::mutex plan_mutex;
        std::lock_guard<std::mutex> lock(plan_mutex);
        fwd_ = fftw_plan_dft_r2c_1d(m, grid_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(m, spec_, grid_, FFTW_ESTIMATE);
    }
    ~RealGridFFT() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(grid_);
        fftw_free(spec_);
    }
    RealGridFFT(const RealGridFFT&) = delete;
    RealGridFFT& operator=(const RealGridFFT&) = delete;

    int size() const { return m_; }

    // spectrum (hat coefficients, unit-normalized) -> grid values
    void to_grid(const std::vector<cx>& hat, std::vector<double>& out) {
        const int nh = m_ / 2 + 1;
        for (int k = 0; k < nh; ++k) {
            const cx v = (k < int(hat.size())) ? hat[std::size_t(k)] : cx(0.0);
            spec_[k][0] = v.real();
            spec_[k][1] = v.imag();
        }
        fftw_execute(bwd_);  // unnormalized: produces m * sum hat_k e^{...}
        out.resize(std::size_t(m_));
        for (int i = 0; i < m_; ++i) out[std::size_t(i)] = grid_[i];
    }
    // grid values -> hat coefficients 0..m/2
    void to_hat(const std::vector<double>& in, std::vector<cx>& hat) {
        for (int i = 0; i < m_; ++i) grid_[i] = in[std::size_t(i)];
        fftw_execute(fwd_);
        const int nh = m_ / 2 + 1;
        hat.resize(std::size_t(nh));
        for (int k = 0; k < nh; ++k)
            hat[std::size_t(k)] = cx(spec_[k][0], spec_[k][1]) / double(m_);
    }

  private:
    int m_;
    double* grid_;
    fftw_complex* spec_;
    fftw_plan fwd_, bwd_;
};

inline int pick_grid(int modes) {
    int m = 32;
    while (m < 3 * modes + 1) m *= 2;
    return m;
}

}  // namespace detail

// Hamiltonian H = int (1/2 u_x^2 + u^3) dx, computed alias-free on a grid
// with > 4 K_state points (exact for the cubic term).
inline double kdv_hamiltonian(const Potential& u) {
    double hx = 0;
    for (int n = 1; n <= u.K(); ++n) hx += 2.0 * sq(2 * pi * n) * std::norm(u.hat(n));
    int m = 32;
    while (m < 4 * u.K() + 2) m *= 2;
    double cube = 0;
    for (int i = 0; i < m; ++i) cube += std::pow(u.evaluate(double(i) / m), 3);
    cube /= double(m);
    return 0.5 * hx + cube;
}

class KdvSolver {
  public:
    KdvSolver(const Potential& q, StepControl ctl = {})
        : ctl_(ctl),
          K0_(q.K()),
          Ks_(ctl.state_modes > 0 ? ctl.state_modes : std::max(4 * q.K(), 32)),
          M_(detail::pick_grid(Ks_)),
          fft_(M_) {
        if (K0_ > Ks_) throw std::invalid_argument("kdv: K exceeds grid capacity");
        const std::size_t N = std::size_t(Ks_ + 1);
        u_.assign(N, cx(0.0));
        u_[0] = cx(q.mean());
        for (int n = 1; n <= q.K(); ++n) u_[std::size_t(n)] = q.hat(n);
        const double denom = std::pow(2 * pi * std::max(K0_, 4), 3);
        dt_ = ctl.dt_factor / denom;
        t_ = 0.0;
        k1_.assign(N, cx(0.0));
        k2_.assign(N, cx(0.0));
        k3_.assign(N, cx(0.0));
        k4_.assign(N, cx(0.0));
        tmp_.assign(N, cx(0.0));
        full_.assign(std::size_t(M_ / 2 + 1), cx(0.0));
        e1_.assign(N, cx(1.0));
        e2_.assign(N, cx(1.0));
        cached_h_ = -1.0;
    }

    double t() const { return t_; }
    double dt() const { return dt_; }
    int state_modes() const { return Ks_; }

    Potential state() const {
        std::vector<cx> pos(static_cast<std::size_t>(Ks_));
        for (int n = 1; n <= Ks_; ++n) pos[std::size_t(n - 1)] = u_[std::size_t(n)];
        return Potential::from_positive(std::move(pos), u_[0].real());
    }

    // advance to time t_target (>= t), adjusting the last step to land exactly
    void advance_to(double t_target) {
        while (t_ < t_target - 1e-15 * std::max(1.0, t_target)) {
            const double h = std::min(dt_, t_target - t_);
            step(h);
            t_ += h;
        }
        t_ = t_target;
    }

    double l2sq() const {
        double s = sq(u_[0].real());
        for (int n = 1; n <= Ks_; ++n) s += 2.0 * std::norm(u_[std::size_t(n)]);
        return s;
    }

  private:
    // N(u) = 3 d_x (u^2) in mode space, alias-free for modes <= Ks
    void nonlinear(const std::vector<cx>& in, std::vector<cx>& out) {
        std::fill(full_.begin(), full_.end(), cx(0.0));
        for (int n = 0; n <= Ks_; ++n) full_[std::size_t(n)] = in[std::size_t(n)];
        fft_.to_grid(full_, grid_);
        for (auto& g : grid_) g = g * g;
        fft_.to_hat(grid_, full_);
        for (int n = 0; n <= Ks_; ++n)
            out[std::size_t(n)] = 3.0 * cx(0.0, 2 * pi * n) * full_[std::size_t(n)];
    }

    void refresh_phases(double h) {
        for (int n = 0; n <= Ks_; ++n) {
            const double w = std::pow(2 * pi * n, 3);
            e1_[std::size_t(n)] = std::exp(cx(0.0, 0.5 * w * h));
            e2_[std::size_t(n)] = std::exp(cx(0.0, w * h));
        }
        cached_h_ = h;
    }

    // one IF-RK4 step of size h
    void step(double h) {
        if (h != cached_h_) refresh_phases(h);
        const int N = Ks_ + 1;
        nonlinear(u_, k1_);
        for (int n = 0; n < N; ++n) {
            const std::size_t i = std::size_t(n);
            tmp_[i] = e1_[i] * (u_[i] + 0.5 * h * k1_[i]);
        }
        nonlinear(tmp_, k2_);
        for (int n = 0; n < N; ++n) {
            const std::size_t i = std::size_t(n);
            tmp_[i] = e1_[i] * u_[i] + 0.5 * h * k2_[i];
        }
        nonlinear(tmp_, k3_);
        for (int n = 0; n < N; ++n) {
            const std::size_t i = std::size_t(n);
            tmp_[i] = e2_[i] * u_[i] + h * e1_[i] * k3_[i];
        }
        nonlinear(tmp_, k4_);
        for (int n = 0; n < N; ++n) {
            const std::size_t i = std::size_t(n);
            u_[i] = e2_[i] * u_[i] + h / 6.0 * (e2_[i] * k1_[i] + 2.0 * e1_[i] * (k2_[i] + k3_[i]) + k4_[i]);
        }
    }

    StepControl ctl_;
    int K0_, Ks_, M_;
    detail::RealGridFFT fft_;
    double dt_, t_;
    std::vector<cx> u_, k1_, k2_, k3_, k4_, tmp_, full_, e1_, e2_;
    std::vector<double> grid_;
    double cached_h_;
};

// coefficients qhat_n e^{i omega_n^c t}; mean unchanged. Phases for n and -n
// are conjugate, so reality is preserved.
inline Potential wkb_approximant(const Potential& q, const FrequencyData& freqs, double t) {
    if (q.K() > freqs.n_max) throw std::invalid_argument("wkb: frequencies missing for high modes");
    std::vector<cx> pos(static_cast<std::size_t>(q.K()));
    for (int n = 1; n <= q.K(); ++n)
        pos[std::size_t(n - 1)] = q.hat(n) * std::exp(cx(0.0, freqs.omega_c_of(n) * t));
    return Potential::from_positive(std::move(pos), q.mean());
}

// Airy flow e^{t L_c}: coefficients qhat_n e^{i s_n^c t}, s_n^c = (2 pi n)^3 + 12 c n pi.
inline Potential airy_flow(const Potential& q, double c, double t) {
    std::vector<cx> pos(static_cast<std::size_t>(q.K()));
    for (int n = 1; n <= q.K(); ++n) {
        const double s = std::pow(2 * pi * n, 3) + 12.0 * c * n * pi;
        pos[std::size_t(n - 1)] = q.hat(n) * std::exp(cx(0.0, s * t));
    }
    return Potential::from_positive(std::move(pos), q.mean());
}

struct EvolveOptions {
    StepControl step;
    bool with_airy = true;
    const FrequencyData* freqs = nullptr;  // required for wkb/remainder columns
};

// Evolve q over the given time grid; fills oracle states, conservation
// monitors, and (when frequencies are supplied) the wkb and remainder columns.
// If the conservation drift exceeds its tolerance the run restarts with the
// step halved, up to max_halvings; exhausting those is a hard error.
inline FlowTrajectory evolve_kdv(const Potential& q, const std::vector<double>& t_grid,
                                 EvolveOptions opt = {}) {
    StepControl ctl = opt.step;
    for (int attempt = 0;; ++attempt) {
        FlowTrajectory tr;
        tr.times = t_grid;
        KdvSolver solver(q, ctl);
        const double l2_0 = solver.l2sq();
        bool drifted = false;
        for (double t : t_grid) {
            solver.advance_to(t);
            Potential u = solver.state();
            const double dt_span = std::max(1.0, std::abs(t));
            if (std::abs(u.mean() - q.mean()) >
                    ctl.drift_tol * dt_span * std::max(1.0, std::abs(q.mean())) ||
                std::abs(solver.l2sq() - l2_0) > ctl.drift_tol * dt_span * std::max(1.0, l2_0)) {
                drifted = true;
                break;
            }
            tr.states.push_back(u);
            tr.mass.push_back(u.mean());
            tr.l2sq.push_back(solver.l2sq());
            tr.hamiltonian.push_back(kdv_hamiltonian(u));
            if (opt.freqs) {
                Potential w = wkb_approximant(q, *opt.freqs, t);
                tr.wkb.push_back(w);
                tr.remainder.push_back(u - w);
            }
            if (opt.with_airy) tr.airy.push_back(airy_flow(q, q.mean(), t));
        }
        if (!drifted) return tr;
        if (attempt >= ctl.max_halvings)
            throw numeric_error("kdv oracle: conservation drift beyond tolerance at minimum step");
        ctl.dt_factor *= 0.5;
    }
}

// Remainder norm table: ||R^t||_{H^{N+1}}, ||R^t||_{H^N} and the 4th-order
// finite-difference time derivative measured in H^{N-1}.
struct RemainderTable {
    std::vector<double> t;
    std::vector<double> r_hchigh;   // H^{N+1}
    std::vector<double> r_hn;       // H^N
    std::vector<double> dr_hlow;    // H^{N-1} of the FD time derivative
};

inline RemainderTable remainder_table(const FlowTrajectory& tr, int N) {
    if (tr.remainder.size() != tr.times.size())
        throw std::invalid_argument("remainder_table: trajectory lacks wkb data");
    RemainderTable tab;
    tab.t = tr.times;
    const std::size_t m = tr.times.size();
    for (std::size_t i = 0; i < m; ++i) {
        tab.r_hchigh.push_back(sobolev_norm(tr.remainder[i], N + 1.0, true));
        tab.r_hn.push_back(sobolev_norm(tr.remainder[i], double(N), true));
    }
    if (m >= 5 && N >= 1) {
        const double dt = tr.times[1] - tr.times[0];
        for (std::size_t i = 2; i + 2 < m; ++i) {
            Potential d = (tr.remainder[i - 2] - tr.remainder[i + 2]).scaled(1.0) +
                          (tr.remainder[i + 1] - tr.remainder[i - 1]).scaled(8.0);
            d = d.scaled(1.0 / (12.0 * dt));
            tab.dr_hlow.push_back(sobolev_norm(d, double(N - 1), true));
        }
    }
    return tab;
}

// sup_t / inf_t of the tail norms ||(Id - P_L) u(t)||_{H^s} and the per-mode
// amplitude bands sup_t | |u_n(t)| - |q_n| |.
struct TailStudy {
    std::vector<int> L;
    std::vector<double> eps;        // max deviation of tail norm from its t=0 value
    std::vector<double> tail_t0;
    std::vector<int> band_n;
    std::vector<double> band;       // per-mode amplitude band
};

inline TailStudy tail_projection_study(const FlowTrajectory& tr, const std::vector<int>& L_list,
                                       double s) {
    TailStudy st;
    st.L = L_list;
    const Potential& q0 = tr.states.front();
    for (int L : L_list) {
        const double v0 = sobolev_norm(tail_QL(q0, L), s, false);
        double dev = 0;
        for (const auto& u : tr.states)
            dev = std::max(dev, std::abs(sobolev_norm(tail_QL(u, L), s, false) - v0));
        st.eps.push_back(dev);
        st.tail_t0.push_back(v0);
    }
    const int K = tr.states.front().K();
    for (int n = 1; n <= K; ++n) {
        double band = 0;
        const double a0 = std::abs(q0.hat(n));
        for (const auto& u : tr.states) band = std::max(band, std::abs(std::abs(u.hat(n)) - a0));
        st.band_n.push_back(n);
        st.band.push_back(band);
    }
    return st;
}

}  // namespace hb
