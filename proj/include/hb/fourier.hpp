#pragma once

// Potentials as finite Fourier data on the circle, Sobolev norms, mode
// projections, weighted sequence spaces and the weighted Fourier transform.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hb/util.hpp"

namespace hb {

// Real 1-periodic trigonometric polynomial q(x) = c + sum_{0<|n|<=K} qhat_n e^{2pi i n x}.
// Two-sided coefficient storage; n = 0 kept separately as the mean.
// Reality qhat_{-n} = conj(qhat_n) is enforced by every constructor.
class Potential {
  public:
    Potential() : K_(0), mean_(0.0) {}

    // from the positive-side coefficients qhat_1..qhat_K
    static Potential from_positive(std::vector<cx> pos, double mean = 0.0) {
        Potential p;
        p.K_ = int(pos.size());
        p.mean_ = mean;
        p.c_.assign(2 * p.K_ + 1, cx(0.0));
        for (int n = 1; n <= p.K_; ++n) {
            p.set_pair(n, pos[std::size_t(n - 1)]);
        }
        return p;
    }

    // from a full two-sided listing; conjugate symmetry is checked.
    static Potential from_two_sided(int K, double mean, const std::vector<std::pair<int, cx>>& entries,
                                    double rtol = 1e-9) {
        Potential p;
        p.K_ = K;
        p.mean_ = mean;
        p.c_.assign(2 * K + 1, cx(0.0));
        for (const auto& [n, v] : entries) {
            if (n == 0 || std::abs(n) > K) throw std::invalid_argument("coefficient index out of range");
            p.c_[std::size_t(n + K)] += v;
        }
        double scale = std::abs(mean);
        for (const auto& v : p.c_) scale = std::max(scale, std::abs(v));
        for (int n = 1; n <= K; ++n) {
            const cx a = p.c_[std::size_t(n + K)], b = p.c_[std::size_t(K - n)];
            if (std::abs(b - std::conj(a)) > rtol * std::max(1.0, scale))
                throw std::invalid_argument("reality constraint violated at mode " + std::to_string(n));
            const cx sym = 0.5 * (a + std::conj(b));
            p.c_[std::size_t(n + K)] = sym;
            p.c_[std::size_t(K - n)] = std::conj(sym);
        }
        return p;
    }

    int K() const { return K_; }
    double mean() const { return mean_; }

    cx hat(int n) const {
        if (n == 0) return cx(mean_);
        if (std::abs(n) > K_) return cx(0.0);
        return c_[std::size_t(n + K_)];
    }

    void set_mean(double c) { mean_ = c; }
    void set_pair(int n, cx v) {  // sets qhat_n = v and qhat_{-n} = conj(v), n >= 1
        if (n < 1 || n > K_) throw std::invalid_argument("set_pair: bad mode");
        c_[std::size_t(n + K_)] = v;
        c_[std::size_t(K_ - n)] = std::conj(v);
    }

    bool is_zero() const {
        if (mean_ != 0.0) return false;
        for (const auto& v : c_)
            if (v != cx(0.0)) return false;
        return true;
    }

    double evaluate(double x) const {
        double s = mean_;
        for (int n = 1; n <= K_; ++n) {
            const cx a = c_[std::size_t(n + K_)];
            s += 2.0 * (a.real() * std::cos(2 * pi * n * x) - a.imag() * std::sin(2 * pi * n * x));
        }
        return s;
    }

    std::vector<double> sample(int m) const {
        std::vector<double> v(m);
        for (int i = 0; i < m; ++i) v[std::size_t(i)] = evaluate(double(i) / m);
        return v;
    }

    // <q, cos 2pi n x> = Re qhat_n and <q, sin 2pi n x> = -Im qhat_n (real q)
    double inner_cos(int n) const { return hat(n).real(); }
    double inner_sin(int n) const { return -hat(n).imag(); }

    Potential translated(double a) const {
        Potential p = *this;
        for (int n = 1; n <= K_; ++n)
            p.set_pair(n, hat(n) * std::exp(cx(0.0, 2 * pi * n * a)));
        return p;
    }

    Potential scaled(double s) const {
        Potential p = *this;
        p.mean_ *= s;
        for (auto& v : p.c_) v *= s;
        return p;
    }

    Potential mean_zero_part() const {
        Potential p = *this;
        p.mean_ = 0.0;
        return p;
    }

    double linf_bound() const {
        double s = std::abs(mean_);
        for (int n = 1; n <= K_; ++n) s += 2.0 * std::abs(hat(n));
        return s;
    }

  private:
    int K_;
    double mean_;
    std::vector<cx> c_;  // index n + K_
};

// H^s norm. include_mean on: (|qhat_0|^2 + sum_{n != 0} |n|^{2s} |qhat_n|^2)^{1/2};
// off: the mean-free seminorm (sum over n != 0 only).
inline double sobolev_norm(const Potential& p, double s, bool include_mean) {
    if (s < 0) throw std::invalid_argument("sobolev_norm: s must be >= 0");
    double acc = include_mean ? sq(p.mean()) : 0.0;
    for (int n = 1; n <= p.K(); ++n)
        acc += 2.0 * std::pow(double(n), 2 * s) * std::norm(p.hat(n));
    return std::sqrt(acc);
}

inline double l2_norm(const Potential& p, bool include_mean = false) {
    return sobolev_norm(p, 0.0, include_mean);
}

// L^2-orthogonal projection onto modes |n| <= L.
inline Potential project_PL(const Potential& p, int L) {
    if (L < 0) throw std::invalid_argument("project_PL: L must be >= 0");
    std::vector<cx> pos(static_cast<std::size_t>(std::min(L, p.K())));
    for (int n = 1; n <= std::min(L, p.K()); ++n) pos[std::size_t(n - 1)] = p.hat(n);
    return Potential::from_positive(std::move(pos), p.mean());
}

inline Potential tail_QL(const Potential& p, int L) {  // (Id - P_L) p, mean dropped with P_0 convention
    std::vector<cx> pos(static_cast<std::size_t>(p.K()));
    for (int n = 1; n <= p.K(); ++n) pos[std::size_t(n - 1)] = (n > L) ? p.hat(n) : cx(0.0);
    return Potential::from_positive(std::move(pos), 0.0);
}

inline Potential operator-(const Potential& a, const Potential& b) {
    const int K = std::max(a.K(), b.K());
    std::vector<cx> pos(static_cast<std::size_t>(K));
    for (int n = 1; n <= K; ++n) pos[std::size_t(n - 1)] = a.hat(n) - b.hat(n);
    return Potential::from_positive(std::move(pos), a.mean() - b.mean());
}

inline Potential operator+(const Potential& a, const Potential& b) {
    const int K = std::max(a.K(), b.K());
    std::vector<cx> pos(static_cast<std::size_t>(K));
    for (int n = 1; n <= K; ++n) pos[std::size_t(n - 1)] = a.hat(n) + b.hat(n);
    return Potential::from_positive(std::move(pos), a.mean() + b.mean());
}

// Two-sided complex sequence (z_n)_{0<|n|<=n_max} with weighted norms.
class SequenceVector {
  public:
    SequenceVector() : n_max_(0) {}
    explicit SequenceVector(int n_max) : n_max_(n_max), z_(std::size_t(2 * n_max), cx(0.0)) {}

    int n_max() const { return n_max_; }

    cx get(int n) const {
        if (n == 0 || std::abs(n) > n_max_) return cx(0.0);
        return z_[idx(n)];
    }
    void set(int n, cx v) {
        if (n == 0 || std::abs(n) > n_max_) throw std::invalid_argument("SequenceVector: bad index");
        z_[idx(n)] = v;
    }
    // set z_n = v, z_{-n} = conj(v) (the real-type constraint)
    void set_pair(int n, cx v) {
        set(n, v);
        set(-n, std::conj(v));
    }

    bool real_type(double tol = 1e-10) const {
        double scale = 1e-300;
        for (const auto& v : z_) scale = std::max(scale, std::abs(v));
        for (int n = 1; n <= n_max_; ++n)
            if (std::abs(get(-n) - std::conj(get(n))) > tol * std::max(1.0, scale)) return false;
        return true;
    }

    double norm_alpha(double alpha) const {
        double acc = 0;
        for (int n = 1; n <= n_max_; ++n)
            acc += std::pow(double(n), 2 * alpha) * (std::norm(get(n)) + std::norm(get(-n)));
        return std::sqrt(acc);
    }

  private:
    std::size_t idx(int n) const { return std::size_t(n > 0 ? (n_max_ + n - 1) : (n_max_ + n)); }
    int n_max_;
    std::vector<cx> z_;
};

// Weighted Fourier transform (the linearization of the Birkhoff map at 0):
// (phi0(p))_n = qhat_n / sqrt(|n| pi). Requires mean-free input.
inline SequenceVector phi0(const Potential& p, int n_max = -1) {
    const double nrm = l2_norm(p, true);
    if (std::abs(p.mean()) > 1e-12 * std::max(1.0, nrm))
        throw std::invalid_argument("phi0: potential must have zero mean");
    if (n_max < 0) n_max = p.K();
    SequenceVector z(n_max);
    for (int n = 1; n <= n_max; ++n)
        z.set_pair(n, p.hat(n) / std::sqrt(double(n) * pi));
    return z;
}

inline Potential phi0_inverse(const SequenceVector& z) {
    std::vector<cx> pos(static_cast<std::size_t>(z.n_max()));
    for (int n = 1; n <= z.n_max(); ++n)
        pos[std::size_t(n - 1)] = std::sqrt(double(n) * pi) * z.get(n);
    return Potential::from_positive(std::move(pos), 0.0);
}

// ---------------------------------------------------------------------------
// JSON serialization: { "K": int, "mean": float, "coeffs": [[n, re, im], ...] }
// Only n >= 1 rows are written; reality is re-imposed on load.
// ---------------------------------------------------------------------------
inline nlohmann::json to_json(const Potential& p) {
    nlohmann::json j;
    j["K"] = p.K();
    j["mean"] = p.mean();
    auto arr = nlohmann::json::array();
    for (int n = 1; n <= p.K(); ++n)
        arr.push_back({n, p.hat(n).real(), p.hat(n).imag()});
    j["coeffs"] = arr;
    return j;
}

inline Potential potential_from_json(const nlohmann::json& j) {
    const int K = j.at("K").get<int>();
    const double mean = j.at("mean").get<double>();
    std::vector<std::pair<int, cx>> entries;
    for (const auto& row : j.at("coeffs")) {
        const int n = row.at(0).get<int>();
        entries.emplace_back(n, cx(row.at(1).get<double>(), row.at(2).get<double>()));
        if (n > 0) {
            bool has_neg = false;
            for (const auto& r2 : j.at("coeffs"))
                if (r2.at(0).get<int>() == -n) has_neg = true;
            if (!has_neg)
                entries.emplace_back(-n, std::conj(cx(row.at(1).get<double>(), row.at(2).get<double>())));
        }
    }
    return Potential::from_two_sided(K, mean, entries);
}

// Grid DFT of real samples: returns qhat_n for n = 0..m/2 (used by tests and
// the flow module's diagnostics; m need not be a power of two).
inline std::vector<cx> dft_coeffs(const std::vector<double>& samples) {
    const int m = int(samples.size());
    std::vector<cx> out(std::size_t(m / 2 + 1), cx(0.0));
    for (int n = 0; n <= m / 2; ++n) {
        cx acc(0.0);
        for (int i = 0; i < m; ++i)
            acc += samples[std::size_t(i)] * std::exp(cx(0.0, -2 * pi * n * i / double(m)));
        out[std::size_t(n)] = acc / double(m);
    }
    return out;
}

}  // namespace hb
