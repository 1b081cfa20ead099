#pragma once

// KdV frequencies from spectral data, the mean shift, Airy frequencies, and
// trajectory-based frequency measurement by phase-slope fits.

#include <map>

#include "hb/curve.hpp"

namespace hb {

struct FrequencyData {
    int n_max = 0;
    double c = 0;                 // mean of the potential
    std::vector<double> omega;    // omega_n of the mean-zero part, n = 1..n_max
    std::vector<double> omega_c;  // omega_n + 12 c n pi
    std::vector<double> airy;     // s_n^c = (2 pi n)^3 + 12 c n pi
    std::map<int, double> measured;

    double omega_of(int n) const {  // antisymmetric continuation, omega_0 = 0
        if (n == 0) return 0.0;
        const double v = omega[std::size_t(std::abs(n) - 1)];
        return n > 0 ? v : -v;
    }
    double omega_c_of(int n) const {
        if (n == 0) return 0.0;
        const double v = omega_c[std::size_t(std::abs(n) - 1)];
        return n > 0 ? v : -v;
    }
    double airy_of(int n) const {
        if (n == 0) return 0.0;
        const double v = airy[std::size_t(std::abs(n) - 1)];
        return n > 0 ? v : -v;
    }

    void dump_csv(const std::string& path) const {
        std::FILE* fp = std::fopen(path.c_str(), "w");
        if (!fp) throw std::runtime_error("cannot open " + path);
        std::fprintf(fp, "n,omega,omega_c,airy,measured,abs_gap\n");
        for (int n = 1; n <= n_max; ++n) {
            const auto it = measured.find(n);
            const double m = (it != measured.end()) ? it->second : std::nan("");
            std::fprintf(fp, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", n, omega[std::size_t(n - 1)],
                         omega_c[std::size_t(n - 1)], airy[std::size_t(n - 1)], m,
                         std::abs(omega[std::size_t(n - 1)] - std::pow(2 * pi * n, 3)));
        }
        std::fclose(fp);
    }
};

// omega_n = 8 pi n (tau_n + lambda0/2 - sum_{m open} (sigma_m^n - tau_m)).
// The spectral data must belong to the mean-zero part; `c` is added per the
// mean-shift rule omega_n^c = omega_n + 12 c n pi.
inline FrequencyData kdv_frequencies(const SpectralData& sd, const PsiSystem& psis, double c) {
    if (std::abs(sd.mean_shift) > 1e-10)
        throw std::invalid_argument("kdv_frequencies: spectral data must be mean-free");
    if (psis.n_max != sd.n_max) throw std::invalid_argument("kdv_frequencies: psi table missing");
    FrequencyData fd;
    fd.n_max = sd.n_max;
    fd.c = c;
    fd.omega.resize(std::size_t(sd.n_max));
    fd.omega_c.resize(std::size_t(sd.n_max));
    fd.airy.resize(std::size_t(sd.n_max));
    for (int n = 1; n <= sd.n_max; ++n) {
        double s = 0;
        for (int m : psis.open) {
            if (m == n) continue;
            s += psis.sigma_of(n, m, sd) - sd.at(m).tau;
        }
        const double w = 8.0 * pi * n * (sd.at(n).tau + 0.5 * sd.lambda0 - s);
        fd.omega[std::size_t(n - 1)] = w;
        fd.omega_c[std::size_t(n - 1)] = w + 12.0 * c * n * pi;
        fd.airy[std::size_t(n - 1)] = std::pow(2 * pi * n, 3) + 12.0 * c * n * pi;
    }
    return fd;
}

// Least-squares phase slope of z_n along a sampled trajectory. The sampling
// must satisfy dt * omega < pi for every tracked mode (no unwrap ambiguity);
// modes with |z_n| below min_amp are rejected.
inline std::map<int, double> measure_frequencies(const std::vector<double>& times,
                                                 const std::vector<SequenceVector>& zs,
                                                 const std::vector<int>& n_set,
                                                 double min_amp = 1e-8) {
    if (times.size() != zs.size() || times.size() < 16)
        throw std::invalid_argument("measure_frequencies: need >= 16 aligned samples");
    std::map<int, double> out;
    for (int n : n_set) {
        std::vector<double> phase(times.size());
        double acc = std::arg(zs[0].get(n));
        phase[0] = acc;
        for (std::size_t i = 1; i < zs.size(); ++i) {
            const cx z0 = zs[i - 1].get(n), z1 = zs[i].get(n);
            if (std::abs(z0) < min_amp || std::abs(z1) < min_amp)
                throw numeric_error("measure_frequencies: |z_" + std::to_string(n) +
                                    "| below amplitude floor");
            double d = std::arg(z1) - std::arg(z0);
            while (d > pi) d -= 2 * pi;
            while (d < -pi) d += 2 * pi;
            if (std::abs(d) > 0.9 * pi)
                throw numeric_error(
                    "measure_frequencies: phase step near pi at n = " + std::to_string(n) +
                    "; reduce dt below pi/(2 s_n^c)");
            acc += d;
            phase[i] = acc;
        }
        out[n] = line_fit(times, phase).slope;
    }
    return out;
}

}  // namespace hb
