// Frequency-selective Rayleigh fading (TU6 by default) for a spatially
// uncorrelated Nt x Nr link, delivered as per-subcarrier channel matrices,
// plus the AWGN source.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "txdivsim/numerics.hpp"

namespace txdiv {

struct TapProfile {
    std::vector<double> delays_us;   // non-negative, increasing
    std::vector<double> powers_db;   // average tap powers
    double sample_rate_hz = 7.68e6;  // 512 subcarriers at 15 kHz

    // COST 207 Typical Urban, 6 taps.
    static TapProfile tu6();
    // Single tap at delay 0: frequency-flat Rayleigh.
    static TapProfile flat();
    // Plain-text table, one "delay_us power_db" pair per line; '#' comments.
    static TapProfile from_file(const std::string& path);

    std::vector<double> linear_powers() const;  // normalized so they sum to 1
    std::vector<int> sample_delays() const;     // nearest-sample rounding
};

struct ChannelRealization {
    int nt = 0, nr = 0, n_fft = 0;
    std::vector<int> tap_delays;             // samples, shared by all pairs
    std::vector<std::vector<cplx>> taps;     // [rx*nt + tx][tap]
    std::vector<std::vector<cplx>> freq;     // [rx*nt + tx][subcarrier]

    cplx h(int rx, int tx, int k) const { return freq[static_cast<size_t>(rx) * nt + tx][k]; }

    // Nr x Nt channel matrix of one subcarrier.
    CMat at_subcarrier(int k) const;
};

// Per-tap gains are independent circularly symmetric complex Gaussians with
// variance equal to the (normalized) linear tap power, independent across
// antenna pairs. Block fading: one realization per frame.
ChannelRealization draw_channel(const TapProfile& profile, int nt, int nr, int n_fft, Rng& rng);

// H(k) = sum_t g_t exp(-j 2 pi k d_t / N). Tap delays must stay within the
// 128-sample CP-equivalent span.
std::vector<cplx> freq_response(std::span<const cplx> taps, std::span<const int> sample_delays, int n_fft);

// N0 = 10^(-snr_db/10); Es = 1 per channel use per receive antenna.
double noise_variance_from_snr_db(double snr_db);

// Adds complex AWGN in place. snr_db = +infinity leaves the signal unchanged.
void add_awgn(std::span<cplx> signal, double snr_db, Rng& rng);

}  // namespace txdiv
