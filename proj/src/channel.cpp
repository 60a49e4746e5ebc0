#include "txdivsim/channel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace txdiv {

namespace {
constexpr int kCpSpanSamples = 128;
}

TapProfile TapProfile::tu6() {
    TapProfile p;
    p.delays_us = {0.0, 0.2, 0.5, 1.6, 2.3, 5.0};
    p.powers_db = {-3.0, 0.0, -2.0, -6.0, -8.0, -10.0};
    return p;
}

TapProfile TapProfile::flat() {
    TapProfile p;
    p.delays_us = {0.0};
    p.powers_db = {0.0};
    return p;
}

TapProfile TapProfile::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("TapProfile: cannot open " + path);
    TapProfile p;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double d, pw;
        if (ls >> d >> pw) {
            p.delays_us.push_back(d);
            p.powers_db.push_back(pw);
        }
    }
    if (p.delays_us.empty()) throw std::runtime_error("TapProfile: no taps in " + path);
    for (size_t i = 1; i < p.delays_us.size(); ++i)
        if (p.delays_us[i] <= p.delays_us[i - 1]) throw std::runtime_error("TapProfile: delays must increase");
    if (p.delays_us.front() < 0.0) throw std::runtime_error("TapProfile: negative delay");
    return p;
}

std::vector<double> TapProfile::linear_powers() const {
    std::vector<double> lin(powers_db.size());
    double sum = 0.0;
    for (size_t i = 0; i < powers_db.size(); ++i) {
        lin[i] = std::pow(10.0, powers_db[i] / 10.0);
        sum += lin[i];
    }
    for (auto& v : lin) v /= sum;
    return lin;
}

std::vector<int> TapProfile::sample_delays() const {
    std::vector<int> d(delays_us.size());
    for (size_t i = 0; i < delays_us.size(); ++i)
        d[i] = static_cast<int>(std::lround(delays_us[i] * 1e-6 * sample_rate_hz));
    return d;
}

CMat ChannelRealization::at_subcarrier(int k) const {
    CMat m(nr, nt);
    for (int r = 0; r < nr; ++r)
        for (int t = 0; t < nt; ++t) m(r, t) = h(r, t, k);
    return m;
}

std::vector<cplx> freq_response(std::span<const cplx> taps, std::span<const int> sample_delays, int n_fft) {
    if (taps.size() != sample_delays.size()) throw std::invalid_argument("freq_response: tap/delay count mismatch");
    for (int d : sample_delays)
        if (d < 0 || d >= kCpSpanSamples) throw std::invalid_argument("freq_response: tap delay outside CP span");
    std::vector<cplx> h(n_fft);
    for (int k = 0; k < n_fft; ++k) {
        cplx acc = 0;
        for (size_t t = 0; t < taps.size(); ++t) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) * sample_delays[t] / n_fft;
            acc += taps[t] * cplx(std::cos(ang), std::sin(ang));
        }
        h[k] = acc;
    }
    return h;
}

ChannelRealization draw_channel(const TapProfile& profile, int nt, int nr, int n_fft, Rng& rng) {
    ChannelRealization cr;
    cr.nt = nt;
    cr.nr = nr;
    cr.n_fft = n_fft;
    cr.tap_delays = profile.sample_delays();
    const std::vector<double> pw = profile.linear_powers();
    const int pairs = nt * nr;
    cr.taps.resize(pairs);
    cr.freq.resize(pairs);
    for (int p = 0; p < pairs; ++p) {
        cr.taps[p].resize(pw.size());
        for (size_t t = 0; t < pw.size(); ++t) cr.taps[p][t] = rng.gaussian_pair(pw[t]);
        cr.freq[p] = freq_response(cr.taps[p], cr.tap_delays, n_fft);
    }
    return cr;
}

double noise_variance_from_snr_db(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

void add_awgn(std::span<cplx> signal, double snr_db, Rng& rng) {
    const double n0 = noise_variance_from_snr_db(snr_db);
    if (n0 == 0.0) return;
    for (auto& s : signal) s += rng.gaussian_pair(n0);
}

}  // namespace txdiv
