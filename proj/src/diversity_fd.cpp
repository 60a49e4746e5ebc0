#include "txdivsim/diversity_fd.hpp"

#include <cmath>
#include <numbers>

namespace txdiv {

std::vector<cplx> cyclic_shift(std::span<const cplx> x, int d) {
    const int n = static_cast<int>(x.size());
    if (d < 0 || d >= n) throw std::invalid_argument("cyclic_shift: delay out of range");
    std::vector<cplx> out(n);
    for (int i = 0; i < n; ++i) out[i] = x[(i - d % n + n) % n];
    return out;
}

namespace {

cplx phase_ramp(int k, int delay, int n_fft) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) * delay / n_fft;
    return {std::cos(ang), std::sin(ang)};
}

}  // namespace

cplx cdd_effective(std::span<const cplx> h_k, int k, const CddConfig& cfg) {
    if (h_k.size() != cfg.delays.size()) throw std::invalid_argument("cdd_effective: gain/delay count mismatch");
    if (k < 0 || k >= cfg.n_fft) throw std::invalid_argument("cdd_effective: subcarrier out of range");
    cplx acc = 0;
    for (size_t i = 0; i < h_k.size(); ++i) acc += h_k[i] * phase_ramp(k, cfg.delays[i], cfg.n_fft);
    return acc / std::sqrt(static_cast<double>(h_k.size()));
}

std::pair<cplx, cplx> alamouti_cdd_effective(std::span<const cplx> h_k, int k, const CddConfig& cfg) {
    if (h_k.size() != 4 || cfg.delays.size() != 4) throw std::invalid_argument("alamouti_cdd_effective: needs 4 antennas");
    if (k < 0 || k >= cfg.n_fft) throw std::invalid_argument("alamouti_cdd_effective: subcarrier out of range");
    const cplx g1 = 0.5 * (h_k[0] * phase_ramp(k, cfg.delays[0], cfg.n_fft) +
                           h_k[2] * phase_ramp(k, cfg.delays[2], cfg.n_fft));
    const cplx g2 = 0.5 * (h_k[1] * phase_ramp(k, cfg.delays[1], cfg.n_fft) +
                           h_k[3] * phase_ramp(k, cfg.delays[3], cfg.n_fft));
    return {g1, g2};
}

}  // namespace txdiv
