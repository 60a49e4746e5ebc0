#include "txdivsim/fec_turbo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace txdiv {

const char* rate_name(CodeRate r) {
    switch (r) {
        case CodeRate::R1_3: return "1/3";
        case CodeRate::R1_2: return "1/2";
        case CodeRate::R8_9: return "8/9";
    }
    return "?";
}

namespace {

constexpr int kStates = 8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// RSC with feedback 1+D^2+D^3 (13 octal) and feedforward 1+D+D^3 (15 octal).
// State packs the shift register as (d1<<2)|(d2<<1)|d3, d1 most recent.
struct Rsc {
    static int feedback_bit(int s) { return ((s >> 1) ^ s) & 1; }  // d2 ^ d3
    static int step(int s, int u, int& parity) {
        const int d1 = (s >> 2) & 1, d2 = (s >> 1) & 1, d3 = s & 1;
        const int w = u ^ d2 ^ d3;
        parity = w ^ d1 ^ d3;
        return (w << 2) | (d1 << 1) | d2;
    }
};

std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Runs one terminated RSC over `in`, appending 3 tail steps. Returns parity
// per step and the tail systematic bits.
void rsc_encode(std::span<const std::uint8_t> in, std::vector<std::uint8_t>& parity,
                std::vector<std::uint8_t>& tail_sys, std::vector<std::uint8_t>& tail_par) {
    int s = 0;
    parity.resize(in.size());
    for (size_t k = 0; k < in.size(); ++k) {
        int p;
        s = Rsc::step(s, in[k], p);
        parity[k] = static_cast<std::uint8_t>(p);
    }
    tail_sys.resize(3);
    tail_par.resize(3);
    for (int k = 0; k < 3; ++k) {
        const int u = Rsc::feedback_bit(s);  // drives the register to zero
        int p;
        s = Rsc::step(s, u, p);
        tail_sys[k] = static_cast<std::uint8_t>(u);
        tail_par[k] = static_cast<std::uint8_t>(p);
    }
}

struct Trellis {
    int next[kStates][2];
    int parity[kStates][2];
    Trellis() {
        for (int s = 0; s < kStates; ++s)
            for (int u = 0; u < 2; ++u) {
                int p;
                next[s][u] = Rsc::step(s, u, p);
                parity[s][u] = p;
            }
    }
};

const Trellis& trellis() {
    static const Trellis t;
    return t;
}

// Max-Log-MAP over one terminated constituent code.
// lsys/lpar cover the K info steps plus 3 tail steps; la covers info steps.
// Returns the APP LLR of each info bit (positive = bit 0).
std::vector<double> max_log_map(std::span<const double> lsys, std::span<const double> lpar,
                                std::span<const double> la) {
    const Trellis& t = trellis();
    const int total = static_cast<int>(lsys.size());
    const int k_info = static_cast<int>(la.size());

    auto gamma = [&](int k, int s, int u) {
        const double lin = lsys[k] + (k < k_info ? la[k] : 0.0);
        const double gs = (u == 0) ? 0.5 * lin : -0.5 * lin;
        const double gp = (t.parity[s][u] == 0) ? 0.5 * lpar[k] : -0.5 * lpar[k];
        return gs + gp;
    };

    std::vector<double> alpha(static_cast<size_t>(total + 1) * kStates, kNegInf);
    alpha[0] = 0.0;  // trellis starts in state 0
    for (int k = 0; k < total; ++k) {
        double* a = &alpha[static_cast<size_t>(k) * kStates];
        double* an = &alpha[static_cast<size_t>(k + 1) * kStates];
        for (int s = 0; s < kStates; ++s) {
            if (a[s] == kNegInf) continue;
            for (int u = 0; u < 2; ++u) {
                const double m = a[s] + gamma(k, s, u);
                const int ns = t.next[s][u];
                if (m > an[ns]) an[ns] = m;
            }
        }
        const double mx = *std::max_element(an, an + kStates);
        for (int s = 0; s < kStates; ++s)
            if (an[s] != kNegInf) an[s] -= mx;
    }

    std::vector<double> app(k_info);
    std::array<double, kStates> beta, beta_prev;
    beta.fill(kNegInf);
    beta[0] = 0.0;  // terminated
    for (int k = total - 1; k >= 0; --k) {
        const double* a = &alpha[static_cast<size_t>(k) * kStates];
        if (k < k_info) {
            double m0 = kNegInf, m1 = kNegInf;
            for (int s = 0; s < kStates; ++s) {
                if (a[s] == kNegInf) continue;
                for (int u = 0; u < 2; ++u) {
                    const double m = a[s] + gamma(k, s, u) + beta[t.next[s][u]];
                    if (u == 0) m0 = std::max(m0, m);
                    else m1 = std::max(m1, m);
                }
            }
            app[k] = m0 - m1;
        }
        beta_prev = beta;
        for (int s = 0; s < kStates; ++s) {
            double b = kNegInf;
            for (int u = 0; u < 2; ++u) b = std::max(b, gamma(k, s, u) + beta_prev[t.next[s][u]]);
            beta[s] = b;
        }
        const double mx = *std::max_element(beta.begin(), beta.end());
        for (auto& b : beta)
            if (b != kNegInf) b -= mx;
    }
    return app;
}

}  // namespace

std::vector<int> make_interleaver(int n, std::uint64_t seed) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    std::uint64_t s = seed;
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(splitmix64(s) % static_cast<std::uint64_t>(i + 1));
        std::swap(p[i], p[j]);
    }
    return p;
}

TurboCodec::TurboCodec(TurboConfig cfg) : cfg_(cfg) {
    if (cfg_.block_len < 1) throw std::invalid_argument("TurboCodec: block_len must be positive");
    if (cfg_.rate == CodeRate::R1_2 && cfg_.block_len % 2 != 0)
        throw std::invalid_argument("TurboCodec: rate 1/2 needs even block_len");
    if (cfg_.rate == CodeRate::R8_9 && cfg_.block_len % 16 != 0)
        throw std::invalid_argument("TurboCodec: rate 8/9 needs block_len divisible by 16");
    perm_ = make_interleaver(cfg_.block_len, cfg_.interleaver_seed);
    kept_ = kept_positions();
}

int TurboCodec::payload_len() const {
    const int k = cfg_.block_len;
    switch (cfg_.rate) {
        case CodeRate::R1_3: return 3 * k;
        case CodeRate::R1_2: return 2 * k;
        case CodeRate::R8_9: return k + k / 8;
    }
    return 0;
}

std::vector<int> TurboCodec::kept_positions() const {
    const int k = cfg_.block_len;
    std::vector<int> kept;
    kept.reserve(payload_len() + tail_len());
    for (int i = 0; i < k; ++i) {
        kept.push_back(3 * i);  // systematic always kept
        const bool keep_p1 = cfg_.rate == CodeRate::R1_3 || (cfg_.rate == CodeRate::R1_2 && i % 2 == 0) ||
                             (cfg_.rate == CodeRate::R8_9 && i % 16 == 0);
        const bool keep_p2 = cfg_.rate == CodeRate::R1_3 || (cfg_.rate == CodeRate::R1_2 && i % 2 == 1) ||
                             (cfg_.rate == CodeRate::R8_9 && i % 16 == 8);
        if (keep_p1) kept.push_back(3 * i + 1);
        if (keep_p2) kept.push_back(3 * i + 2);
    }
    for (int i = 0; i < tail_len(); ++i) kept.push_back(3 * k + i);  // tails unpunctured
    return kept;
}

std::vector<std::uint8_t> TurboCodec::puncture(std::span<const std::uint8_t> mother) const {
    if (static_cast<int>(mother.size()) != mother_len()) throw std::invalid_argument("puncture: bad mother length");
    std::vector<std::uint8_t> out(kept_.size());
    for (size_t i = 0; i < kept_.size(); ++i) out[i] = mother[kept_[i]];
    return out;
}

std::vector<double> TurboCodec::depuncture(std::span<const double> punctured) const {
    if (punctured.size() != kept_.size()) throw std::invalid_argument("depuncture: bad punctured length");
    std::vector<double> out(mother_len(), 0.0);
    for (size_t i = 0; i < kept_.size(); ++i) out[kept_[i]] = punctured[i];
    return out;
}

std::vector<std::uint8_t> TurboCodec::encode(std::span<const std::uint8_t> info) const {
    const int k = cfg_.block_len;
    if (static_cast<int>(info.size()) != k) throw std::invalid_argument("turbo encode: info length mismatch");

    std::vector<std::uint8_t> p1, t1s, t1p;
    rsc_encode(info, p1, t1s, t1p);

    std::vector<std::uint8_t> permuted(k);
    for (int i = 0; i < k; ++i) permuted[i] = info[perm_[i]];
    std::vector<std::uint8_t> p2, t2s, t2p;
    rsc_encode(permuted, p2, t2s, t2p);

    std::vector<std::uint8_t> mother(mother_len());
    for (int i = 0; i < k; ++i) {
        mother[3 * i] = info[i];
        mother[3 * i + 1] = p1[i];
        mother[3 * i + 2] = p2[i];
    }
    for (int i = 0; i < 3; ++i) {
        mother[3 * k + 2 * i] = t1s[i];
        mother[3 * k + 2 * i + 1] = t1p[i];
        mother[3 * k + 6 + 2 * i] = t2s[i];
        mother[3 * k + 6 + 2 * i + 1] = t2p[i];
    }
    return puncture(mother);
}

std::vector<std::uint8_t> TurboCodec::decode(std::span<const double> llrs) const {
    const int k = cfg_.block_len;
    if (static_cast<int>(llrs.size()) != coded_len()) throw std::invalid_argument("turbo decode: LLR length mismatch");
    const std::vector<double> mother = depuncture(llrs);

    std::vector<double> lsys1(k + 3), lpar1(k + 3), lsys2(k + 3), lpar2(k + 3);
    for (int i = 0; i < k; ++i) {
        lsys1[i] = mother[3 * i];
        lpar1[i] = mother[3 * i + 1];
        lpar2[i] = mother[3 * i + 2];
        lsys2[i] = mother[3 * perm_[i]];  // encoder 2 saw the permuted systematic
    }
    for (int i = 0; i < 3; ++i) {
        lsys1[k + i] = mother[3 * k + 2 * i];
        lpar1[k + i] = mother[3 * k + 2 * i + 1];
        lsys2[k + i] = mother[3 * k + 6 + 2 * i];
        lpar2[k + i] = mother[3 * k + 6 + 2 * i + 1];
    }

    std::vector<double> la1(k, 0.0), la2(k, 0.0), app2;
    for (int it = 0; it < cfg_.iterations; ++it) {
        const std::vector<double> app1 = max_log_map(lsys1, lpar1, la1);
        for (int i = 0; i < k; ++i) la2[i] = app1[perm_[i]] - lsys1[perm_[i]] - la1[perm_[i]];
        app2 = max_log_map(lsys2, lpar2, la2);
        for (int i = 0; i < k; ++i) la1[perm_[i]] = app2[i] - lsys2[i] - la2[i];
    }

    // decision from the last constituent's APPs, mapped back to natural order
    std::vector<std::uint8_t> out(k);
    for (int i = 0; i < k; ++i) out[perm_[i]] = app2[i] < 0.0 ? 1 : 0;
    return out;
}

}  // namespace txdiv
