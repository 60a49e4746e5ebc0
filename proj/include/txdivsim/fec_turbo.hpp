// Rate-1/3 parallel-concatenated turbo codec: two 8-state RSC encoders
// (feedforward 1+D+D^3, feedback 1+D^2+D^3), seeded pseudo-random
// interleaver, puncturing to rates 1/2 and 8/9, and iterative Max-Log-MAP
// decoding.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "txdivsim/numerics.hpp"

namespace txdiv {

enum class CodeRate { R1_3, R1_2, R8_9 };

const char* rate_name(CodeRate r);

struct TurboConfig {
    int block_len = 594;                      // info bits (594 for 1/2, 1056 for 8/9)
    CodeRate rate = CodeRate::R1_2;
    int iterations = 8;
    std::uint64_t interleaver_seed = 0x7e3aULL;
};

// Mother codeword layout: K triplets (systematic, parity1, parity2) followed
// by 12 tail bits, 6 per constituent as alternating (systematic, parity)
// pairs. Both trellises are terminated. Puncturing keeps all systematic bits
// and all tails; parity bits are kept per rate:
//   1/2: parity1 on even info positions, parity2 on odd ones
//   8/9: parity1 at k = 0 (mod 16), parity2 at k = 8 (mod 16)
class TurboCodec {
public:
    explicit TurboCodec(TurboConfig cfg);

    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const;

    // llrs: one value per coded bit, positive = bit 0 more likely.
    std::vector<std::uint8_t> decode(std::span<const double> llrs) const;

    int block_len() const { return cfg_.block_len; }
    int mother_len() const { return 3 * cfg_.block_len + tail_len(); }
    int payload_len() const;                  // punctured length excluding tails
    int coded_len() const { return payload_len() + tail_len(); }
    static constexpr int tail_len() { return 12; }

    const std::vector<int>& interleaver() const { return perm_; }

    // Puncture a mother-layout sequence / expand back inserting zero LLRs at
    // the removed positions.
    std::vector<std::uint8_t> puncture(std::span<const std::uint8_t> mother) const;
    std::vector<double> depuncture(std::span<const double> punctured) const;

private:
    std::vector<int> kept_positions() const;  // indices into the mother layout

    TurboConfig cfg_;
    std::vector<int> perm_;      // info index read by encoder 2 at step k
    std::vector<int> kept_;
};

// Deterministic seeded permutation of 0..n-1 (Fisher-Yates over a SplitMix64
// stream); stands in for the 3GPP internal interleaver.
std::vector<int> make_interleaver(int n, std::uint64_t seed);

}  // namespace txdiv
