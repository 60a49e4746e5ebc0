// Cyclic delay diversity in the frequency domain: per-subcarrier effective
// channels for CDD and Alamouti+CDD, plus the time-domain cyclic shift the
// phase ramps are equivalent to.
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "txdivsim/numerics.hpp"

namespace txdiv {

struct CddConfig {
    int n_fft = 512;
    std::vector<int> delays = {0, 64, 128, 192};  // samples, one per tx antenna
};

// output[n] = x[(n - d) mod N]
std::vector<cplx> cyclic_shift(std::span<const cplx> x, int d);

// Single-stream CDD effective channel for one receive antenna:
// h_eff(k) = (1/sqrt(Nt)) * sum_i H_k[i] * exp(-j 2 pi k delays[i] / N)
cplx cdd_effective(std::span<const cplx> h_k, int k, const CddConfig& cfg);

// Alamouti+CDD: stream 1 on antennas {1,3}, stream 2 on antennas {2,4},
// each antenna keeping its configured cyclic delay. Includes both the
// per-stream 1/sqrt(2) and the per-pair 1/sqrt(2), so the receiver sees a
// plain two-branch Alamouti channel (g1, g2) with unscaled symbols.
std::pair<cplx, cplx> alamouti_cdd_effective(std::span<const cplx> h_k, int k, const CddConfig& cfg);

}  // namespace txdiv
