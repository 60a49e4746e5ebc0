// Per-subcarrier detection and soft-output generation: symbolwise MLD for
// MDC-QOSTBC groups, Alamouti combining, single-stream CDD detection, LMMSE
// equalization, and the exhaustive/pairwise MLD oracles of Table 1.
#pragma once

#include <span>
#include <vector>

#include "txdivsim/numerics.hpp"
#include "txdivsim/stbc.hpp"

namespace txdiv {

enum class LlrMode { Exact, MaxLog };

struct DetectorOutput {
    std::vector<cplx> hard_symbols;
    std::vector<double> llrs;        // bits_per_symbol per symbol, label order
    long hypotheses_per_symbol = 0;  // Table 1 search-space figure
};

struct GroupDecision {
    std::array<double, 2> hard{};    // (real, imag) coordinate decision
    std::vector<double> llrs;        // all label bits of the symbol
};

// Symbol-by-symbol MLD on one whitened 2x2 group. The LLR is the exact log
// ratio of summed Gaussian likelihoods over the M (real, imag) hypotheses
// (equal a priori), or its max-log variant.
GroupDecision mld_group(const GroupSystem& g, const Constellation& c, LlrMode mode = LlrMode::Exact);

// Full MDC-QOSTBC chain: equivalent channel -> matched filter + whitening ->
// four independent group MLDs. h is the Nr x 4 subcarrier channel; r_stack
// is the 8*Nr real stack (see stbc.hpp). hypotheses_per_symbol = M.
DetectorOutput mdc_mld(std::span<const double> r_stack, const CMat& h, const Constellation& c,
                       double noise_variance, LlrMode mode = LlrMode::Exact);

// Conjugate combining over 2 slots and Nr receive antennas; per-symbol LLRs
// from the resulting scalar Gaussian channel. r(t, m) is the slot-t sample of
// receive antenna m. Throws std::domain_error on an all-zero channel.
DetectorOutput alamouti_detect(const CMat& r, std::span<const cplx> g1, std::span<const cplx> g2,
                               const Constellation& c, double noise_variance, LlrMode mode = LlrMode::Exact);

// Maximum-ratio combining across receive antennas for the single-stream CDD
// channel. A fully faded channel yields zero LLRs rather than an error.
DetectorOutput cdd_detect(std::span<const cplx> r, std::span<const cplx> h_eff, const Constellation& c,
                          double noise_variance, LlrMode mode = LlrMode::Exact);

// LMMSE x = (G^H G + N0 I)^-1 G^H r with per-symbol soft output from the
// unbiased-SINR Gaussian approximation. Complex overload serves the complex
// equivalent-channel forms (QO-STBC), the real overload the MDC real form.
DetectorOutput lmmse_detect(std::span<const cplx> r_stack, const EquivChannel& g, const Constellation& c,
                            LlrMode mode = LlrMode::Exact);
DetectorOutput lmmse_detect(std::span<const double> r_stack, const EquivChannel& g, const Constellation& c,
                            LlrMode mode = LlrMode::Exact);

// Pairwise joint MLD for QO-STBC (test oracle and Table 1 counting): the
// Gram decouples {s1,s4} from {s2,s3}, so each pair is searched jointly over
// M^2 hypotheses. hypotheses_per_symbol = M^2.
DetectorOutput qo_joint_mld(std::span<const cplx> r_stack, const EquivChannel& g, const Constellation& c);

// Exhaustive joint MLD over all M^4 data hypotheses of one MDC-QOSTBC block,
// straight minimization of ||r - ps*G*c||^2. Oracle for the group chain.
std::vector<cplx> mdc_exhaustive_mld(std::span<const double> r_stack, const EquivChannel& g,
                                     const Constellation& c);

// LLRs for the bits of one real axis observed through x = a + noise.
// sigma2_dim is the noise variance of that dimension.
void axis_llrs(double x, double sigma2_dim, const Constellation& c, LlrMode mode, std::span<double> out);

}  // namespace txdiv
