// Space-time block code construction and the linearized receive model:
// codewords for the four schemes, equivalent channels, and the matched
// filter -> whitening -> 2x2 group decomposition used by MDC-QOSTBC.
#pragma once

#include <array>
#include <span>

#include "txdivsim/numerics.hpp"

namespace txdiv {

enum class SchemeId { CDD, ALAMOUTI_CDD, QOSTBC, MDC_QOSTBC };

const char* scheme_name(SchemeId s);

// One space-time block. `entries` is stored unscaled; the transmitter applies
// `power_scale` so per-channel-use total transmit power is 1.
struct Codeword {
    int slots = 0;       // T
    int antennas = 0;    // Nt
    CMat entries;        // T x Nt, unscaled
    double power_scale = 1.0;
};

// MDC-QOSTBC symbol map. Each transmit symbol combines coordinates of two
// data symbols: x1 = c1R + j*c3R, x2 = c2R + j*c4R, x3 = -c1I + j*c3I,
// x4 = -c2I + j*c4I. All eight real coordinates of c1..c4 are carried.
std::array<cplx, 4> mdc_symbol_map(const std::array<cplx, 4>& c);

// Builds the codeword matrix for a scheme. Symbol counts: 4 for MDC-QOSTBC
// and QO-STBC, 2 for Alamouti(+CDD), 1 for CDD.
Codeword encode(SchemeId scheme, std::span<const cplx> symbols);

// Linearized receive model. Stacking the (slot-wise conjugated where the
// codeword row is conjugated) received samples of all T slots gives
// r = power_scale * M * s + n, with M the unscaled matrix held here.
//
// Stacking conventions, per receive antenna, antennas stacked vertically:
//   MDC-QOSTBC (real form, 8 columns over [c1R c1I c2R c2I c3R c3I c4R c4I]):
//     [Re r1, Re r2*, Re r3, Re r4*, Im r1, Im r2*, Im r3, Im r4*]
//   QO-STBC  (complex, 4 columns): [r1, r2*, r3*, r4]
//   Alamouti (complex, 2 columns): [r1, r2*]
//   CDD      (complex, 1 column):  [r1]
struct EquivChannel {
    enum class Form { Complex, Real };
    Form form = Form::Complex;
    RMat real_mat;          // valid when form == Real
    CMat cplx_mat;          // valid when form == Complex
    double power_scale = 1.0;
    double noise_variance = 1.0;  // N0 per complex dimension
};

EquivChannel equiv_channel(SchemeId scheme, const CMat& h, double noise_variance = 1.0);

// One whitened 2x2 real system y = H c + v with white unit-variance v,
// carrying one complex data symbol as (real, imag) coordinates.
struct GroupSystem {
    std::array<double, 2> y{};
    std::array<std::array<double, 2>, 2> h{};
};

// Matched filter + per-block whitening for the MDC-QOSTBC real form.
// `r_stack` is the 8*Nr real received stack (layout above, including the
// codeword power scale). Throws std::domain_error on a degenerate
// (all-zero) channel.
std::array<GroupSystem, 4> matched_whiten(const EquivChannel& g, std::span<const double> r_stack);

// Real received stack for one MDC-QOSTBC block: applies the slot conjugation
// and Re/Im split to the 4 per-slot samples of each receive antenna.
std::vector<double> mdc_stack(const CMat& r_slots_by_rx);

// Complex received stack [r1, r2*, r3*, r4] per receive antenna for QO-STBC.
std::vector<cplx> qo_stack(const CMat& r_slots_by_rx);

}  // namespace txdiv
