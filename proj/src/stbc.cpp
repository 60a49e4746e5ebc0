#include "txdivsim/stbc.hpp"

#include <cmath>

namespace txdiv {

const char* scheme_name(SchemeId s) {
    switch (s) {
        case SchemeId::CDD: return "cdd";
        case SchemeId::ALAMOUTI_CDD: return "alamouti-cdd";
        case SchemeId::QOSTBC: return "qostbc";
        case SchemeId::MDC_QOSTBC: return "mdc-qostbc";
    }
    return "?";
}

std::array<cplx, 4> mdc_symbol_map(const std::array<cplx, 4>& c) {
    return {
        cplx(c[0].real(), c[2].real()),
        cplx(c[1].real(), c[3].real()),
        cplx(-c[0].imag(), c[2].imag()),
        cplx(-c[1].imag(), c[3].imag()),
    };
}

namespace {

// ABBA layout shared by MDC-QOSTBC; rows 2 and 4 are conjugated rows.
CMat abba(const std::array<cplx, 4>& x) {
    CMat m(4, 4);
    const cplx x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
    m(0, 0) = x1; m(0, 1) = x2; m(0, 2) = x3; m(0, 3) = x4;
    m(1, 0) = -std::conj(x2); m(1, 1) = std::conj(x1); m(1, 2) = -std::conj(x4); m(1, 3) = std::conj(x3);
    m(2, 0) = x3; m(2, 1) = x4; m(2, 2) = x1; m(2, 3) = x2;
    m(3, 0) = -std::conj(x4); m(3, 1) = std::conj(x3); m(3, 2) = -std::conj(x2); m(3, 3) = std::conj(x1);
    return m;
}

// Jafarkhani QO-STBC, symbol pairs {1,4} and {2,3} interfere.
CMat jafarkhani(std::span<const cplx> s) {
    CMat m(4, 4);
    const cplx s1 = s[0], s2 = s[1], s3 = s[2], s4 = s[3];
    m(0, 0) = s1; m(0, 1) = s2; m(0, 2) = s3; m(0, 3) = s4;
    m(1, 0) = -std::conj(s2); m(1, 1) = std::conj(s1); m(1, 2) = -std::conj(s4); m(1, 3) = std::conj(s3);
    m(2, 0) = -std::conj(s3); m(2, 1) = -std::conj(s4); m(2, 2) = std::conj(s1); m(2, 3) = std::conj(s2);
    m(3, 0) = s4; m(3, 1) = -s3; m(3, 2) = -s2; m(3, 3) = s1;
    return m;
}

}  // namespace

Codeword encode(SchemeId scheme, std::span<const cplx> symbols) {
    Codeword cw;
    switch (scheme) {
        case SchemeId::MDC_QOSTBC: {
            if (symbols.size() != 4) throw std::invalid_argument("encode: MDC-QOSTBC needs 4 symbols");
            const std::array<cplx, 4> x = mdc_symbol_map({symbols[0], symbols[1], symbols[2], symbols[3]});
            cw.slots = cw.antennas = 4;
            cw.entries = abba(x);
            cw.power_scale = 0.5;
            break;
        }
        case SchemeId::QOSTBC: {
            if (symbols.size() != 4) throw std::invalid_argument("encode: QO-STBC needs 4 symbols");
            cw.slots = cw.antennas = 4;
            cw.entries = jafarkhani(symbols);
            cw.power_scale = 0.5;
            break;
        }
        case SchemeId::ALAMOUTI_CDD: {
            if (symbols.size() != 2) throw std::invalid_argument("encode: Alamouti needs 2 symbols");
            cw.slots = cw.antennas = 2;
            cw.entries = CMat(2, 2);
            cw.entries(0, 0) = symbols[0];
            cw.entries(0, 1) = symbols[1];
            cw.entries(1, 0) = -std::conj(symbols[1]);
            cw.entries(1, 1) = std::conj(symbols[0]);
            cw.power_scale = 1.0 / std::sqrt(2.0);
            break;
        }
        case SchemeId::CDD: {
            if (symbols.size() != 1) throw std::invalid_argument("encode: CDD carries 1 symbol per slot");
            cw.slots = 1;
            cw.antennas = 4;
            cw.entries = CMat(1, 4);
            for (int a = 0; a < 4; ++a) cw.entries(0, a) = symbols[0];
            cw.power_scale = 0.5;
            break;
        }
    }
    return cw;
}

EquivChannel equiv_channel(SchemeId scheme, const CMat& h, double noise_variance) {
    const int nr = h.rows();
    EquivChannel g;
    g.noise_variance = noise_variance;
    switch (scheme) {
        case SchemeId::MDC_QOSTBC: {
            if (h.cols() != 4 || nr < 1) throw std::invalid_argument("equiv_channel: need Nr x 4 channel");
            g.form = EquivChannel::Form::Real;
            g.power_scale = 0.5;
            g.real_mat = RMat(8 * nr, 8);
            // x = T c with x1 = c1R + j c3R, x2 = c2R + j c4R,
            // x3 = -c1I + j c3I, x4 = -c2I + j c4I
            CMat t(4, 8);
            t(0, 0) = 1; t(0, 4) = cplx(0, 1);
            t(1, 2) = 1; t(1, 6) = cplx(0, 1);
            t(2, 1) = -1; t(2, 5) = cplx(0, 1);
            t(3, 3) = -1; t(3, 7) = cplx(0, 1);
            for (int m = 0; m < nr; ++m) {
                const cplx h1 = h(m, 0), h2 = h(m, 1), h3 = h(m, 2), h4 = h(m, 3);
                // per-slot map from x to [r1, r2*, r3, r4*]
                CMat a(4, 4);
                a(0, 0) = h1; a(0, 1) = h2; a(0, 2) = h3; a(0, 3) = h4;
                a(1, 0) = std::conj(h2); a(1, 1) = -std::conj(h1); a(1, 2) = std::conj(h4); a(1, 3) = -std::conj(h3);
                a(2, 0) = h3; a(2, 1) = h4; a(2, 2) = h1; a(2, 3) = h2;
                a(3, 0) = std::conj(h4); a(3, 1) = -std::conj(h3); a(3, 2) = std::conj(h2); a(3, 3) = -std::conj(h1);
                const CMat at = a * t;  // 4 x 8
                for (int r = 0; r < 4; ++r)
                    for (int c = 0; c < 8; ++c) {
                        g.real_mat(8 * m + r, c) = at(r, c).real();
                        g.real_mat(8 * m + 4 + r, c) = at(r, c).imag();
                    }
            }
            break;
        }
        case SchemeId::QOSTBC: {
            if (h.cols() != 4 || nr < 1) throw std::invalid_argument("equiv_channel: need Nr x 4 channel");
            g.form = EquivChannel::Form::Complex;
            g.power_scale = 0.5;
            g.cplx_mat = CMat(4 * nr, 4);
            for (int m = 0; m < nr; ++m) {
                const cplx h1 = h(m, 0), h2 = h(m, 1), h3 = h(m, 2), h4 = h(m, 3);
                // stack [r1, r2*, r3*, r4]
                g.cplx_mat(4 * m + 0, 0) = h1; g.cplx_mat(4 * m + 0, 1) = h2;
                g.cplx_mat(4 * m + 0, 2) = h3; g.cplx_mat(4 * m + 0, 3) = h4;
                g.cplx_mat(4 * m + 1, 0) = std::conj(h2); g.cplx_mat(4 * m + 1, 1) = -std::conj(h1);
                g.cplx_mat(4 * m + 1, 2) = std::conj(h4); g.cplx_mat(4 * m + 1, 3) = -std::conj(h3);
                g.cplx_mat(4 * m + 2, 0) = std::conj(h3); g.cplx_mat(4 * m + 2, 1) = std::conj(h4);
                g.cplx_mat(4 * m + 2, 2) = -std::conj(h1); g.cplx_mat(4 * m + 2, 3) = -std::conj(h2);
                g.cplx_mat(4 * m + 3, 0) = h4; g.cplx_mat(4 * m + 3, 1) = -h3;
                g.cplx_mat(4 * m + 3, 2) = -h2; g.cplx_mat(4 * m + 3, 3) = h1;
            }
            break;
        }
        case SchemeId::ALAMOUTI_CDD: {
            if (h.cols() != 2 || nr < 1) throw std::invalid_argument("equiv_channel: need Nr x 2 channel");
            g.form = EquivChannel::Form::Complex;
            g.power_scale = 1.0 / std::sqrt(2.0);
            g.cplx_mat = CMat(2 * nr, 2);
            for (int m = 0; m < nr; ++m) {
                const cplx g1 = h(m, 0), g2 = h(m, 1);
                g.cplx_mat(2 * m + 0, 0) = g1; g.cplx_mat(2 * m + 0, 1) = g2;
                g.cplx_mat(2 * m + 1, 0) = std::conj(g2); g.cplx_mat(2 * m + 1, 1) = -std::conj(g1);
            }
            break;
        }
        case SchemeId::CDD: {
            if (h.cols() != 1 || nr < 1) throw std::invalid_argument("equiv_channel: need Nr x 1 channel");
            g.form = EquivChannel::Form::Complex;
            g.power_scale = 1.0;
            g.cplx_mat = CMat(nr, 1);
            for (int m = 0; m < nr; ++m) g.cplx_mat(m, 0) = h(m, 0);
            break;
        }
    }
    return g;
}

std::vector<double> mdc_stack(const CMat& r_slots_by_rx) {
    if (r_slots_by_rx.rows() != 4) throw std::invalid_argument("mdc_stack: need 4 slots");
    const int nr = r_slots_by_rx.cols();
    std::vector<double> out(8 * nr);
    for (int m = 0; m < nr; ++m) {
        const cplx r1 = r_slots_by_rx(0, m);
        const cplx r2 = std::conj(r_slots_by_rx(1, m));
        const cplx r3 = r_slots_by_rx(2, m);
        const cplx r4 = std::conj(r_slots_by_rx(3, m));
        out[8 * m + 0] = r1.real(); out[8 * m + 1] = r2.real();
        out[8 * m + 2] = r3.real(); out[8 * m + 3] = r4.real();
        out[8 * m + 4] = r1.imag(); out[8 * m + 5] = r2.imag();
        out[8 * m + 6] = r3.imag(); out[8 * m + 7] = r4.imag();
    }
    return out;
}

std::vector<cplx> qo_stack(const CMat& r_slots_by_rx) {
    if (r_slots_by_rx.rows() != 4) throw std::invalid_argument("qo_stack: need 4 slots");
    const int nr = r_slots_by_rx.cols();
    std::vector<cplx> out(4 * nr);
    for (int m = 0; m < nr; ++m) {
        out[4 * m + 0] = r_slots_by_rx(0, m);
        out[4 * m + 1] = std::conj(r_slots_by_rx(1, m));
        out[4 * m + 2] = std::conj(r_slots_by_rx(2, m));
        out[4 * m + 3] = r_slots_by_rx(3, m);
    }
    return out;
}

std::array<GroupSystem, 4> matched_whiten(const EquivChannel& g, std::span<const double> r_stack) {
    if (g.form != EquivChannel::Form::Real) throw std::invalid_argument("matched_whiten: needs the MDC real form");
    const RMat& m0 = g.real_mat;
    if (static_cast<int>(r_stack.size()) != m0.rows()) throw std::invalid_argument("matched_whiten: stack size mismatch");

    // effective matrix includes the codeword power scale
    RMat m(m0.rows(), m0.cols());
    for (int r = 0; r < m0.rows(); ++r)
        for (int c = 0; c < m0.cols(); ++c) m(r, c) = g.power_scale * m0(r, c);

    const RMat gr = gram(m);
    // matched filter z = M^T r; per-group Cholesky whitening so the residual
    // noise is white with unit variance per dimension
    const std::vector<double> z = matvec(m.transpose(), r_stack);
    const double sigma_r = std::sqrt(g.noise_variance / 2.0);
    if (sigma_r <= 0.0) throw std::invalid_argument("matched_whiten: noise variance must be positive");

    std::array<GroupSystem, 4> out;
    for (int grp = 0; grp < 4; ++grp) {
        RMat b(2, 2);
        b(0, 0) = gr(2 * grp, 2 * grp);
        b(0, 1) = gr(2 * grp, 2 * grp + 1);
        b(1, 0) = gr(2 * grp + 1, 2 * grp);
        b(1, 1) = gr(2 * grp + 1, 2 * grp + 1);
        RMat l;
        try {
            l = cholesky(b);
        } catch (const std::domain_error&) {
            throw std::domain_error("matched_whiten: degenerate channel (singular Gram block)");
        }
        const std::array<double, 2> zg{z[2 * grp], z[2 * grp + 1]};
        const std::vector<double> w = forward_subst(l, zg);
        GroupSystem gs;
        gs.y = {w[0] / sigma_r, w[1] / sigma_r};
        // L^{-1} B = L^T, so the whitened system matrix is L^T / sigma_r
        gs.h = {{{l(0, 0) / sigma_r, l(1, 0) / sigma_r}, {0.0, l(1, 1) / sigma_r}}};
        out[grp] = gs;
    }
    return out;
}

}  // namespace txdiv
