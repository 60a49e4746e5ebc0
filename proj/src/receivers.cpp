#include "txdivsim/receivers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace txdiv {

namespace {

constexpr double kLlrClamp = 1e6;
constexpr double kSigmaFloor = 1e-12;

double clamp_llr(double v) { return std::clamp(v, -kLlrClamp, kLlrClamp); }

// log(sum exp(m_i)) with max subtraction
double log_sum_exp(std::span<const double> m) {
    const double mx = *std::max_element(m.begin(), m.end());
    if (mx == -std::numeric_limits<double>::infinity()) return mx;
    double s = 0.0;
    for (double v : m) s += std::exp(v - mx);
    return mx + std::log(s);
}

int axis_label_bits(const Constellation& c) { return static_cast<int>(c.axis_bits[0].size()); }

// nearest axis level
const Constellation::AxisLevel& nearest_level(const Constellation& c, double x) {
    const Constellation::AxisLevel* best = &c.axis[0];
    double bd = std::numeric_limits<double>::max();
    for (const auto& l : c.axis) {
        const double d = (x - l.value) * (x - l.value);
        if (d < bd) {
            bd = d;
            best = &l;
        }
    }
    return *best;
}

// Per-symbol LLRs of a scalar complex channel z = s + noise, noise variance
// sigma2 per complex dimension. Output in symbol label order.
void scalar_symbol_llrs(cplx z, double sigma2, const Constellation& c, LlrMode mode, std::span<double> out) {
    const int bps = c.bits_per_symbol();
    if (static_cast<int>(out.size()) != bps) throw std::invalid_argument("scalar_symbol_llrs: bad output size");
    const double sig_dim = std::max(sigma2 / 2.0, kSigmaFloor);
    const int ab = axis_label_bits(c);
    std::vector<double> tmp(ab);
    for (int axis = 0; axis < 2; ++axis) {
        const double x = axis == 0 ? z.real() : z.imag();
        axis_llrs(x, sig_dim, c, mode, tmp);
        for (int j = 0; j < ab; ++j) out[c.axis_bits[axis][j]] = tmp[j];
    }
}

cplx scalar_hard(cplx z, const Constellation& c) {
    return {nearest_level(c, z.real()).value, nearest_level(c, z.imag()).value};
}

}  // namespace

void axis_llrs(double x, double sigma2_dim, const Constellation& c, LlrMode mode, std::span<double> out) {
    const int ab = axis_label_bits(c);
    if (static_cast<int>(out.size()) != ab) throw std::invalid_argument("axis_llrs: bad output size");
    const double inv = 1.0 / (2.0 * std::max(sigma2_dim, kSigmaFloor));
    std::vector<double> metric(c.axis.size());
    for (size_t i = 0; i < c.axis.size(); ++i) {
        const double d = x - c.axis[i].value;
        metric[i] = -d * d * inv;
    }
    std::vector<double> m0, m1;
    for (int j = 0; j < ab; ++j) {
        m0.clear();
        m1.clear();
        const unsigned bit = 1u << (ab - 1 - j);
        for (size_t i = 0; i < c.axis.size(); ++i)
            ((c.axis[i].label & bit) ? m1 : m0).push_back(metric[i]);
        if (mode == LlrMode::Exact)
            out[j] = clamp_llr(log_sum_exp(m0) - log_sum_exp(m1));
        else
            out[j] = clamp_llr(*std::max_element(m0.begin(), m0.end()) -
                               *std::max_element(m1.begin(), m1.end()));
    }
}

GroupDecision mld_group(const GroupSystem& g, const Constellation& c, LlrMode mode) {
    const int bps = c.bits_per_symbol();
    const int ab = axis_label_bits(c);
    GroupDecision out;
    out.llrs.assign(bps, 0.0);

    // metrics of all M (real, imag) hypotheses; noise is unit-variance white
    const size_t na = c.axis.size();
    std::vector<double> metric(na * na);
    double best = std::numeric_limits<double>::max();
    for (size_t i = 0; i < na; ++i)
        for (size_t q = 0; q < na; ++q) {
            const double cr = c.axis[i].value, ci = c.axis[q].value;
            const double e0 = g.y[0] - (g.h[0][0] * cr + g.h[0][1] * ci);
            const double e1 = g.y[1] - (g.h[1][0] * cr + g.h[1][1] * ci);
            const double d2 = e0 * e0 + e1 * e1;
            metric[i * na + q] = -0.5 * d2;
            if (d2 < best) {
                best = d2;
                out.hard = {cr, ci};
            }
        }

    std::vector<double> m0, m1;
    for (int p = 0; p < bps; ++p) {
        // which axis owns symbol-label bit p, and which of its label bits it is
        int axis = -1, j = -1;
        for (int a = 0; a < 2 && axis < 0; ++a)
            for (int t = 0; t < ab; ++t)
                if (c.axis_bits[a][t] == p) {
                    axis = a;
                    j = t;
                    break;
                }
        const unsigned bit = 1u << (ab - 1 - j);
        m0.clear();
        m1.clear();
        for (size_t i = 0; i < na; ++i)
            for (size_t q = 0; q < na; ++q) {
                const unsigned label = axis == 0 ? c.axis[i].label : c.axis[q].label;
                ((label & bit) ? m1 : m0).push_back(metric[i * na + q]);
            }
        if (mode == LlrMode::Exact)
            out.llrs[p] = clamp_llr(log_sum_exp(m0) - log_sum_exp(m1));
        else
            out.llrs[p] = clamp_llr(*std::max_element(m0.begin(), m0.end()) -
                                    *std::max_element(m1.begin(), m1.end()));
    }
    return out;
}

DetectorOutput mdc_mld(std::span<const double> r_stack, const CMat& h, const Constellation& c,
                       double noise_variance, LlrMode mode) {
    const EquivChannel g = equiv_channel(SchemeId::MDC_QOSTBC, h, noise_variance);
    const std::array<GroupSystem, 4> groups = matched_whiten(g, r_stack);
    DetectorOutput out;
    out.hypotheses_per_symbol = c.order;
    const int bps = c.bits_per_symbol();
    out.llrs.resize(4 * bps);
    for (int i = 0; i < 4; ++i) {
        const GroupDecision d = mld_group(groups[i], c, mode);
        out.hard_symbols.emplace_back(d.hard[0], d.hard[1]);
        std::copy(d.llrs.begin(), d.llrs.end(), out.llrs.begin() + i * bps);
    }
    return out;
}

DetectorOutput alamouti_detect(const CMat& r, std::span<const cplx> g1, std::span<const cplx> g2,
                               const Constellation& c, double noise_variance, LlrMode mode) {
    const int nr = static_cast<int>(g1.size());
    if (r.rows() != 2 || r.cols() != nr || g2.size() != g1.size())
        throw std::invalid_argument("alamouti_detect: dimension mismatch");
    double gain = 0.0;
    cplx s1 = 0, s2 = 0;
    for (int m = 0; m < nr; ++m) {
        gain += std::norm(g1[m]) + std::norm(g2[m]);
        s1 += std::conj(g1[m]) * r(0, m) + g2[m] * std::conj(r(1, m));
        s2 += std::conj(g2[m]) * r(0, m) - g1[m] * std::conj(r(1, m));
    }
    if (gain <= 0.0) throw std::domain_error("alamouti_detect: zero channel");
    s1 /= gain;
    s2 /= gain;
    const double sigma2 = noise_variance / gain;

    DetectorOutput out;
    out.hypotheses_per_symbol = static_cast<long>(c.axis.size());  // sqrt(M)
    const int bps = c.bits_per_symbol();
    out.llrs.resize(2 * bps);
    out.hard_symbols = {scalar_hard(s1, c), scalar_hard(s2, c)};
    scalar_symbol_llrs(s1, sigma2, c, mode, std::span<double>(out.llrs).subspan(0, bps));
    scalar_symbol_llrs(s2, sigma2, c, mode, std::span<double>(out.llrs).subspan(bps, bps));
    return out;
}

DetectorOutput cdd_detect(std::span<const cplx> r, std::span<const cplx> h_eff, const Constellation& c,
                          double noise_variance, LlrMode mode) {
    if (r.size() != h_eff.size()) throw std::invalid_argument("cdd_detect: dimension mismatch");
    double gain = 0.0;
    cplx z = 0;
    for (size_t m = 0; m < r.size(); ++m) {
        gain += std::norm(h_eff[m]);
        z += std::conj(h_eff[m]) * r[m];
    }
    DetectorOutput out;
    out.hypotheses_per_symbol = static_cast<long>(c.axis.size());
    const int bps = c.bits_per_symbol();
    out.llrs.assign(bps, 0.0);
    if (gain <= 0.0) {
        // fully faded subcarrier: no information, zero LLRs
        out.hard_symbols = {c.points[0]};
        return out;
    }
    z /= gain;
    out.hard_symbols = {scalar_hard(z, c)};
    scalar_symbol_llrs(z, noise_variance / gain, c, mode, out.llrs);
    return out;
}

namespace {

// shared soft-output step: z = biased estimate / bias, per-symbol noise from
// the unbiased post-equalization SINR
void lmmse_soft_symbol(cplx z, double mu, const Constellation& c, LlrMode mode, DetectorOutput& out,
                       int sym_idx) {
    const double m = std::clamp(mu, 1e-12, 1.0 - 1e-12);
    const double sigma2 = (1.0 - m) / m;  // complex variance after normalization
    const int bps = c.bits_per_symbol();
    out.hard_symbols.push_back(scalar_hard(z, c));
    scalar_symbol_llrs(z, sigma2, c, mode, std::span<double>(out.llrs).subspan(sym_idx * bps, bps));
}

}  // namespace

DetectorOutput lmmse_detect(std::span<const cplx> r_stack, const EquivChannel& g, const Constellation& c,
                            LlrMode mode) {
    if (g.form != EquivChannel::Form::Complex) throw std::invalid_argument("lmmse_detect: complex form expected");
    const int rows = g.cplx_mat.rows(), n = g.cplx_mat.cols();
    if (static_cast<int>(r_stack.size()) != rows) throw std::invalid_argument("lmmse_detect: stack size mismatch");

    CMat geff(rows, n);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < n; ++j) geff(i, j) = g.power_scale * g.cplx_mat(i, j);
    const CMat gr = gram(geff);
    CMat a = gr;
    for (int i = 0; i < n; ++i) a(i, i) += g.noise_variance;

    const std::vector<cplx> zmf = matvec(hermitian(geff), r_stack);
    const std::vector<cplx> xhat = solve_hpd(a, zmf);

    DetectorOutput out;
    out.hypotheses_per_symbol = static_cast<long>(c.axis.size());
    out.llrs.resize(static_cast<size_t>(n) * c.bits_per_symbol());
    for (int i = 0; i < n; ++i) {
        // bias mu_i = [ (Gram + N0 I)^-1 Gram ]_ii
        std::vector<cplx> col(n);
        for (int j = 0; j < n; ++j) col[j] = gr(j, i);
        const std::vector<cplx> mcol = solve_hpd(a, col);
        const double mu = mcol[i].real();
        const cplx z = xhat[i] / std::max(mu, 1e-12);
        lmmse_soft_symbol(z, mu, c, mode, out, i);
    }
    return out;
}

DetectorOutput lmmse_detect(std::span<const double> r_stack, const EquivChannel& g, const Constellation& c,
                            LlrMode mode) {
    if (g.form != EquivChannel::Form::Real) throw std::invalid_argument("lmmse_detect: real form expected");
    const int rows = g.real_mat.rows(), n = g.real_mat.cols();
    if (static_cast<int>(r_stack.size()) != rows) throw std::invalid_argument("lmmse_detect: stack size mismatch");

    RMat geff(rows, n);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < n; ++j) geff(i, j) = g.power_scale * g.real_mat(i, j);
    const RMat gr = gram(geff);
    // noise N0/2 per real dimension over coordinates of variance 1/2
    RMat a = gr;
    for (int i = 0; i < n; ++i) a(i, i) += g.noise_variance;

    const std::vector<double> zmf = matvec(geff.transpose(), r_stack);
    const std::vector<double> xhat = solve_spd(a, zmf);

    const int bps = c.bits_per_symbol();
    const int ab = axis_label_bits(c);
    DetectorOutput out;
    out.hypotheses_per_symbol = static_cast<long>(c.axis.size());
    out.llrs.resize(static_cast<size_t>(n / 2) * bps);
    std::vector<double> tmp(ab);
    for (int i = 0; i < n; ++i) {
        std::vector<double> col(n);
        for (int j = 0; j < n; ++j) col[j] = gr(j, i);
        const std::vector<double> mcol = solve_spd(a, col);
        const double mu = std::clamp(mcol[i], 1e-12, 1.0 - 1e-12);
        const double z = xhat[i] / mu;
        const double sigma2_dim = 0.5 * (1.0 - mu) / mu;  // coordinate variance 1/2
        axis_llrs(z, sigma2_dim, c, mode, tmp);
        const int sym = i / 2, axis = i % 2;
        for (int j = 0; j < ab; ++j) out.llrs[sym * bps + c.axis_bits[axis][j]] = tmp[j];
        if (axis == 0)
            out.hard_symbols.emplace_back(nearest_level(c, z).value, 0.0);
        else
            out.hard_symbols.back() += cplx(0.0, nearest_level(c, z).value);
    }
    return out;
}

DetectorOutput qo_joint_mld(std::span<const cplx> r_stack, const EquivChannel& g, const Constellation& c) {
    if (g.form != EquivChannel::Form::Complex || g.cplx_mat.cols() != 4)
        throw std::invalid_argument("qo_joint_mld: QO-STBC form expected");
    const int rows = g.cplx_mat.rows();
    if (static_cast<int>(r_stack.size()) != rows) throw std::invalid_argument("qo_joint_mld: stack size mismatch");

    CMat geff(rows, 4);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < 4; ++j) geff(i, j) = g.power_scale * g.cplx_mat(i, j);
    const CMat a = gram(geff);
    const std::vector<cplx> z = matvec(hermitian(geff), r_stack);

    // cost decouples into the two interfering pairs {s1,s4} and {s2,s3}
    auto pair_search = [&](int i, int j, cplx& si, cplx& sj) {
        double best = std::numeric_limits<double>::max();
        for (const cplx& u : c.points)
            for (const cplx& v : c.points) {
                const double cost = -2.0 * std::real(std::conj(u) * z[i] + std::conj(v) * z[j]) +
                                    std::norm(u) * a(i, i).real() + std::norm(v) * a(j, j).real() +
                                    2.0 * std::real(std::conj(u) * a(i, j) * v);
                if (cost < best) {
                    best = cost;
                    si = u;
                    sj = v;
                }
            }
    };

    DetectorOutput out;
    out.hypotheses_per_symbol = static_cast<long>(c.order) * c.order;  // M^2
    out.hard_symbols.resize(4);
    pair_search(0, 3, out.hard_symbols[0], out.hard_symbols[3]);
    pair_search(1, 2, out.hard_symbols[1], out.hard_symbols[2]);
    return out;
}

std::vector<cplx> mdc_exhaustive_mld(std::span<const double> r_stack, const EquivChannel& g,
                                     const Constellation& c) {
    if (g.form != EquivChannel::Form::Real) throw std::invalid_argument("mdc_exhaustive_mld: real form expected");
    const int rows = g.real_mat.rows();
    if (static_cast<int>(r_stack.size()) != rows) throw std::invalid_argument("mdc_exhaustive_mld: stack mismatch");

    const int m = c.order;
    std::vector<cplx> best(4);
    double best_cost = std::numeric_limits<double>::max();
    std::array<int, 4> idx{};
    std::vector<double> creal(8), pred(rows);
    for (idx[0] = 0; idx[0] < m; ++idx[0])
        for (idx[1] = 0; idx[1] < m; ++idx[1])
            for (idx[2] = 0; idx[2] < m; ++idx[2])
                for (idx[3] = 0; idx[3] < m; ++idx[3]) {
                    for (int i = 0; i < 4; ++i) {
                        creal[2 * i] = c.points[idx[i]].real();
                        creal[2 * i + 1] = c.points[idx[i]].imag();
                    }
                    double cost = 0.0;
                    for (int r = 0; r < rows; ++r) {
                        double s = 0.0;
                        for (int j = 0; j < 8; ++j) s += g.real_mat(r, j) * creal[j];
                        const double e = r_stack[r] - g.power_scale * s;
                        cost += e * e;
                    }
                    if (cost < best_cost) {
                        best_cost = cost;
                        for (int i = 0; i < 4; ++i) best[i] = c.points[idx[i]];
                    }
                }
    return best;
}

}  // namespace txdiv
