#include "txdivsim/numerics.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace txdiv {

CMat hermitian(const CMat& a) {
    CMat out(a.cols(), a.rows());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) out(c, r) = std::conj(a(r, c));
    return out;
}

CMat gram(const CMat& a) {
    CMat out(a.cols(), a.cols());
    for (int i = 0; i < a.cols(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            cplx s = 0;
            for (int r = 0; r < a.rows(); ++r) s += std::conj(a(r, i)) * a(r, j);
            out(i, j) = s;
        }
    return out;
}

RMat gram(const RMat& a) {
    RMat out(a.cols(), a.cols());
    for (int i = 0; i < a.cols(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            double s = 0;
            for (int r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
            out(i, j) = s;
        }
    return out;
}

std::vector<cplx> matvec(const CMat& a, std::span<const cplx> x) {
    if (static_cast<int>(x.size()) != a.cols()) throw std::invalid_argument("matvec: size mismatch");
    std::vector<cplx> y(a.rows());
    for (int r = 0; r < a.rows(); ++r) {
        cplx s = 0;
        for (int c = 0; c < a.cols(); ++c) s += a(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

std::vector<double> matvec(const RMat& a, std::span<const double> x) {
    if (static_cast<int>(x.size()) != a.cols()) throw std::invalid_argument("matvec: size mismatch");
    std::vector<double> y(a.rows());
    for (int r = 0; r < a.rows(); ++r) {
        double s = 0;
        for (int c = 0; c < a.cols(); ++c) s += a(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

RMat cholesky(const RMat& a) {
    const int n = a.rows();
    RMat l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) throw std::domain_error("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

CMat cholesky(const CMat& a) {
    const int n = a.rows();
    CMat l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            cplx s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            if (i == j) {
                const double d = s.real();
                if (d <= 0.0) throw std::domain_error("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(d);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

std::vector<double> forward_subst(const RMat& l, std::span<const double> b) {
    const int n = l.rows();
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

std::vector<cplx> forward_subst(const CMat& l, std::span<const cplx> b) {
    const int n = l.rows();
    std::vector<cplx> x(n);
    for (int i = 0; i < n; ++i) {
        cplx s = b[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

std::vector<double> solve_spd(const RMat& a, std::span<const double> b) {
    const RMat l = cholesky(a);
    std::vector<double> y = forward_subst(l, b);
    const int n = a.rows();
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

std::vector<cplx> solve_hpd(const CMat& a, std::span<const cplx> b) {
    const CMat l = cholesky(a);
    std::vector<cplx> y = forward_subst(l, b);
    const int n = a.rows();
    std::vector<cplx> x(n);
    for (int i = n - 1; i >= 0; --i) {
        cplx s = y[i];
        for (int k = i + 1; k < n; ++k) s -= std::conj(l(k, i)) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

// ---------------------------------------------------------------------------

std::vector<cplx> dft(std::span<const cplx> x, bool inverse) {
    const size_t n = x.size();
    if (n == 0 || !std::has_single_bit(n)) throw std::invalid_argument("dft: length must be a power of two");

    std::vector<cplx> a(x.begin(), x.end());
    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w = 1.0;
            for (size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : a) v *= scale;
    return a;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(RngStream st) {
    // xoshiro256++ state from SplitMix64 over (seed, stream_id)
    std::uint64_t m = st.seed;
    const std::uint64_t a = splitmix64(m);
    const std::uint64_t b = splitmix64(m);
    m ^= 0x9e3779b97f4a7c15ULL * (st.stream_id + 1);
    const std::uint64_t c = splitmix64(m);
    const std::uint64_t d = splitmix64(m);
    s_[0] = a;
    s_[1] = b ^ st.stream_id;
    s_[2] = c;
    s_[3] = d;
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 1;
    for (int i = 0; i < 8; ++i) next_u64();  // decorrelate nearby stream ids
}

std::uint64_t Rng::next_u64() {
    auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    // 53-bit mantissa in (0, 1]
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

int Rng::bit() { return static_cast<int>(next_u64() >> 63); }

cplx Rng::gaussian_pair(double variance) {
    if (variance < 0.0) throw std::invalid_argument("gaussian_pair: negative variance");
    if (variance == 0.0) return {0.0, 0.0};
    // Box-Muller; u1 in (0,1] so log is finite
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1) * variance);
    const double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

// ---------------------------------------------------------------------------

namespace {

Constellation make_qpsk() {
    Constellation c;
    c.order = 4;
    const double a = 1.0 / std::sqrt(2.0);
    c.points.resize(4);
    for (unsigned b0 = 0; b0 < 2; ++b0)
        for (unsigned b1 = 0; b1 < 2; ++b1)
            c.points[(b0 << 1) | b1] = cplx((1.0 - 2.0 * b0) * a, (1.0 - 2.0 * b1) * a);
    c.axis = {{{+a, 0u}, {-a, 1u}}};
    c.axis_bits = {std::vector<int>{0}, std::vector<int>{1}};
    return c;
}

Constellation make_qam16() {
    Constellation c;
    c.order = 16;
    const double s = 1.0 / std::sqrt(10.0);
    auto level = [&](unsigned sign, unsigned mag) {
        return (1.0 - 2.0 * sign) * (mag ? 3.0 : 1.0) * s;
    };
    c.points.resize(16);
    for (unsigned b = 0; b < 16; ++b) {
        const unsigned b0 = (b >> 3) & 1, b1 = (b >> 2) & 1, b2 = (b >> 1) & 1, b3 = b & 1;
        c.points[b] = cplx(level(b0, b2), level(b1, b3));
    }
    // axis labels pack (sign, mag)
    for (unsigned sign = 0; sign < 2; ++sign)
        for (unsigned mag = 0; mag < 2; ++mag)
            c.axis.push_back({level(sign, mag), (sign << 1) | mag});
    c.axis_bits = {std::vector<int>{0, 2}, std::vector<int>{1, 3}};
    return c;
}

}  // namespace

int Constellation::bits_per_symbol() const {
    int b = 0;
    for (int m = order; m > 1; m >>= 1) ++b;
    return b;
}

cplx Constellation::point_for_bits(std::span<const std::uint8_t> bits) const {
    const int bps = bits_per_symbol();
    if (static_cast<int>(bits.size()) != bps) throw std::invalid_argument("point_for_bits: wrong bit count");
    unsigned label = 0;
    for (int i = 0; i < bps; ++i) label = (label << 1) | (bits[i] & 1u);
    return points[label];
}

const Constellation& Constellation::get(Mod m) {
    static const Constellation qpsk = make_qpsk();
    static const Constellation qam16 = make_qam16();
    return m == Mod::QPSK ? qpsk : qam16;
}

std::vector<cplx> gray_map(std::span<const std::uint8_t> bits, const Constellation& c) {
    const int bps = c.bits_per_symbol();
    if (bits.size() % bps != 0) throw std::invalid_argument("gray_map: bit count not a multiple of bits/symbol");
    std::vector<cplx> out;
    out.reserve(bits.size() / bps);
    for (size_t i = 0; i < bits.size(); i += bps) out.push_back(c.point_for_bits(bits.subspan(i, bps)));
    return out;
}

}  // namespace txdiv
