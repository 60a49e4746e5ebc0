// Complex linear algebra, unitary DFT, seeded RNG streams and Gray-mapped
// constellations shared by all other modules.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace txdiv {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Small dense matrices, row-major. Sized for per-subcarrier systems
// (at most 8Nr x 8), so no blocking or views.
template <typename T>
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int r, int c) { return e_[static_cast<size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return e_[static_cast<size_t>(r) * cols_ + c]; }

    std::span<const T> data() const { return e_; }
    std::span<T> data() { return e_; }

    Mat<T> transpose() const {
        Mat<T> out(cols_, rows_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
        return out;
    }

    friend Mat<T> operator*(const Mat<T>& a, const Mat<T>& b) {
        if (a.cols() != b.rows()) throw std::invalid_argument("Mat: dimension mismatch");
        Mat<T> out(a.rows(), b.cols());
        for (int r = 0; r < a.rows(); ++r)
            for (int k = 0; k < a.cols(); ++k) {
                const T arc = a(r, k);
                for (int c = 0; c < b.cols(); ++c) out(r, c) += arc * b(k, c);
            }
        return out;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<T> e_;
};

using CMat = Mat<cplx>;
using RMat = Mat<double>;

CMat hermitian(const CMat& a);

// A^H * A and A^T * A respectively.
CMat gram(const CMat& a);
RMat gram(const RMat& a);

std::vector<cplx> matvec(const CMat& a, std::span<const cplx> x);
std::vector<double> matvec(const RMat& a, std::span<const double> x);

// Cholesky factor L (lower) of a symmetric / Hermitian positive-definite
// matrix. Throws std::domain_error when the matrix is not positive definite
// (degenerate channel).
RMat cholesky(const RMat& a);
CMat cholesky(const CMat& a);

std::vector<double> forward_subst(const RMat& l, std::span<const double> b);
std::vector<cplx> forward_subst(const CMat& l, std::span<const cplx> b);

// Solve A x = b for Hermitian / symmetric positive-definite A via Cholesky.
std::vector<double> solve_spd(const RMat& a, std::span<const double> b);
std::vector<cplx> solve_hpd(const CMat& a, std::span<const cplx> b);

// ---------------------------------------------------------------------------
// Unitary DFT (1/sqrt(N) both directions). Length must be a power of two.
std::vector<cplx> dft(std::span<const cplx> x, bool inverse = false);

// ---------------------------------------------------------------------------
// Seeded, splittable random streams. Identical (seed, stream_id) reproduce
// identical draws; distinct stream_ids give independent streams. The
// generator state is built by mixing (seed, stream_id) through SplitMix64,
// so streams can be created cheaply per Monte Carlo frame.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

class Rng {
public:
    explicit Rng(RngStream s);
    Rng(std::uint64_t seed, std::uint64_t stream_id) : Rng(RngStream{seed, stream_id}) {}

    std::uint64_t next_u64();
    double uniform01();  // (0, 1]
    int bit();

    // Circularly symmetric complex Gaussian with total variance `variance`
    // (variance/2 per real dimension). Rejects negative variance.
    cplx gaussian_pair(double variance);

private:
    std::uint64_t s_[4];
};

// ---------------------------------------------------------------------------
// Gray-labelled constellations with unit average symbol energy.
//
// QPSK: bits (b0,b1) -> ((1-2*b0) + j(1-2*b1)) / sqrt(2).
// 16QAM: bits (b0,b1,b2,b3); I axis from (b0,b2), Q axis from (b1,b3);
//   per-axis level (sign s, mag m) = (1-2s)*(m ? 3 : 1) / sqrt(10).
enum class Mod { QPSK, QAM16 };

struct Constellation {
    // One labelled amplitude level of a real axis. `label` packs the axis
    // bits MSB-first (QPSK: 1 bit, 16QAM: 2 bits).
    struct AxisLevel {
        double value;
        unsigned label;
    };

    int order;                      // M
    std::vector<cplx> points;       // indexed by packed symbol label, b0 = MSB
    std::vector<AxisLevel> axis;    // sqrt(M) levels shared by I and Q
    // Bit positions within a symbol label that belong to the I axis (index 0)
    // and Q axis (index 1), ordered MSB-first per axis.
    std::array<std::vector<int>, 2> axis_bits;

    int bits_per_symbol() const;
    cplx point_for_bits(std::span<const std::uint8_t> bits) const;

    static const Constellation& get(Mod m);
};

// Maps a bit sequence onto constellation symbols. Bit count must be a
// multiple of bits_per_symbol.
std::vector<cplx> gray_map(std::span<const std::uint8_t> bits, const Constellation& c);

}  // namespace txdiv
