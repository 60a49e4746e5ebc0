#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <complex>

#include "txdivsim/numerics.hpp"

using namespace txdiv;

TEST_CASE("dft: unit impulse maps to a flat unitary spectrum") {
    std::vector<cplx> x{1, 0, 0, 0};
    const std::vector<cplx> y = dft(x);
    for (const cplx& v : y) CHECK(std::abs(v - cplx(0.5, 0)) < 1e-12);
}

TEST_CASE("dft: zero in, zero out") {
    std::vector<cplx> x(8, 0.0);
    for (const cplx& v : dft(x)) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("dft: inverse round trip and unitarity at length 512") {
    Rng rng(42, 0);
    std::vector<cplx> x(512);
    for (auto& v : x) v = rng.gaussian_pair(1.0);
    const std::vector<cplx> y = dft(x);
    const std::vector<cplx> back = dft(y, true);
    double nx = 0, ny = 0, err = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        nx += std::norm(x[i]);
        ny += std::norm(y[i]);
        err = std::max(err, std::abs(back[i] - x[i]));
    }
    CHECK(err < 1e-10);
    CHECK(std::abs(std::sqrt(nx) - std::sqrt(ny)) < 1e-10);
}

TEST_CASE("dft: rejects non-power-of-two lengths") {
    std::vector<cplx> x(12, 0.0);
    CHECK_THROWS_AS((void)dft(x), std::invalid_argument);
}

TEST_CASE("gray_map: QPSK convention") {
    const Constellation& c = Constellation::get(Mod::QPSK);
    const double a = 1.0 / std::sqrt(2.0);
    std::vector<std::uint8_t> bits{0, 0, 1, 1, 0, 1, 1, 0};
    const std::vector<cplx> s = gray_map(bits, c);
    CHECK(std::abs(s[0] - cplx(a, a)) < 1e-15);
    CHECK(std::abs(s[1] - cplx(-a, -a)) < 1e-15);
    CHECK(std::abs(s[2] - cplx(a, -a)) < 1e-15);
    CHECK(std::abs(s[3] - cplx(-a, a)) < 1e-15);
}

TEST_CASE("gray_map: rejects ragged bit counts") {
    const Constellation& c = Constellation::get(Mod::QPSK);
    std::vector<std::uint8_t> bits{0, 1, 1};
    CHECK_THROWS_AS((void)gray_map(bits, c), std::invalid_argument);
}

TEST_CASE("constellations: unit average energy") {
    for (Mod m : {Mod::QPSK, Mod::QAM16}) {
        const Constellation& c = Constellation::get(m);
        double e = 0;
        for (const cplx& p : c.points) e += std::norm(p);
        CHECK(std::abs(e / c.order - 1.0) < 1e-12);
    }
}

TEST_CASE("constellations: nearest neighbours differ in exactly one bit") {
    for (Mod m : {Mod::QPSK, Mod::QAM16}) {
        const Constellation& c = Constellation::get(m);
        double dmin = 1e300;
        for (int i = 0; i < c.order; ++i)
            for (int j = i + 1; j < c.order; ++j)
                dmin = std::min(dmin, std::abs(c.points[i] - c.points[j]));
        for (int i = 0; i < c.order; ++i)
            for (int j = i + 1; j < c.order; ++j) {
                if (std::abs(c.points[i] - c.points[j]) > dmin * 1.001) continue;
                const unsigned x = static_cast<unsigned>(i) ^ static_cast<unsigned>(j);
                CHECK(std::popcount(x) == 1);
            }
    }
}

TEST_CASE("gaussian_pair: degenerate, moments and determinism") {
    Rng a(7, 3), b(7, 3);
    CHECK(a.gaussian_pair(0.0) == cplx(0.0, 0.0));
    CHECK(a.gaussian_pair(1.0) == b.gaussian_pair(1.0));
    CHECK_THROWS_AS((void)a.gaussian_pair(-1.0), std::invalid_argument);

    Rng rng(123, 0);
    const int n = 1'000'000;
    double e2 = 0, cross = 0, er = 0, ei = 0;
    for (int i = 0; i < n; ++i) {
        const cplx z = rng.gaussian_pair(1.0);
        e2 += std::norm(z);
        cross += z.real() * z.imag();
        er += z.real();
        ei += z.imag();
    }
    CHECK(std::abs(e2 / n - 1.0) < 0.01);
    // real/imag parts uncorrelated
    const double corr = (cross / n - (er / n) * (ei / n)) / 0.5;
    CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("rng: distinct stream ids decorrelate") {
    Rng a(9, 0), b(9, 1);
    const int n = 100000;
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += a.gaussian_pair(1.0).real() * b.gaussian_pair(1.0).real();
    CHECK(std::abs(acc / n) < 0.02);
}

TEST_CASE("cholesky solve round trips for SPD and HPD systems") {
    Rng rng(5, 0);
    RMat a(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = rng.gaussian_pair(1.0).real();
    RMat spd = gram(a);
    for (int i = 0; i < 4; ++i) spd(i, i) += 1.0;
    std::vector<double> x{1.0, -2.0, 0.5, 3.0};
    const std::vector<double> b = matvec(spd, x);
    const std::vector<double> xs = solve_spd(spd, b);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(xs[i] - x[i]) < 1e-10);

    CMat c(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) c(i, j) = rng.gaussian_pair(1.0);
    CMat hpd = gram(c);
    for (int i = 0; i < 4; ++i) hpd(i, i) += 1.0;
    std::vector<cplx> xc{{1, 1}, {0, -2}, {3, 0}, {-1, 0.5}};
    const std::vector<cplx> bc = matvec(hpd, xc);
    const std::vector<cplx> xcs = solve_hpd(hpd, bc);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(xcs[i] - xc[i]) < 1e-10);
}

TEST_CASE("cholesky rejects singular matrices") {
    RMat z(2, 2);
    CHECK_THROWS_AS((void)cholesky(z), std::domain_error);
}
