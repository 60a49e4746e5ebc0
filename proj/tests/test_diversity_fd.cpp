#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "txdivsim/diversity_fd.hpp"
#include "txdivsim/receivers.hpp"
#include "txdivsim/stbc.hpp"

using namespace txdiv;

TEST_CASE("cyclic_shift: zero delay is the identity") {
    Rng rng(1, 0);
    std::vector<cplx> x(16);
    for (auto& v : x) v = rng.gaussian_pair(1.0);
    const std::vector<cplx> y = cyclic_shift(x, 0);
    for (size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("cyclic_shift: impulse moves by d") {
    std::vector<cplx> x{1, 0, 0, 0};
    const std::vector<cplx> y = cyclic_shift(x, 1);
    CHECK(y[0] == cplx(0, 0));
    CHECK(y[1] == cplx(1, 0));
    CHECK(y[2] == cplx(0, 0));
    CHECK(y[3] == cplx(0, 0));
    CHECK_THROWS_AS((void)cyclic_shift(x, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)cyclic_shift(x, -1), std::invalid_argument);
}

TEST_CASE("cyclic_shift: DFT shift theorem") {
    Rng rng(2, 0);
    std::vector<cplx> x(64);
    for (auto& v : x) v = rng.gaussian_pair(1.0);
    for (int d : {1, 5, 17, 63}) {
        const std::vector<cplx> xs = cyclic_shift(x, d);
        const std::vector<cplx> fx = dft(x), fxs = dft(xs);
        for (int k = 0; k < 64; ++k) {
            const double ang = -2.0 * std::numbers::pi * k * d / 64.0;
            const cplx want = fx[k] * cplx(std::cos(ang), std::sin(ang));
            CHECK(std::abs(fxs[k] - want) < 1e-10);
        }
    }
}

TEST_CASE("cdd_effective: DC and the alternating subcarrier") {
    CddConfig cfg;  // delays [0 64 128 192], N = 512
    Rng rng(3, 0);
    std::vector<cplx> h(4);
    for (auto& v : h) v = rng.gaussian_pair(1.0);
    const cplx at0 = cdd_effective(h, 0, cfg);
    CHECK(std::abs(at0 - (h[0] + h[1] + h[2] + h[3]) / 2.0) < 1e-12);
    // k = 4: phase factors are 1, -1, 1, -1
    const cplx at4 = cdd_effective(h, 4, cfg);
    CHECK(std::abs(at4 - (h[0] - h[1] + h[2] - h[3]) / 2.0) < 1e-12);
}

TEST_CASE("cdd_effective equals the shifted time-domain response") {
    // per-antenna taps -> shift by the antenna delay, sum, transform
    const int n = 512;
    CddConfig cfg{n, {0, 64, 128, 192}};
    Rng rng(4, 0);
    std::vector<std::vector<cplx>> imp(4, std::vector<cplx>(n, cplx(0, 0)));
    const int tap_pos[3] = {0, 7, 23};
    std::vector<std::vector<cplx>> taps(4, std::vector<cplx>(3));
    for (int a = 0; a < 4; ++a)
        for (int t = 0; t < 3; ++t) {
            taps[a][t] = rng.gaussian_pair(1.0);
            imp[a][tap_pos[t]] = taps[a][t];
        }
    // composite response: sum of cyclically shifted impulse responses / sqrt(Nt)
    std::vector<cplx> comp(n, cplx(0, 0));
    for (int a = 0; a < 4; ++a) {
        const std::vector<cplx> sh = cyclic_shift(imp[a], cfg.delays[a]);
        for (int i = 0; i < n; ++i) comp[i] += sh[i] / 2.0;
    }
    const std::vector<cplx> freq = dft(comp);  // unitary, scale by sqrt(n)
    const std::vector<int> pos(tap_pos, tap_pos + 3);
    for (int k = 0; k < n; k += 37) {
        std::vector<cplx> hk(4);
        for (int a = 0; a < 4; ++a) {
            cplx acc = 0;
            for (int t = 0; t < 3; ++t) {
                const double ang = -2.0 * std::numbers::pi * k * tap_pos[t] / n;
                acc += taps[a][t] * cplx(std::cos(ang), std::sin(ang));
            }
            hk[a] = acc;
        }
        const cplx want = freq[k] * std::sqrt(static_cast<double>(n));
        CHECK(std::abs(cdd_effective(hk, k, cfg) - want) < 1e-9);
    }
}

TEST_CASE("alamouti_cdd_effective: zero delays and single antenna") {
    CddConfig cfg{512, {0, 0, 0, 0}};
    std::vector<cplx> h{{1, 0.5}, {0.3, -1}, {-0.7, 0.2}, {2, 0}};
    auto [g1, g2] = alamouti_cdd_effective(h, 11, cfg);
    CHECK(std::abs(g1 - (h[0] + h[2]) / 2.0) < 1e-12);
    CHECK(std::abs(g2 - (h[1] + h[3]) / 2.0) < 1e-12);

    CddConfig dcfg;  // default delays
    std::vector<cplx> e1{{1, 0}, {0, 0}, {0, 0}, {0, 0}};
    const int k = 77;
    auto [ga, gb] = alamouti_cdd_effective(e1, k, dcfg);
    const double ang = -2.0 * std::numbers::pi * k * dcfg.delays[0] / dcfg.n_fft;
    CHECK(std::abs(ga - cplx(std::cos(ang), std::sin(ang)) / 2.0) < 1e-12);
    CHECK(std::abs(gb) == 0.0);
}

TEST_CASE("alamouti_cdd reduces to a genuine two-branch Alamouti link") {
    // transmitting through 4 physical antennas with per-antenna phase ramps
    // equals a 2-antenna Alamouti system with channel (g1, g2)
    CddConfig cfg;
    Rng rng(5, 0);
    const Constellation& c = Constellation::get(Mod::QPSK);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = static_cast<int>(rng.next_u64() % cfg.n_fft);
        std::vector<cplx> h(4);
        for (auto& v : h) v = rng.gaussian_pair(1.0);
        const std::vector<cplx> s{c.points[rng.next_u64() % 4], c.points[rng.next_u64() % 4]};
        const Codeword cw = encode(SchemeId::ALAMOUTI_CDD, s);

        auto ramp = [&](int a) {
            const double ang = -2.0 * std::numbers::pi * k * cfg.delays[a] / cfg.n_fft;
            return cplx(std::cos(ang), std::sin(ang));
        };
        // stream 1 on antennas {1,3}, stream 2 on antennas {2,4}; 1/sqrt(2)
        // per stream and 1/sqrt(2) per pair
        cplx r4[2];
        for (int t = 0; t < 2; ++t) {
            cplx acc = 0;
            acc += cw.entries(t, 0) * 0.5 * (h[0] * ramp(0) + h[2] * ramp(2));
            acc += cw.entries(t, 1) * 0.5 * (h[1] * ramp(1) + h[3] * ramp(3));
            r4[t] = acc;
        }
        auto [g1, g2] = alamouti_cdd_effective(h, k, cfg);
        cplx r2[2];
        for (int t = 0; t < 2; ++t) r2[t] = cw.entries(t, 0) * g1 + cw.entries(t, 1) * g2;
        CHECK(std::abs(r4[0] - r2[0]) < 1e-12);
        CHECK(std::abs(r4[1] - r2[1]) < 1e-12);

        // and the standard two-branch detector recovers the symbols
        CMat r(2, 1);
        r(0, 0) = r2[0];
        r(1, 0) = r2[1];
        const std::vector<cplx> g1v{g1}, g2v{g2};
        const DetectorOutput d = alamouti_detect(r, g1v, g2v, c, 1e-12);
        CHECK(std::abs(d.hard_symbols[0] - s[0]) < 1e-9);
        CHECK(std::abs(d.hard_symbols[1] - s[1]) < 1e-9);
    }
}

TEST_CASE("cdd power is preserved in expectation") {
    CddConfig cfg;
    Rng rng(6, 0);
    const int draws = 100000;
    for (int k : {0, 100, 311}) {
        double acc = 0;
        for (int t = 0; t < draws; ++t) {
            std::vector<cplx> h(4);
            for (auto& v : h) v = rng.gaussian_pair(1.0);
            acc += std::norm(cdd_effective(h, k, cfg));
        }
        CHECK(std::abs(acc / draws - 1.0) < 0.02);
    }
}

TEST_CASE("alamouti+cdd per-subcarrier Gram is (|g1|^2 + |g2|^2) I") {
    Rng rng(7, 0);
    CddConfig cfg;
    std::vector<cplx> h(4);
    for (auto& v : h) v = rng.gaussian_pair(1.0);
    auto [g1, g2] = alamouti_cdd_effective(h, 200, cfg);
    CMat geff(1, 2);
    geff(0, 0) = g1;
    geff(0, 1) = g2;
    const EquivChannel g = equiv_channel(SchemeId::ALAMOUTI_CDD, geff);
    const CMat gr = gram(g.cplx_mat);
    const double want = std::norm(g1) + std::norm(g2);
    CHECK(std::abs(gr(0, 0).real() - want) < 1e-12);
    CHECK(std::abs(gr(1, 1).real() - want) < 1e-12);
    CHECK(std::abs(gr(0, 1)) < 1e-12);
}
