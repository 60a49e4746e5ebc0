#include "txdivsim/selftest.hpp"

#include <cmath>
#include <cstring>

#include "txdivsim/fec_turbo.hpp"
#include "txdivsim/receivers.hpp"
#include "txdivsim/stbc.hpp"

namespace txdiv {

namespace {

CMat random_channel(Rng& rng, int nr) {
    CMat h(nr, 4);
    for (int m = 0; m < nr; ++m)
        for (int a = 0; a < 4; ++a) h(m, a) = rng.gaussian_pair(1.0);
    return h;
}

std::array<cplx, 4> random_symbols(Rng& rng, const Constellation& c) {
    std::array<cplx, 4> s;
    for (auto& v : s) v = c.points[rng.next_u64() % c.points.size()];
    return s;
}

// transmit one MDC block over h and return the real stack
std::vector<double> transmit_mdc(const std::array<cplx, 4>& data, const CMat& h, double n0, Rng& rng) {
    const Codeword cw = encode(SchemeId::MDC_QOSTBC, std::span<const cplx>(data.data(), 4));
    const int nr = h.rows();
    CMat r(4, nr);
    for (int t = 0; t < 4; ++t)
        for (int m = 0; m < nr; ++m) {
            cplx s = 0;
            for (int a = 0; a < 4; ++a) s += cw.entries(t, a) * h(m, a);
            r(t, m) = cw.power_scale * s + (n0 > 0 ? rng.gaussian_pair(n0) : cplx(0, 0));
        }
    return mdc_stack(r);
}

}  // namespace

std::vector<CheckResult> decoding_chain_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;
    const Constellation& qpsk = Constellation::get(Mod::QPSK);

    {  // (a) Gram block-diagonality
        Rng rng(seed, 1);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const CMat h = random_channel(rng, 1 + trial % 2);
            const EquivChannel g = equiv_channel(SchemeId::MDC_QOSTBC, h);
            const RMat gr = gram(g.real_mat);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j)
                    if (i / 2 != j / 2) worst = std::max(worst, std::abs(gr(i, j)));
        }
        out.push_back({"gram-block-diagonal", worst < 1e-10,
                       "max off-block |G^T G| = " + std::to_string(worst) + " over 1000 channels"});
    }

    {  // (b) symbolwise MLD vs exhaustive joint MLD
        Rng rng(seed, 2);
        const double snrs[] = {0.0, 5.0, 10.0, 20.0};
        int mismatches = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const double n0 = std::pow(10.0, -snrs[trial % 4] / 10.0);
            const CMat h = random_channel(rng, 1 + trial % 2);
            const std::array<cplx, 4> data = random_symbols(rng, qpsk);
            const std::vector<double> stack = transmit_mdc(data, h, n0, rng);
            const DetectorOutput fast = mdc_mld(stack, h, qpsk, n0);
            const EquivChannel g = equiv_channel(SchemeId::MDC_QOSTBC, h, n0);
            const std::vector<cplx> brute = mdc_exhaustive_mld(stack, g, qpsk);
            for (int i = 0; i < 4; ++i)
                if (std::norm(fast.hard_symbols[i] - brute[i]) > 1e-18) {
                    ++mismatches;
                    break;
                }
        }
        out.push_back({"symbolwise-equals-joint-mld", mismatches == 0,
                       std::to_string(mismatches) + "/1000 disagreements with the M^4 search"});
    }

    {  // (c) exact LLR vs direct posterior enumeration
        Rng rng(seed, 3);
        double worst = 0.0;
        for (int trial = 0; trial < 500; ++trial) {
            GroupSystem gs;
            gs.y = {2.0 * rng.gaussian_pair(1.0).real(), 2.0 * rng.gaussian_pair(1.0).real()};
            gs.h = {{{rng.gaussian_pair(1.0).real(), rng.gaussian_pair(1.0).real()},
                     {rng.gaussian_pair(1.0).real(), rng.gaussian_pair(1.0).real()}}};
            const GroupDecision d = mld_group(gs, qpsk, LlrMode::Exact);
            // independent route: plain sums of Gaussian likelihoods
            for (int b = 0; b < 2; ++b) {
                double num = 0.0, den = 0.0;
                for (const auto& li : qpsk.axis)
                    for (const auto& lq : qpsk.axis) {
                        const double e0 = gs.y[0] - (gs.h[0][0] * li.value + gs.h[0][1] * lq.value);
                        const double e1 = gs.y[1] - (gs.h[1][0] * li.value + gs.h[1][1] * lq.value);
                        const double lik = std::exp(-0.5 * (e0 * e0 + e1 * e1));
                        const unsigned label = b == 0 ? li.label : lq.label;
                        if (label == 0) num += lik;
                        else den += lik;
                    }
                worst = std::max(worst, std::abs(d.llrs[b] - std::log(num / den)));
            }
        }
        out.push_back({"exact-llr-enumeration", worst < 1e-9,
                       "max |Delta LLR| = " + std::to_string(worst) + " over 500 groups"});
    }

    {  // (d) whitening covariance
        Rng rng(seed, 4);
        const CMat h = random_channel(rng, 2);
        const double n0 = 0.63;
        const EquivChannel g = equiv_channel(SchemeId::MDC_QOSTBC, h, n0);
        const int trials = 100000;
        double acc[8][8] = {};
        std::vector<double> stack(16);
        for (int t = 0; t < trials; ++t) {
            for (auto& v : stack) v = rng.gaussian_pair(n0).real();  // var n0/2 per real dim
            const std::array<GroupSystem, 4> gs = matched_whiten(g, stack);
            double w[8];
            for (int grp = 0; grp < 4; ++grp) {
                w[2 * grp] = gs[grp].y[0];
                w[2 * grp + 1] = gs[grp].y[1];
            }
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) acc[i][j] += w[i] * w[j];
        }
        double worst = 0.0;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                const double want = i == j ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(acc[i][j] / trials - want));
            }
        out.push_back({"whitened-noise-covariance", worst < 0.02,
                       "max |cov - I| = " + std::to_string(worst) + " over 1e5 trials"});
    }

    return out;
}

std::vector<CheckResult> counter_checks() {
    std::vector<CheckResult> out;
    Rng rng(99, 0);
    for (Mod mod : {Mod::QPSK, Mod::QAM16}) {
        const Constellation& c = Constellation::get(mod);
        const long m = c.order;
        const CMat h = random_channel(rng, 2);
        const std::array<cplx, 4> data = random_symbols(rng, c);
        const double n0 = 0.1;

        const std::vector<double> stack = transmit_mdc(data, h, n0, rng);
        const long mdc = mdc_mld(stack, h, c, n0).hypotheses_per_symbol;

        const EquivChannel gq = equiv_channel(SchemeId::QOSTBC, h, n0);
        std::vector<cplx> rq(gq.cplx_mat.rows(), cplx(0.1, 0.0));
        const long qo = qo_joint_mld(rq, gq, c).hypotheses_per_symbol;

        CMat r2(2, 1);
        r2(0, 0) = cplx(1, 0);
        r2(1, 0) = cplx(0, 1);
        const std::vector<cplx> g1{cplx(1, 0)}, g2{cplx(0.5, 0.5)};
        const long alam = alamouti_detect(r2, g1, g2, c, n0).hypotheses_per_symbol;

        const std::vector<cplx> rc{cplx(0.2, 0.1)}, hc{cplx(1, 0)};
        const long cdd = cdd_detect(rc, hc, c, n0).hypotheses_per_symbol;

        const long sqrt_m = static_cast<long>(std::lround(std::sqrt(static_cast<double>(m))));
        char buf[128];
        std::snprintf(buf, sizeof buf, "QO %ld (want %ld), MDC %ld (want %ld), Alamouti %ld / CDD %ld (want %ld)",
                      qo, m * m, mdc, m, alam, cdd, sqrt_m);
        out.push_back({std::string("table1-counters-") + (mod == Mod::QPSK ? "qpsk" : "16qam"),
                       qo == m * m && mdc == m && alam == sqrt_m && cdd == sqrt_m, buf});
    }
    return out;
}

std::vector<CheckResult> codec_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;

    {  // toy exhaustive-ML agreement
        const TurboCodec codec(TurboConfig{8, CodeRate::R1_3, 8, 0x11ULL});
        const int n = codec.coded_len();
        // all 256 codewords as BPSK
        std::vector<std::vector<double>> book(256, std::vector<double>(n));
        for (int w = 0; w < 256; ++w) {
            std::vector<std::uint8_t> info(8);
            for (int i = 0; i < 8; ++i) info[i] = (w >> (7 - i)) & 1;
            const std::vector<std::uint8_t> coded = codec.encode(info);
            for (int i = 0; i < n; ++i) book[w][i] = 1.0 - 2.0 * coded[i];
        }
        Rng rng(seed, 7);
        const double n0 = std::pow(10.0, -4.0 / 10.0);  // Es/N0 = 4 dB
        const double sigma2 = n0 / 2.0;
        int agree = 0;
        const int trials = 1000;
        std::vector<double> y(n), llr(n);
        for (int t = 0; t < trials; ++t) {
            const int w = static_cast<int>(rng.next_u64() & 0xff);
            for (int i = 0; i < n; ++i) y[i] = book[w][i] + rng.gaussian_pair(n0).real();
            int best = 0;
            double best_d = 1e300;
            for (int cand = 0; cand < 256; ++cand) {
                double d = 0;
                for (int i = 0; i < n; ++i) {
                    const double e = y[i] - book[cand][i];
                    d += e * e;
                }
                if (d < best_d) {
                    best_d = d;
                    best = cand;
                }
            }
            for (int i = 0; i < n; ++i) llr[i] = 2.0 * y[i] / sigma2;
            const std::vector<std::uint8_t> dec = codec.decode(llr);
            int w_dec = 0;
            for (int i = 0; i < 8; ++i) w_dec = (w_dec << 1) | dec[i];
            if (w_dec == best) ++agree;
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d/%d trials match exhaustive ML at Es/N0 = 4 dB", agree, trials);
        out.push_back({"codec-matches-ml", agree >= 990, buf});
    }

    {  // noiseless decoding is always error-free
        Rng rng(seed, 8);
        bool ok = true;
        for (CodeRate rate : {CodeRate::R1_3, CodeRate::R1_2, CodeRate::R8_9}) {
            const TurboCodec codec(TurboConfig{rate == CodeRate::R8_9 ? 64 : 64, rate, 8, 0x12ULL});
            for (int t = 0; t < 50 && ok; ++t) {
                std::vector<std::uint8_t> info(64);
                for (auto& b : info) b = static_cast<std::uint8_t>(rng.bit());
                const std::vector<std::uint8_t> coded = codec.encode(info);
                std::vector<double> llr(coded.size());
                for (size_t i = 0; i < coded.size(); ++i) llr[i] = coded[i] ? -40.0 : 40.0;
                ok = codec.decode(llr) == info;
            }
        }
        out.push_back({"codec-noiseless", ok, "error-free on noiseless frames, all rates"});
    }

    return out;
}

bool run_selftests(std::FILE* out) {
    bool all = true;
    auto report = [&](const std::vector<CheckResult>& results) {
        for (const CheckResult& r : results) {
            std::fprintf(out, "[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
            all = all && r.pass;
        }
    };
    report(decoding_chain_checks());
    report(counter_checks());
    report(codec_checks());
    return all;
}

}  // namespace txdiv
