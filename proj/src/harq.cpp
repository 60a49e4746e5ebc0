#include "txdivsim/harq.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "txdivsim/receivers.hpp"

namespace txdiv {

namespace {

std::array<cplx, 4> bits_to_symbols(std::span<const std::uint8_t> bits, const Constellation& c) {
    const std::vector<cplx> s = gray_map(bits, c);
    if (s.size() != 4) throw std::invalid_argument("harq: info frame must map to 4 symbols");
    return {s[0], s[1], s[2], s[3]};
}

unsigned label_of_point(const Constellation& c, cplx p) {
    for (size_t i = 0; i < c.points.size(); ++i)
        if (std::norm(c.points[i] - p) < 1e-12) return static_cast<unsigned>(i);
    throw std::logic_error("harq: symbol not in constellation");
}

}  // namespace

HarqSession::HarqSession(const HarqConfig& cfg, std::span<const std::uint8_t> info_bits, Rng& rng)
    : cfg_(cfg), rng_(rng), info_(info_bits.begin(), info_bits.end()) {
    const Constellation& c = Constellation::get(cfg_.mod);
    if (static_cast<int>(info_.size()) != 4 * c.bits_per_symbol())
        throw std::invalid_argument("harq: info frame must be 4 symbols worth of bits");
    data_ = bits_to_symbols(info_, c);
    codeword_ = encode(SchemeId::MDC_QOSTBC, std::span<const cplx>(data_.data(), 4));
    // flat Rayleigh per session; one subcarrier
    CMat h(cfg_.nr, 4);
    for (int m = 0; m < cfg_.nr; ++m)
        for (int t = 0; t < 4; ++t) h(m, t) = rng_.gaussian_pair(1.0);
    h_per_round_.push_back(h);
}

void HarqSession::transmit_round(int r) {
    if (outcome_ == HarqOutcome::Success) throw std::logic_error("harq: transmit after acknowledged success");
    if (r != rounds_sent_ + 1 || r > max_rounds()) throw std::logic_error("harq: rounds must be sent in order");

    // rounds map to codeword rows: 1 -> row 1, 2 -> row 2, 3 -> rows 3+4
    std::vector<int> rows;
    if (cfg_.bundle_rows_34)
        rows = (r == 1) ? std::vector<int>{0} : (r == 2) ? std::vector<int>{1} : std::vector<int>{2, 3};
    else
        rows = {r - 1};

    CMat h = h_per_round_.back();
    if (!cfg_.static_channel && r > 1) {
        for (int m = 0; m < cfg_.nr; ++m)
            for (int t = 0; t < 4; ++t) h(m, t) = rng_.gaussian_pair(1.0);
    }
    if (static_cast<int>(h_per_round_.size()) < r) h_per_round_.push_back(h);

    const double n0 = noise_variance_from_snr_db(cfg_.snr_db);
    for (int row : rows) {
        std::vector<cplx> slot(cfg_.nr);
        for (int m = 0; m < cfg_.nr; ++m) {
            cplx s = 0;
            for (int a = 0; a < 4; ++a) s += codeword_.entries(row, a) * h(m, a);
            slot[m] = codeword_.power_scale * s + rng_.gaussian_pair(n0);
        }
        received_.push_back(std::move(slot));
        slot_row_.push_back(row);
        slot_round_.push_back(r);
    }
    rounds_sent_ = r;
}

HarqDecode HarqSession::combine_decode() const {
    if (received_.empty()) throw std::logic_error("harq: nothing received yet");
    const Constellation& c = Constellation::get(cfg_.mod);
    const int m = c.order;
    const int n_slots = static_cast<int>(received_.size());

    // exhaustive ML over all M^4 data hypotheses against every stored slot,
    // each slot using the channel of the round that carried it
    std::array<int, 4> idx{};
    std::array<cplx, 4> best{};
    double best_cost = std::numeric_limits<double>::max();
    for (idx[0] = 0; idx[0] < m; ++idx[0])
        for (idx[1] = 0; idx[1] < m; ++idx[1])
            for (idx[2] = 0; idx[2] < m; ++idx[2])
                for (idx[3] = 0; idx[3] < m; ++idx[3]) {
                    const std::array<cplx, 4> hyp{c.points[idx[0]], c.points[idx[1]], c.points[idx[2]],
                                                  c.points[idx[3]]};
                    const Codeword cw = encode(SchemeId::MDC_QOSTBC, std::span<const cplx>(hyp.data(), 4));
                    double cost = 0.0;
                    for (int t = 0; t < n_slots; ++t) {
                        const int row = slot_row_[t];
                        const CMat& h = h_per_round_[slot_round_[t] - 1];
                        for (int rx = 0; rx < cfg_.nr; ++rx) {
                            cplx pred = 0;
                            for (int a = 0; a < 4; ++a) pred += cw.entries(row, a) * h(rx, a);
                            cost += std::norm(received_[t][rx] - cw.power_scale * pred);
                        }
                    }
                    if (cost < best_cost) {
                        best_cost = cost;
                        best = hyp;
                    }
                }

    HarqDecode out;
    out.symbols.assign(best.begin(), best.end());
    out.diversity_label = n_slots >= 4 ? 4 : n_slots;
    const int bps = c.bits_per_symbol();
    out.bits.resize(4 * bps);
    for (int i = 0; i < 4; ++i) {
        const unsigned label = label_of_point(c, best[i]);
        for (int b = 0; b < bps; ++b) out.bits[i * bps + b] = (label >> (bps - 1 - b)) & 1u;
    }
    return out;
}

HarqOutcome HarqSession::ack(const HarqDecode& d) {
    outcome_ = (d.bits == info_) ? HarqOutcome::Success : HarqOutcome::Fail;
    return outcome_;
}

double HarqSession::throughput_after(int rounds) const {
    int slots = 0;
    for (int r = 1; r <= rounds; ++r) slots += (cfg_.bundle_rows_34 && r == 3) ? 2 : 1;
    return 4.0 / slots;
}

HarqRoundStats run_harq_sessions(const HarqConfig& cfg, long n_sessions, std::uint64_t seed) {
    const Constellation& c = Constellation::get(cfg.mod);
    const int bps = c.bits_per_symbol();
    HarqRoundStats stats;
    stats.sessions = n_sessions;

    for (long s = 0; s < n_sessions; ++s) {
        Rng rng(seed, static_cast<std::uint64_t>(s));
        std::vector<std::uint8_t> info(4 * bps);
        for (auto& b : info) b = static_cast<std::uint8_t>(rng.bit());
        HarqSession session(cfg, info, rng);
        // decode after every round (no mid-session ACK) so per-round error
        // rates are unconditional
        for (int r = 1; r <= session.max_rounds(); ++r) {
            session.transmit_round(r);
            const HarqDecode d = session.combine_decode();
            int sym_err = 0;
            const std::vector<cplx> tx = gray_map(info, c);
            for (int i = 0; i < 4; ++i)
                if (std::norm(d.symbols[i] - tx[i]) > 1e-12) ++sym_err;
            stats.symbol_errors_after_round[r - 1] += sym_err;
            if (sym_err > 0) ++stats.frame_errors_after_round[r - 1];
            stats.throughput[r - 1] = session.throughput_after(r);
        }
    }
    return stats;
}

}  // namespace txdiv
