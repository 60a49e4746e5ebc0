// Incremental-diversity HARQ: rows of one MDC-QOSTBC block are sent in up to
// three rounds (row 1 = SM, row 2 completes DSTTD, rows 3-4 complete the full
// code); the receiver keeps every received slot and re-decodes the
// accumulated signal.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "txdivsim/channel.hpp"
#include "txdivsim/numerics.hpp"
#include "txdivsim/stbc.hpp"

namespace txdiv {

enum class HarqOutcome { Pending, Success, Fail };

struct HarqConfig {
    double snr_db = 8.0;
    int nr = 2;
    Mod mod = Mod::QPSK;
    bool static_channel = true;  // same fade for every round of a session
    bool bundle_rows_34 = true;  // rounds 3 and 4 sent as one retransmission
};

struct HarqDecode {
    std::vector<std::uint8_t> bits;
    std::vector<cplx> symbols;
    int diversity_label = 0;  // 1 = SM, 2 = DSTTD, 4 = full MDC-QOSTBC
};

// One HARQ session over a single flat-fading subcarrier. Rounds transmit
// rows of the codeword; all received slots are retained and jointly decoded.
class HarqSession {
public:
    HarqSession(const HarqConfig& cfg, std::span<const std::uint8_t> info_bits, Rng& rng);

    // Sends the rows of round r (1-based). Throws std::logic_error when
    // called after an acknowledged success or out of order.
    void transmit_round(int r);

    // ML decoding of everything received so far.
    HarqDecode combine_decode() const;

    // Genie ACK: compares decoded info bits against the true frame.
    HarqOutcome ack(const HarqDecode& d);

    int rounds_sent() const { return rounds_sent_; }
    int max_rounds() const { return cfg_.bundle_rows_34 ? 3 : 4; }
    int slots_used() const { return static_cast<int>(received_.size()); }
    HarqOutcome outcome() const { return outcome_; }

    // data symbols per channel use after `rounds` rounds
    double throughput_after(int rounds) const;

    // received slot stack (per slot: Nr samples), for the one-shot
    // equivalence checks
    const std::vector<std::vector<cplx>>& received() const { return received_; }
    const CMat& channel_of_round(int r) const { return h_per_round_[r - 1]; }

private:
    HarqConfig cfg_;
    Rng& rng_;
    std::vector<std::uint8_t> info_;
    std::array<cplx, 4> data_;
    Codeword codeword_;
    std::vector<std::vector<cplx>> received_;   // one entry per slot
    std::vector<int> slot_row_;                 // codeword row index per slot
    std::vector<int> slot_round_;               // round that carried each slot
    std::vector<CMat> h_per_round_;
    int rounds_sent_ = 0;
    HarqOutcome outcome_ = HarqOutcome::Pending;
};

struct HarqRoundStats {
    long sessions = 0;
    std::array<long, 4> symbol_errors_after_round{};  // indexed by round-1
    std::array<long, 4> frame_errors_after_round{};
    std::array<double, 4> throughput{};               // symbols per channel use
};

// Runs independent sessions, decoding after every round regardless of ACK so
// per-round error rates are measured on every session.
HarqRoundStats run_harq_sessions(const HarqConfig& cfg, long n_sessions, std::uint64_t seed);

}  // namespace txdiv
