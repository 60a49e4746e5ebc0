// Monte Carlo driver: full coded frame pipeline (bits -> turbo -> symbols ->
// scheme -> TU6 channel -> detector -> LLRs -> decoder), SNR sweeps with a
// stop rule, Wilson confidence intervals, CSV/JSON output.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "txdivsim/channel.hpp"
#include "txdivsim/fec_turbo.hpp"
#include "txdivsim/numerics.hpp"
#include "txdivsim/receivers.hpp"
#include "txdivsim/stbc.hpp"

namespace txdiv {

enum class Detector { MLD, LMMSE, MAXLOG_MLD };

const char* detector_name(Detector d);
const char* mod_name(Mod m);

struct SimConfig {
    SchemeId scheme = SchemeId::MDC_QOSTBC;
    Mod mod = Mod::QPSK;
    CodeRate rate = CodeRate::R8_9;
    int block_len = 0;  // 0 = rate default (594 for 1/2, 1056 for 8/9)
    int nt = 4;
    int nr = 2;
    int n_fft = 512;
    std::vector<int> cdd_delays{0, 64, 128, 192};
    std::string channel = "tu6";  // tu6 | flat | file:<path>
    std::vector<double> snr_grid_db;
    int min_frame_errors = 100;
    long max_frames = 20000;
    std::uint64_t seed = 1;
    Detector detector = Detector::MLD;
    int threads = 1;
    bool noiseless = false;
    int turbo_iterations = 8;
    std::uint64_t interleaver_seed = 0x7e3aULL;

    int effective_block_len() const;
};

int default_block_len(CodeRate rate);

// Config resolved once per sweep: channel profile, codec, constellation and
// the frame-to-grid mapping. A frame occupies up to 512 subcarriers x 4
// OFDM-symbol slots; the n_sym/4 used subcarriers are spread evenly over the
// FFT grid and filled subcarrier-first, identically for every scheme.
class SimContext {
public:
    explicit SimContext(SimConfig cfg);

    const SimConfig& cfg() const { return cfg_; }
    const TapProfile& profile() const { return profile_; }
    const TurboCodec& codec() const { return codec_; }
    const Constellation& constellation() const { return *constel_; }
    int used_subcarriers() const { return static_cast<int>(sc_index_.size()); }
    int used_slots() const { return 4; }
    int subcarrier_index(int j) const { return sc_index_[j]; }

private:
    SimConfig cfg_;
    TapProfile profile_;
    TurboCodec codec_;
    const Constellation* constel_;
    std::vector<int> sc_index_;
};

struct FrameResult {
    bool frame_error = false;
    long bit_errors = 0;
    int info_bits = 0;
    int used_subcarriers = 0;
    int used_slots = 0;
};

// One full pipeline pass. Deterministic in (cfg.seed, frame_idx).
FrameResult run_frame(const SimContext& ctx, double snr_db, std::uint64_t frame_idx);

struct RunRecord {
    std::string scheme, rate, mod;
    double snr_db = 0;
    long frames = 0, frame_errors = 0, bit_errors = 0;
    double fer = 0, ber = 0, fer_ci_lo = 0, fer_ci_hi = 0;
    double wall_seconds = 0;  // not serialized to CSV
};

// Monte Carlo at each grid SNR until min_frame_errors or max_frames, whichever
// first; frames are processed in fixed-size batches so results do not depend
// on the worker count.
std::vector<RunRecord> sweep(const SimContext& ctx,
                             const std::function<void(const RunRecord&)>& on_record = {});

// 95% Wilson interval for e successes in n trials.
std::pair<double, double> wilson_ci(long e, long n);

// CSV: header `scheme,rate,mod,snr_db,frames,frame_errors,bit_errors,fer,ber,
// fer_ci_lo,fer_ci_hi`; append mode keeps the existing header.
void emit_csv(std::span<const RunRecord> records, const std::string& path, bool append = false);
std::vector<RunRecord> parse_csv(const std::string& path);

// Companion JSON carrying the full SimConfig for provenance / replay.
void emit_json_config(const SimConfig& cfg, const std::string& path);
SimConfig config_from_json_file(const std::string& path);

// Uncoded symbol transmission over i.i.d. flat Rayleigh (fresh channel per
// 4-slot block), used for the diversity-slope property.
struct UncodedPoint {
    double snr_db = 0;
    long bits = 0;
    long bit_errors = 0;
    double ber = 0;
};
UncodedPoint uncoded_ber_point(SchemeId scheme, double snr_db, long n_blocks, std::uint64_t seed,
                               int nr = 1, Mod mod = Mod::QPSK);

}  // namespace txdiv
