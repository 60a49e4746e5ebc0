// txdivsim: Monte Carlo link-level simulator for four-antenna open-loop
// transmit diversity (CDD, Alamouti+CDD, QO-STBC, MDC-QOSTBC) in coded OFDM.
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "txdivsim/harness.hpp"
#include "txdivsim/harq.hpp"
#include "txdivsim/selftest.hpp"

namespace {

std::vector<double> parse_snr_grid(const std::string& s) {
    // "lo:step:hi" or a single value
    std::vector<double> out;
    double lo, step, hi;
    if (sscanf(s.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) == 3) {
        if (step <= 0) throw CLI::ValidationError("--snr", "step must be positive");
        for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    } else {
        out.push_back(std::stod(s));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coded MIMO-OFDM transmit diversity simulator"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "Monte Carlo FER/BER sweep for one scheme");
    std::string scheme = "mdc-qostbc", rate = "8/9", mod = "qpsk", detector = "mld";
    std::string snr = "4:1:10", out_path = "results.csv", channel = "tu6";
    std::vector<int> delays = {0, 64, 128, 192};
    int nr = 2, min_errors = 100, threads = 0;
    long max_frames = 20000;
    std::uint64_t seed = 1;
    bool noiseless = false, append = false;
    run->add_option("--scheme", scheme)->check(CLI::IsMember({"cdd", "alamouti-cdd", "qostbc", "mdc-qostbc"}));
    run->add_option("--rate", rate)->check(CLI::IsMember({"1/3", "1/2", "8/9"}));
    run->add_option("--mod", mod)->check(CLI::IsMember({"qpsk", "16qam"}));
    run->add_option("--nr", nr, "receive antennas");
    run->add_option("--snr", snr, "SNR grid lo:step:hi in dB, or one value");
    run->add_option("--seed", seed);
    run->add_option("--min-errors", min_errors, "frame errors per point before stopping");
    run->add_option("--max-frames", max_frames, "frame cap per point");
    run->add_option("--detector", detector)->check(CLI::IsMember({"mld", "lmmse", "maxlog-mld"}));
    run->add_option("--out", out_path, "output CSV (a .json config sidecar is written next to it)");
    run->add_option("--channel", channel, "tu6 | flat | file:<path>");
    run->add_option("--cdd-delays", delays, "per-antenna cyclic delays in samples")->expected(4);
    run->add_option("--threads", threads, "worker threads (0 = hardware)");
    run->add_flag("--noiseless", noiseless, "disable noise (pipeline check)");
    run->add_flag("--append", append, "append to an existing CSV");

    // ---- harq ----
    auto* harq = app.add_subcommand("harq", "incremental-diversity HARQ sessions");
    double harq_snr = 8.0;
    long sessions = 10000;
    std::string harq_out = "harq.csv", channel_mode = "static";
    std::uint64_t harq_seed = 1;
    harq->add_option("--snr", harq_snr, "SNR in dB");
    harq->add_option("--sessions", sessions);
    harq->add_option("--seed", harq_seed);
    harq->add_option("--channel-mode", channel_mode)->check(CLI::IsMember({"static", "independent"}));
    harq->add_option("--out", harq_out, "per-round CSV");

    // ---- selftest ----
    auto* self = app.add_subcommand("selftest", "run the decoding-chain oracle suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            txdiv::SimConfig cfg;
            cfg.scheme = scheme == "cdd"            ? txdiv::SchemeId::CDD
                         : scheme == "alamouti-cdd" ? txdiv::SchemeId::ALAMOUTI_CDD
                         : scheme == "qostbc"       ? txdiv::SchemeId::QOSTBC
                                                    : txdiv::SchemeId::MDC_QOSTBC;
            cfg.rate = rate == "1/3" ? txdiv::CodeRate::R1_3
                       : rate == "1/2" ? txdiv::CodeRate::R1_2
                                       : txdiv::CodeRate::R8_9;
            cfg.mod = mod == "qpsk" ? txdiv::Mod::QPSK : txdiv::Mod::QAM16;
            cfg.detector = detector == "mld" ? txdiv::Detector::MLD
                           : detector == "lmmse" ? txdiv::Detector::LMMSE
                                                 : txdiv::Detector::MAXLOG_MLD;
            cfg.nr = nr;
            cfg.snr_grid_db = parse_snr_grid(snr);
            cfg.seed = seed;
            cfg.min_frame_errors = min_errors;
            cfg.max_frames = max_frames;
            cfg.channel = channel;
            cfg.cdd_delays = delays;
            cfg.noiseless = noiseless;
            cfg.threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
            if (cfg.threads < 1) cfg.threads = 1;

            txdiv::SimContext ctx(cfg);
            std::printf("# %s rate %s %s nr=%d detector=%s channel=%s seed=%llu\n", scheme.c_str(), rate.c_str(),
                        mod.c_str(), nr, detector.c_str(), channel.c_str(),
                        static_cast<unsigned long long>(seed));
            std::vector<txdiv::RunRecord> recs = txdiv::sweep(ctx, [](const txdiv::RunRecord& r) {
                std::printf("%-12s rate %-4s %6.2f dB  frames %-6ld fer %.4g  ber %.4g  ci [%.4g, %.4g]  %.1fs\n",
                            r.scheme.c_str(), r.rate.c_str(), r.snr_db, r.frames, r.fer, r.ber, r.fer_ci_lo,
                            r.fer_ci_hi, r.wall_seconds);
                std::fflush(stdout);
            });
            txdiv::emit_csv(recs, out_path, append);
            const std::string json_path = out_path.substr(0, out_path.find_last_of('.')) + ".json";
            txdiv::emit_json_config(cfg, json_path);
            std::printf("wrote %s and %s\n", out_path.c_str(), json_path.c_str());
        } else if (harq->parsed()) {
            txdiv::HarqConfig cfg;
            cfg.snr_db = harq_snr;
            cfg.static_channel = channel_mode == "static";
            const txdiv::HarqRoundStats st = txdiv::run_harq_sessions(cfg, sessions, harq_seed);
            FILE* f = std::fopen(harq_out.c_str(), "w");
            if (!f) throw std::runtime_error("cannot open " + harq_out);
            std::fprintf(f, "round,sessions,symbol_errors,ser,frame_errors,fer,throughput\n");
            for (int r = 0; r < 3; ++r) {
                const double ser = static_cast<double>(st.symbol_errors_after_round[r]) / (4.0 * st.sessions);
                const double fer = static_cast<double>(st.frame_errors_after_round[r]) / st.sessions;
                std::fprintf(f, "%d,%ld,%ld,%.6g,%ld,%.6g,%.3g\n", r + 1, st.sessions,
                             st.symbol_errors_after_round[r], ser, st.frame_errors_after_round[r], fer,
                             st.throughput[r]);
                std::printf("round %d: ser %.4g fer %.4g throughput %.3g sym/use\n", r + 1, ser, fer,
                            st.throughput[r]);
            }
            std::fclose(f);
        } else if (self->parsed()) {
            return txdiv::run_selftests(stdout) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
