// Decoding-chain oracle suites, runnable from the CLI (`txdivsim selftest`)
// and from the acceptance tests: Gram block-diagonality, symbolwise vs
// exhaustive MLD, exact-LLR enumeration, whitening covariance, Table-1
// hypothesis counters, and the toy-block codec oracle.
#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace txdiv {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// (a) Gram block-diagonality over 1000 random channels (< 1e-10 off-block)
// (b) symbolwise MLD == exhaustive joint MLD on 1000 noisy instances
// (c) exact LLR == brute-force posterior enumeration to 1e-9
// (d) post-whitening noise covariance == I +- 0.02 over 1e5 trials
std::vector<CheckResult> decoding_chain_checks(std::uint64_t seed = 20240601ULL);

// Table 1 hypothesis counters for QPSK and 16QAM.
std::vector<CheckResult> counter_checks();

// 8-bit toy blocks: Max-Log-MAP hard output equals exhaustive ML over all
// codewords in >= 99% of 1000 trials at Es/N0 = 4 dB; noiseless decoding is
// always error-free.
std::vector<CheckResult> codec_checks(std::uint64_t seed = 20240602ULL);

// Runs every suite, printing one line per check. Returns true when all pass.
bool run_selftests(std::FILE* out);

}  // namespace txdiv
