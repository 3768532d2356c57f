#pragma once

#include <cstdint>
#include <string>

namespace vbs::capacity {

// Bundled transport-block capacity table: bits carried in one TTI for a given
// MCS index and PRB count. Monotone in both arguments and calibrated so that
// the top DL configuration (MCS 27, 50 PRBs) reaches 32 Mbps and the top UL
// configuration (MCS 23, 50 PRBs) reaches 23 Mbps at 1000 TTIs per second.
inline constexpr int kMaxMcs = 28;
inline constexpr int kPrbGrid = 50;

// Throws std::domain_error on out-of-range arguments.
long long bits_per_tti(int mcs, int prb_count);

// Highest MCS usable at a given channel quality (monotone 16-entry map).
int cqi_max_mcs(int cqi);

// The exact bytes of the bundled CSV (`mcs,prb_count,bits_per_tti`).
const std::string& table_csv();

// FNV-1a content hash of table_csv(); printed by the CLI `version` command.
std::uint64_t table_hash();

}  // namespace vbs::capacity
