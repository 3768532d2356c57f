#include "vbs/capacity_table.hpp"

#include <array>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "vbs/hash.hpp"

#include "capacity_table_data.inc"

namespace vbs::capacity {

namespace {

struct Table {
  // bits[mcs * (kPrbGrid + 1) + prb]
  std::vector<long long> bits;

  Table() {
    bits.assign((kMaxMcs + 1) * (kPrbGrid + 1), -1);
    std::istringstream in(table_csv());
    std::string line;
    std::getline(in, line);  // header
    if (line != "mcs,prb_count,bits_per_tti")
      throw std::runtime_error("capacity table: unexpected header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      int mcs = 0, prb = 0;
      long long b = 0;
      char c1 = 0, c2 = 0;
      std::istringstream row(line);
      row >> mcs >> c1 >> prb >> c2 >> b;
      if (!row || c1 != ',' || c2 != ',')
        throw std::runtime_error("capacity table: bad row: " + line);
      bits[mcs * (kPrbGrid + 1) + prb] = b;
    }
    for (long long b : bits)
      if (b < 0) throw std::runtime_error("capacity table: missing entries");
  }
};

const Table& table() {
  static const Table t;
  return t;
}

// CQI -> highest usable MCS. Monotone; CQI 15 unlocks the full range.
constexpr std::array<int, 16> kCqiCap = {0,  4,  6,  8,  9,  10, 11, 13,
                                         15, 17, 19, 21, 23, 25, 26, 28};

}  // namespace

long long bits_per_tti(int mcs, int prb_count) {
  if (mcs < 0 || mcs > kMaxMcs)
    throw std::domain_error("mcs index out of range [0, 28]");
  if (prb_count < 0 || prb_count > kPrbGrid)
    throw std::domain_error("prb count out of range [0, 50]");
  return table().bits[mcs * (kPrbGrid + 1) + prb_count];
}

int cqi_max_mcs(int cqi) {
  if (cqi < 0 || cqi > 15) throw std::domain_error("cqi out of range [0, 15]");
  return kCqiCap[static_cast<std::size_t>(cqi)];
}

const std::string& table_csv() {
  static const std::string csv(kCapacityCsv);
  return csv;
}

std::uint64_t table_hash() {
  static const std::uint64_t h = fnv1a64(table_csv());
  return h;
}

}  // namespace vbs::capacity
