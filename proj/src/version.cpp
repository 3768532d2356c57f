#include "vbs/version.hpp"

#include <cstdio>

#include "vbs/capacity_table.hpp"
#include "vbs/kernels.hpp"

namespace vbs {

std::string version_report() {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(capacity::table_hash()));
  std::string out = "vbs ";
  out += kVersion;
  out += "\ncapacity-table-hash: fnv1a64:";
  out += hash;
  out += "\nkernel-isa: ";
  out += kernels::isa_name(kernels::active_isa());
  out += "\n";
  return out;
}

}  // namespace vbs
