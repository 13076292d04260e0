#pragma once

#include <cstdint>
#include <iosfwd>

namespace mdma {

struct SelftestReport {
  int passed = 0;
  int failed = 0;
  bool ok() const { return failed == 0; }
};

/// Seeded property checks over random small instances, one PASS/FAIL line per suite.
SelftestReport run_selftest(std::ostream& os, std::uint64_t seed, int instances = 20);

}  // namespace mdma
