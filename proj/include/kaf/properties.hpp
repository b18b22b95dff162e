#pragma once
// The exact property suite: numeric checks of the criterion identities, the
// reduction chain, block-inverse correctness, the Lyapunov solver and the
// complexity formulas.  Shared by the `properties` CLI verb and the
// acceptance runner.

#include <cstdint>
#include <string>
#include <vector>

namespace kaf {

struct PropertyResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst observed deviation (0 for pure integer checks)
  std::string detail;
};

PropertyResult prop_identity_gamma0(std::uint64_t seed);       // 1
PropertyResult prop_bound(std::uint64_t seed);                 // 2
PropertyResult prop_decomposition(std::uint64_t seed);         // 3
PropertyResult prop_gcc_reduction(std::uint64_t seed);         // 4
PropertyResult prop_large_beta(std::uint64_t seed);            // 5
PropertyResult prop_fixed_point(std::uint64_t seed);           // 6
PropertyResult prop_reduction_chain(std::uint64_t seed);       // 7
PropertyResult prop_block_inverse(std::uint64_t seed);         // 8
PropertyResult prop_lyapunov(std::uint64_t seed);              // 9
PropertyResult prop_complexity_formulas();                     // 10

std::vector<PropertyResult> run_property_suite(std::uint64_t seed = 12345);

} // namespace kaf
