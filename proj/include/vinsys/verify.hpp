#pragma once

// Randomized property suites tying independent implementations of the same
// mathematical object against each other: translation identities for the
// shift profiles, two routes to elementary symmetric functions, dual
// polynomial-difference evaluation, structural facts about solutions with a
// single nonzero shift, exhaustiveness of the arc dissection, the closed
// kernel sum, and a recorded (never failing) scan of the restricted-moment
// conjecture at desk scale.

#include <string>
#include <vector>

#include "vinsys/core.hpp"

namespace vinsys::verify {

struct SuiteReport {
  std::string suite;
  long trials = 0;    // property instances actually examined
  long failures = 0;  // proved-identity violations (0 on a correct build)
  std::string detail;
  bool passed() const { return failures == 0; }
};

// Names accepted by run_suite, in canonical order.
std::vector<std::string> suite_names();

// Runs one named suite. `trials` scales the random instance count where
// meaningful (structure-driven suites may examine a different number and
// report what they used). Deterministic for a fixed seed. Unknown names
// throw invalid_error.
SuiteReport run_suite(const std::string& name, long trials,
                      std::uint64_t seed, const Budget& budget, int threads);

// Runs every suite with the same parameters.
std::vector<SuiteReport> run_all_suites(long trials, std::uint64_t seed,
                                        const Budget& budget, int threads);

}  // namespace vinsys::verify
