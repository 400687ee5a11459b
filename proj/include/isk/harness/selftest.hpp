#pragma once

#include <ostream>

namespace isk::harness {

// Fast internal diagnostics: finite-difference gradient agreement for both
// network architectures, advantage-estimator identities, and a scalar
// recomputation of every loss term on a live minibatch. Prints one
// ok/FAIL line per check and returns true when all pass. Runs in well
// under two minutes on a single core.
bool selftest(std::ostream& os);

}  // namespace isk::harness
