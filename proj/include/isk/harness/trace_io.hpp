#pragma once

#include <string>
#include <vector>

#include "isk/harness/evaluate.hpp"

namespace isk::harness {

// Writes recorded episodes under `out_dir`:
//   episode_<e>.jsonl            one line per asked question
//   episode_<e>_step_<t>_canvas.pgm   pixels revealed before the question
//   episode_<e>_step_<t>_fx[_c<k>].pgm reconstruction belief at ask time
//   episode_<e>_step_<t>_policy.pgm   per-block question heat (asked = 0)
// Images are emitted for pixel tasks only. The JSONL line count equals the
// episode length, and repeated emission of the same episodes is
// byte-identical.
void write_trace(const std::string& out_dir, const worlds::Environment& env,
                 const std::vector<EvalEpisode>& episodes);

}  // namespace isk::harness
