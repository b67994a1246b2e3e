#pragma once

namespace prsans::cli {

// Exit codes form a closed set: 0 success, 2 missing file, 3 config or
// schema violation (also the catch-all), 4 solver divergence, 5 failed
// certification. Never throws.
int run_cli(int argc, const char* const* argv);

}  // namespace prsans::cli
