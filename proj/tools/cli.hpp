#pragma once

#include <iosfwd>

namespace dissipcert::cli {

// Parse argv and run one subcommand, writing the JSON report to `out` and
// diagnostics to `err`.  Returns the process exit code:
//   0  success (analysis verdicts, including negative ones, are report data)
//   1  --expect-stable was set and the verdict is unstable/unbounded
//      (for `falsify`: a destabilizing environment member was found)
//   2  input errors: bad flags, malformed or missing files, dimension
//      mismatches, ill-formed parameter boxes
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace dissipcert::cli
