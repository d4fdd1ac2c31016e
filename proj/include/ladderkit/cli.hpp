#pragma once

#include <iosfwd>

namespace ladderkit::cli {

/// Entry point of the `ladderkit` executable. Returns the process exit code.
int run(int argc, char** argv);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ladderkit::cli
