#ifndef DSMOOTH_CLI_HPP
#define DSMOOTH_CLI_HPP

#include <iosfwd>

namespace dsmooth {

// Subcommands: solve, gen, eval, compare.
// solve exits 0 when converged, 2 when the oracle budget ran out, 1 on any error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}

#endif
