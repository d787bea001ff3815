#pragma once

#include <stdexcept>
#include <string>

namespace bnlab {

// Error taxonomy:
//   domain_error   - arguments outside an operation's documented domain
//   config_error   - inconsistent run setup (grids, caps, file layout); the
//                    message names the offending parameter and a viable fix
//   numeric_error  - an iteration or quadrature failed to converge; carries
//                    the residual achieved
//   internal_error - an invariant the library itself guarantees was violated;
//                    always a bug, never a user error
//   parse_error    - malformed input file, carries the 1-based line number

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct internal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
    int line;
    parse_error(const std::string& msg, int line_number)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + msg),
          line(line_number) {}
};

}  // namespace bnlab
