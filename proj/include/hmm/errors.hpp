#ifndef HMM_ERRORS_HPP
#define HMM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hmm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mesh construction / validation
struct NonManifoldFace : Error { using Error::Error; };
struct DegenerateCell : Error { using Error::Error; };
struct InconsistentOrientation : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct UnsupportedLevel : Error { using Error::Error; };

// Mesh file I/O; carries the 1-based line number of the offending line.
struct ParseError : Error {
    int line;
    ParseError(const std::string& msg, int line_no)
        : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// Models
struct InvalidLambda : Error { using Error::Error; };

// Solver
struct DimensionMismatch : Error { using Error::Error; };
struct PicardDiverged : Error {
    int step;
    PicardDiverged(const std::string& msg, int step_index)
        : Error(msg), step(step_index) {}
};
struct LinearSolveFailed : Error { using Error::Error; };

// Metrics
struct EigSolveFailed : Error { using Error::Error; };
struct NonPositiveError : Error { using Error::Error; };

} // namespace hmm

#endif
