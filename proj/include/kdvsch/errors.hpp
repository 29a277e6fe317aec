#ifndef KDVSCH_ERRORS_HPP
#define KDVSCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kdvsch {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Spectral truncation discarded more mass than the configured tolerance.
struct TruncationLoss : Error {
    double tail_mass;
    TruncationLoss(double tail, const std::string& what)
        : Error(what), tail_mass(tail) {}
};

// Flow map lost orientation (some P'(x_j) <= 0).
struct NonDiffeo : Error {
    using Error::Error;
};

// flow_period requested for a field that attains values <= 0.
struct NotPositive : Error {
    using Error::Error;
};

// Phase target not representable in span(Q) within tolerance.
struct NotInSpan : Error {
    double residual;
    NotInSpan(double res, const std::string& what) : Error(what), residual(res) {}
};

// Certificate recursion exceeded the configured depth limit.
struct DepthBudget : Error {
    using Error::Error;
};

// Calibration ran out of iterations / time budget.
struct BudgetExceeded : Error {
    double best_error;
    BudgetExceeded(double best, const std::string& what)
        : Error(what), best_error(best) {}
};

// Dense oracle refused an over-large mode space.
struct CostGuard : Error {
    using Error::Error;
};

// Rate fit had too few usable points.
struct DegenerateFit : Error {
    using Error::Error;
};

// Bad configuration or malformed input file.
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace kdvsch

#endif
