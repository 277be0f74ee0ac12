#pragma once
// Error taxonomy. Every failure mode that callers are expected to branch on
// gets its own type; all derive from lme::Error so batch drivers can catch
// one base and map it to an exit code.

#include <stdexcept>
#include <string>

namespace lme {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// payoffs
struct NonConcave : Error { using Error::Error; };
struct DegenerateTerminal : Error { using Error::Error; };

// learning
struct ZeroSignalResponse : Error { using Error::Error; };

// fields
struct ChiSaturated : Error { using Error::Error; };
struct DenominatorDegenerate : Error { using Error::Error; };
struct SingularMatching : Error {
    double condition_number;
    explicit SingularMatching(const std::string& what, double cond)
        : Error(what), condition_number(cond) {}
};
struct NoStaticEquilibrium : Error {
    double residual;
    explicit NoStaticEquilibrium(const std::string& what, double res)
        : Error(what), residual(res) {}
};

// odeint
struct NonFiniteDerivative : Error { using Error::Error; };

// solver_shooting
struct NoBracket : Error { using Error::Error; };
struct BlowUp : Error {
    double probe;
    explicit BlowUp(const std::string& what, double probe_value)
        : Error(what), probe(probe_value) {}
};

// solver_fixedpoint
struct IvpBlowUp : Error {
    double time;
    explicit IvpBlowUp(const std::string& what, double t)
        : Error(what), time(t) {}
};
struct NoConvergence : Error {
    double best_residual;
    explicit NoConvergence(const std::string& what, double res)
        : Error(what), best_residual(res) {}
};

// assemble
struct AlphaVanishes : Error {
    double time;
    explicit AlphaVanishes(const std::string& what, double t)
        : Error(what), time(t) {}
};

// simulate
struct GridMismatch : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };

}  // namespace lme
