#pragma once

#include <stdexcept>
#include <string>

namespace cpsrisk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// model-core
struct NoSuchTransition : Error {
    using Error::Error;
};

// dynamics
struct NonFiniteState : Error {
    NonFiniteState(const std::string& what, double last_finite_time)
        : Error(what), last_finite_time(last_finite_time) {}
    double last_finite_time;
};

// hazard-analysis
struct UnreachableHazard : Error {
    using Error::Error;
};
struct UnmappedActuator : Error {
    using Error::Error;
};

// attack-calc
struct UnassignedVariable : Error {
    using Error::Error;
};
struct ExactEvalTooLarge : Error {
    using Error::Error;
};

// risk-engine
struct InvalidWeights : Error {
    using Error::Error;
};
struct LossExceedsMax : Error {
    using Error::Error;
};
struct AssumptionConflict : Error {
    using Error::Error;
};

// cli-io
struct ParseError : Error {
    ParseError(const std::string& what, int line) : Error(what), line(line) {}
    int line;
};
struct CrossRefError : Error {
    using Error::Error;
};
struct PipelineError : Error {
    PipelineError(const std::string& stage, const std::string& what)
        : Error(stage + ": " + what), stage(stage) {}
    std::string stage;
};

}  // namespace cpsrisk
