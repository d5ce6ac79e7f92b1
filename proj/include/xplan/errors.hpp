#pragma once

#include <stdexcept>
#include <string>

namespace xplan {

// Base of every error raised by the library. Subclasses map onto distinct CLI
// exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class PlanningError : public Error {
public:
    using Error::Error;
};

class InferenceError : public Error {
public:
    using Error::Error;
};

// Evidence with zero marginal probability: the counterfactual was never
// explored by the search.
class ZeroProbabilityEvidence : public InferenceError {
public:
    using InferenceError::InferenceError;
};

// A counterfactual whose evidence the search never explored.
class UnexploredCounterfactual : public InferenceError {
public:
    using InferenceError::InferenceError;
};

class QueryError : public Error {
public:
    using Error::Error;
};

}  // namespace xplan
