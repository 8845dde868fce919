#pragma once

#include <stdexcept>
#include <string>

namespace absc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

class UnboundedError : public Error {
public:
    using Error::Error;
};

/// 0 is not strictly inside the implementable abstract control set.
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

class NumericFault : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

}  // namespace absc
