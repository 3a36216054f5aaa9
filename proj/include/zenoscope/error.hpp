// error.hpp — exception types shared by all modules
#pragma once

#include <stdexcept>
#include <string>

namespace zenoscope {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameters : Error {
    using Error::Error;
};

struct IntegrationError : Error {
    double estimate = 0.0;
    IntegrationError(const std::string& what, double est) : Error(what), estimate(est) {}
};

struct DivergenceError : Error {
    using Error::Error;
};

struct NoCrossingError : Error {
    double f_lo = 0.0, f_hi = 0.0;
    NoCrossingError(const std::string& what, double lo, double hi) : Error(what), f_lo(lo), f_hi(hi) {}
};

struct TruncationError : Error {
    double leakage = 0.0;
    TruncationError(const std::string& what, double leak) : Error(what), leakage(leak) {}
};

} // namespace zenoscope
