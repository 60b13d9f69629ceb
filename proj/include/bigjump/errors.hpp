#pragma once

#include <stdexcept>
#include <string>

namespace bigjump {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// dist_catalog
struct DeltaBelowSpan : Error {
    explicit DeltaBelowSpan(const std::string& m) : Error(m) {}
};
struct NoFiniteQuantile : Error {
    explicit NoFiniteQuantile(const std::string& m) : Error(m) {}
};
struct NoMdaClass : Error {
    explicit NoMdaClass(const std::string& m) : Error(m) {}
};

// order/swap
struct EmptyVector : Error {
    explicit EmptyVector(const std::string& m) : Error(m) {}
};
struct IndexOutOfRange : Error {
    explicit IndexOutOfRange(const std::string& m) : Error(m) {}
};

// samplers
struct ZeroMassEvent : Error {
    explicit ZeroMassEvent(const std::string& m) : Error(m) {}
};
struct AttemptBudgetExhausted : Error {
    explicit AttemptBudgetExhausted(const std::string& m) : Error(m) {}
};
struct ZeroNormalizer : Error {
    explicit ZeroNormalizer(const std::string& m) : Error(m) {}
};

// exact lattice
struct SupportCapExceeded : Error {
    explicit SupportCapExceeded(const std::string& m) : Error(m) {}
};
struct EnumerationBudgetExceeded : Error {
    explicit EnumerationBudgetExceeded(const std::string& m) : Error(m) {}
};

// tv analysis
struct ValidityWindowViolated : Error {
    explicit ValidityWindowViolated(const std::string& m) : Error(m) {}
};

// thresholds / regimes
struct UserGridRequired : Error {
    explicit UserGridRequired(const std::string& m) : Error(m) {}
};
struct AmbiguousScale : Error {
    explicit AmbiguousScale(const std::string& m) : Error(m) {}
};

// stats
struct EmptySample : Error {
    explicit EmptySample(const std::string& m) : Error(m) {}
};

// config / CLI
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(m) {}
};

}  // namespace bigjump
