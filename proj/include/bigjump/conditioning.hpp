#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "bigjump/errors.hpp"

namespace bigjump {

// The event {S_n in (x, x + delta_len]}; delta_len may be infinite.
struct ConditioningEvent {
    double x = 0.0;
    double delta_len = std::numeric_limits<double>::infinity();

    ConditioningEvent() = default;
    ConditioningEvent(double x_, double delta_len_) : x(x_), delta_len(delta_len_) {
        if (!(delta_len > 0.0)) throw Error("ConditioningEvent: delta_len must be positive");
    }

    static ConditioningEvent above(double x_) { return {x_, std::numeric_limits<double>::infinity()}; }

    bool finite() const { return !std::isinf(delta_len); }
    double upper() const { return finite() ? x + delta_len : std::numeric_limits<double>::infinity(); }
    bool contains(double sum) const { return sum > x && (!finite() || sum <= x + delta_len); }

    std::string str() const {
        std::ostringstream os;
        if (finite())
            os << "(" << x << "," << x + delta_len << "]";
        else
            os << "(" << x << ",inf)";
        return os.str();
    }
};

}  // namespace bigjump
