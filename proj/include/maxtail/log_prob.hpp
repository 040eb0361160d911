#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace maxtail {

// Probability carried in log scale.  Tail quantities in this library fall far
// below the linear double range (or below the absolute accuracy of linear
// quadrature), so anything smaller than about exp(-700) is only meaningful
// through this type.  The linear view may be subnormal or zero; the log view
// keeps full relative precision.
class LogProb {
public:
    // lv must be <= 0 up to rounding slack; tiny positive values produced by
    // float cancellation are clamped to 0 (probability 1).
    static LogProb from_log(double lv) {
        if (std::isnan(lv))
            throw std::invalid_argument("LogProb::from_log: NaN log value");
        if (lv > 1e-9)
            throw std::invalid_argument("LogProb::from_log: log value above 0");
        return LogProb(lv > 0.0 ? 0.0 : lv);
    }

    // p = 0 maps to the -inf sentinel, never to an error.
    static LogProb from_linear(double p) {
        if (std::isnan(p) || p < 0.0 || p > 1.0)
            throw std::invalid_argument("LogProb::from_linear: probability outside [0,1]");
        return LogProb(p == 0.0 ? -std::numeric_limits<double>::infinity()
                                : std::log(p));
    }

    static LogProb zero() { return LogProb(-std::numeric_limits<double>::infinity()); }
    static LogProb one() { return LogProb(0.0); }

    double log() const { return log_value_; }
    // exp underflows to subnormal/0 below about exp(-745); round-trips within
    // 1e-12 relative while log() > -700.
    double linear() const { return std::exp(log_value_); }
    bool is_zero() const { return std::isinf(log_value_) && log_value_ < 0.0; }

    // product of probabilities
    LogProb operator*(LogProb o) const {
        if (is_zero() || o.is_zero()) return zero();
        return LogProb(log_value_ + o.log_value_);
    }

    friend bool operator<(LogProb a, LogProb b) { return a.log_value_ < b.log_value_; }
    friend bool operator==(LogProb a, LogProb b) { return a.log_value_ == b.log_value_; }

private:
    explicit LogProb(double lv) : log_value_(lv) {}
    double log_value_;
};

} // namespace maxtail
