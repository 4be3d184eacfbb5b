#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dslab {

using Real = double;
using Complex = std::complex<double>;

inline constexpr Real pi = std::numbers::pi;
inline constexpr Complex I{0.0, 1.0};

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure mode named by a module contract gets its own
// type so callers (and the CLI) can report it by name.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define DSLAB_DEFINE_ERROR(Name)                                         \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name, what) {}   \
    };

DSLAB_DEFINE_ERROR(InvalidArgument)
DSLAB_DEFINE_ERROR(NonConvergence)
DSLAB_DEFINE_ERROR(OrderClash)
DSLAB_DEFINE_ERROR(ZeroPairing)
DSLAB_DEFINE_ERROR(QuadratureDivergence)
DSLAB_DEFINE_ERROR(GridTooCoarse)
DSLAB_DEFINE_ERROR(FrameFitFailure)
DSLAB_DEFINE_ERROR(CFLViolation)
DSLAB_DEFINE_ERROR(BlowUp)
DSLAB_DEFINE_ERROR(RankDeficient)
DSLAB_DEFINE_ERROR(ConfigError)

#undef DSLAB_DEFINE_ERROR

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace dslab
