#pragma once

#include <stdexcept>
#include <string>

namespace sgi {

enum class ErrorCode {
    invalid_spec,     // bad configuration or parameter set
    no_event,         // a field threshold is never reached by the trajectory
    no_closure,       // tau5 bracket or dv zero crossing not found
    forbidden_region, // a sampled position entered the low-field window
    stage_overlap,    // switching windows collide, no uniform stage remains
    stiffness,        // integrator step-size underflow
    io,               // file or format problem
};

class SimError : public std::runtime_error {
public:
    SimError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw SimError(code, what);
}

} // namespace sgi
