#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace gmwb {

// Thrown when a numerical procedure cannot reach its tolerance; carries the
// error estimate actually achieved.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error " + std::to_string(achieved) + ")"),
          achieved_error(achieved) {}
    double achieved_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace detail

} // namespace gmwb
