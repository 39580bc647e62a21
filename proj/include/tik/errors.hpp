#pragma once

#include <stdexcept>

namespace tik {

// Exhausted a configured memory/size budget (as opposed to invalid input);
// the CLI maps this to exit code 2.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tik
