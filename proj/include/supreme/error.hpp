#pragma once

#include <stdexcept>

namespace supreme {

// Invalid configuration, malformed file or violated precondition.
// The CLI maps this to exit code 2; any other exception maps to 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace supreme
