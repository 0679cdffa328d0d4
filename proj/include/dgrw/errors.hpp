#pragma once

#include <stdexcept>

namespace dgrw {

// File and stream failures. Everything else that is std::runtime_error
// signals a numerical guard tripping (lost mass, failed residual, ...);
// std::invalid_argument / std::domain_error signal bad configuration.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dgrw
