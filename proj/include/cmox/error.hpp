#pragma once

#include <stdexcept>
#include <string>

namespace cmox {

/// Base class for every error raised by the library. Data and contract
/// violations surface as this type so front ends can map them to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cmox
