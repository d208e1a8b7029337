#pragma once

#include <stdexcept>
#include <string>

namespace windnbm {

// Malformed or inconsistent input data (CSV files, datasets, matrices).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void warn(const std::string& message);

} // namespace windnbm
