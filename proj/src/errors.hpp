#pragma once

#include <stdexcept>
#include <string>

namespace coagscale {

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SearchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace coagscale
