#pragma once

#include <stdexcept>
#include <string>

namespace explab {

// Base class for every failure raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value lies outside the domain it must belong to.
class domain_error : public error {
public:
    using error::error;
};

// A caller-supplied argument violates a documented precondition.
class argument_error : public error {
public:
    using error::error;
};

// The requested operation is not defined for this hypothesis class.
class unsupported_class_error : public error {
public:
    using error::error;
};

// An enumeration would exceed its configured size limit.
class resource_error : public error {
public:
    using error::error;
};

class numerical_error : public error {
public:
    using error::error;
};

// A structural invariant failed; indicates a bug or an unsupported input.
class internal_error : public error {
public:
    using error::error;
};

// A modelling assumption required by the requested quantity does not hold.
class assumption_violation : public error {
public:
    using error::error;
};

}  // namespace explab
