#pragma once

#include <stdexcept>
#include <string>

namespace slicemap {

/// Root of every exception thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value breaks a domain invariant (bad capacity, dominance violated, ...).
class validation_error : public error {
public:
    using error::error;
};

/// Input document does not follow the expected schema. `field()` names the path.
class parse_error : public error {
public:
    parse_error(std::string field, const std::string& what)
        : error(what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Shapes or indices that do not line up.
class structural_error : public error {
public:
    using error::error;
};

/// Load fraction reached or exceeded 100%.
class overload_error : public error {
public:
    using error::error;
};

/// Operation called outside its precondition (e.g. stepping a finished episode).
class contract_error : public error {
public:
    using error::error;
};

/// Instance too large for an exhaustive routine.
class size_error : public error {
public:
    using error::error;
};

/// Linear weights blew up during training.
class divergence_error : public error {
public:
    using error::error;
};

/// Scenario generation could not produce a feasible instance.
class generation_error : public error {
public:
    using error::error;
};

}  // namespace slicemap
