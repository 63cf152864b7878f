#pragma once

#include <stdexcept>
#include <string>

namespace cfspec {

// Bad input value (zero denominator, negative radicand, rational where an
// irrational is required, ...).  CLI maps these to exit code 2.
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A computation ran out of precision or exceeded a configured budget and the
// caller must refine or enlarge it.  CLI maps these to exit code 3.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// A verification step contradicted a property the constructed object is
// guaranteed to satisfy; signals a precision bug or a misuse of the
// construction and is never silently accepted.  CLI maps these to exit code 2.
class construction_error : public std::runtime_error {
public:
    explicit construction_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cfspec
