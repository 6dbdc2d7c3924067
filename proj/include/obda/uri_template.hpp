#pragma once

#include "obda/value.hpp"

#include <string>
#include <vector>

namespace obda {

/// A URI/literal template: literal segments interleaved with attribute
/// placeholders, e.g. `:Wellbore-{wellbore_s}`.
///
/// Two templates are *compatible* (can produce colliding values) iff their
/// literal segments are identical and they have the same placeholder count;
/// joins between values of incompatible templates never match. A template
/// consisting of exactly one bare placeholder passes the underlying value
/// through unchanged, so typed literals survive object maps.
class Template {
public:
    Template() = default;

    /// Parses `prefix{attr}infix{attr}...`; throws ParseError via caller
    /// context for empty or unbalanced specs.
    static Template parse(const std::string& spec);

    const std::vector<std::string>& literals() const { return literals_; } // size = placeholders + 1
    const std::vector<std::string>& placeholders() const { return placeholders_; }
    std::size_t arity() const { return placeholders_.size(); }

    /// Bare single placeholder with no literal text around it.
    bool isPassthrough() const;

    /// True when the two templates can generate a common value.
    bool compatibleWith(const Template& other) const;

    /// Identical spec including placeholder names.
    bool operator==(const Template& other) const {
        return literals_ == other.literals_ && placeholders_ == other.placeholders_;
    }
    bool operator!=(const Template& other) const { return !(*this == other); }
    bool operator<(const Template& other) const {
        if (literals_ != other.literals_) return literals_ < other.literals_;
        return placeholders_ < other.placeholders_;
    }

    /// Fills placeholders positionally. Passthrough templates return the
    /// value unchanged; otherwise the result is text. Null inputs yield null.
    Value fill(const std::vector<Value>& values) const;

    std::string toString() const;

    std::size_t structuralHash() const;

private:
    std::vector<std::string> literals_;
    std::vector<std::string> placeholders_;
};

} // namespace obda
