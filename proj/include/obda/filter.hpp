#pragma once

#include "obda/value.hpp"

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace obda {

/// Three-valued filter over named attributes.
///
/// Atoms: isNull(attrs), attr = const, attr = attr, attr < const.
/// Connectives: not, and. Disjunction is derived via De Morgan, which is
/// exact in this logic.
class Filter {
public:
    enum class Kind { True, IsNull, EqConst, EqAttr, LtConst, Not, And };

    static Filter always() { return Filter(Kind::True); }
    static Filter isNull(std::vector<std::string> attrs);
    static Filter eq(std::string attr, Value v);
    static Filter eqAttr(std::string a, std::string b);
    static Filter lt(std::string attr, Value v);
    static Filter negate(Filter f);
    static Filter conj(std::vector<Filter> fs);
    static Filter disj(std::vector<Filter> fs); // ¬(¬a ∧ ¬b)

    /// notNull(a1..ak) = ¬isNull(a1) ∧ … ∧ ¬isNull(ak)
    static Filter notNull(const std::vector<std::string>& attrs);

    Kind kind() const { return kind_; }
    bool isTrue() const { return kind_ == Kind::True; }

    const std::vector<std::string>& attrs() const { return attrs_; }
    const Value& constant() const { return constant_; }
    const std::vector<Filter>& children() const { return children_; }

    /// Evaluate against a tuple; `pos` resolves attribute names to tuple
    /// positions and throws SchemaError for unknown names.
    Truth eval(const Tuple& t, const std::function<std::size_t(const std::string&)>& pos) const;

    /// All attribute names referenced anywhere in the filter.
    void collectAttrs(std::set<std::string>& out) const;

    /// Rewrites attribute names; used when passes re-qualify columns.
    Filter renamed(const std::function<std::string(const std::string&)>& f) const;

    bool structurallyEqual(const Filter& other) const;
    std::size_t structuralHash() const;

    std::string toString() const;

private:
    explicit Filter(Kind k) : kind_(k) {}

    Kind kind_ = Kind::True;
    std::vector<std::string> attrs_; // IsNull: the set; EqConst/LtConst: [attr]; EqAttr: [a, b]
    Value constant_;
    std::vector<Filter> children_;
};

} // namespace obda
