#include "obda/filter.hpp"

#include "obda/diagnostics.hpp"

#include <sstream>

namespace obda {

Filter Filter::isNull(std::vector<std::string> attrs) {
    if (attrs.empty()) return always(); // isNull over no attributes is vacuously true
    Filter f(Kind::IsNull);
    f.attrs_ = std::move(attrs);
    return f;
}

Filter Filter::eq(std::string attr, Value v) {
    Filter f(Kind::EqConst);
    f.attrs_ = {std::move(attr)};
    f.constant_ = std::move(v);
    return f;
}

Filter Filter::eqAttr(std::string a, std::string b) {
    Filter f(Kind::EqAttr);
    f.attrs_ = {std::move(a), std::move(b)};
    return f;
}

Filter Filter::lt(std::string attr, Value v) {
    Filter f(Kind::LtConst);
    f.attrs_ = {std::move(attr)};
    f.constant_ = std::move(v);
    return f;
}

Filter Filter::negate(Filter f) {
    if (f.kind_ == Kind::Not) return f.children_[0];
    Filter r(Kind::Not);
    r.children_.push_back(std::move(f));
    return r;
}

Filter Filter::conj(std::vector<Filter> fs) {
    std::vector<Filter> flat;
    for (auto& f : fs) {
        if (f.kind_ == Kind::True) continue;
        if (f.kind_ == Kind::And) {
            for (auto& c : f.children_) flat.push_back(std::move(c));
        } else {
            flat.push_back(std::move(f));
        }
    }
    if (flat.empty()) return always();
    if (flat.size() == 1) return flat[0];
    Filter r(Kind::And);
    r.children_ = std::move(flat);
    return r;
}

Filter Filter::disj(std::vector<Filter> fs) {
    std::vector<Filter> negs;
    negs.reserve(fs.size());
    for (auto& f : fs) negs.push_back(negate(std::move(f)));
    return negate(conj(std::move(negs)));
}

Filter Filter::notNull(const std::vector<std::string>& attrs) {
    std::vector<Filter> parts;
    parts.reserve(attrs.size());
    for (const auto& a : attrs) parts.push_back(negate(isNull({a})));
    return conj(std::move(parts));
}

Truth Filter::eval(const Tuple& t, const std::function<std::size_t(const std::string&)>& pos) const {
    switch (kind_) {
        case Kind::True:
            return Truth::True;
        case Kind::IsNull:
            for (const auto& a : attrs_)
                if (!t[pos(a)].isNull()) return Truth::False;
            return Truth::True;
        case Kind::EqConst:
            return valueEq(t[pos(attrs_[0])], constant_);
        case Kind::EqAttr:
            return valueEq(t[pos(attrs_[0])], t[pos(attrs_[1])]);
        case Kind::LtConst:
            return valueLt(t[pos(attrs_[0])], constant_);
        case Kind::Not:
            return truthNot(children_[0].eval(t, pos));
        case Kind::And: {
            Truth acc = Truth::True;
            for (const auto& c : children_) {
                acc = truthAnd(acc, c.eval(t, pos));
                if (acc == Truth::False) return Truth::False;
            }
            return acc;
        }
    }
    return Truth::Unknown;
}

void Filter::collectAttrs(std::set<std::string>& out) const {
    out.insert(attrs_.begin(), attrs_.end());
    for (const auto& c : children_) c.collectAttrs(out);
}

Filter Filter::renamed(const std::function<std::string(const std::string&)>& f) const {
    Filter r(kind_);
    r.constant_ = constant_;
    for (const auto& a : attrs_) r.attrs_.push_back(f(a));
    for (const auto& c : children_) r.children_.push_back(c.renamed(f));
    return r;
}

bool Filter::structurallyEqual(const Filter& other) const {
    if (kind_ != other.kind_ || attrs_ != other.attrs_ || !(constant_ == other.constant_)) return false;
    if (children_.size() != other.children_.size()) return false;
    for (std::size_t i = 0; i < children_.size(); ++i)
        if (!children_[i].structurallyEqual(other.children_[i])) return false;
    return true;
}

std::size_t Filter::structuralHash() const {
    std::size_t h = static_cast<std::size_t>(kind_) * 1099511628211ull;
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b9 + (h << 6) + (h >> 2); };
    for (const auto& a : attrs_) mix(std::hash<std::string>{}(a));
    mix(std::hash<std::string>{}(constant_.isNull() ? "\x01" : constant_.display()));
    for (const auto& c : children_) mix(c.structuralHash());
    return h;
}

std::string Filter::toString() const {
    std::ostringstream out;
    switch (kind_) {
        case Kind::True:
            out << "true";
            break;
        case Kind::IsNull: {
            out << "isNull(";
            for (std::size_t i = 0; i < attrs_.size(); ++i) out << (i ? "," : "") << attrs_[i];
            out << ")";
            break;
        }
        case Kind::EqConst:
            out << attrs_[0] << " = " << (constant_.isText() ? "'" + constant_.asText() + "'" : constant_.display());
            break;
        case Kind::EqAttr:
            out << attrs_[0] << " = " << attrs_[1];
            break;
        case Kind::LtConst:
            out << attrs_[0] << " < " << (constant_.isText() ? "'" + constant_.asText() + "'" : constant_.display());
            break;
        case Kind::Not:
            out << "not(" << children_[0].toString() << ")";
            break;
        case Kind::And: {
            for (std::size_t i = 0; i < children_.size(); ++i) out << (i ? " and " : "") << children_[i].toString();
            break;
        }
    }
    return out.str();
}

} // namespace obda
