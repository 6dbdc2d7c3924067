#include "obda/uri_template.hpp"

#include "obda/diagnostics.hpp"

namespace obda {

Template Template::parse(const std::string& spec) {
    Template t;
    std::string literal;
    for (std::size_t i = 0; i < spec.size();) {
        char c = spec[i];
        if (c == '{') {
            auto close = spec.find('}', i + 1);
            if (close == std::string::npos) throw Error("unbalanced '{' in template '" + spec + "'");
            std::string name = spec.substr(i + 1, close - i - 1);
            if (name.empty()) throw Error("empty placeholder in template '" + spec + "'");
            t.literals_.push_back(literal);
            t.placeholders_.push_back(name);
            literal.clear();
            i = close + 1;
        } else if (c == '}') {
            throw Error("unbalanced '}' in template '" + spec + "'");
        } else {
            literal.push_back(c);
            ++i;
        }
    }
    t.literals_.push_back(literal);
    if (t.placeholders_.empty() && t.literals_[0].empty())
        throw Error("template must have a literal segment or a placeholder");
    return t;
}

bool Template::isPassthrough() const {
    return placeholders_.size() == 1 && literals_[0].empty() && literals_[1].empty();
}

bool Template::compatibleWith(const Template& other) const {
    return literals_ == other.literals_ && placeholders_.size() == other.placeholders_.size();
}

Value Template::fill(const std::vector<Value>& values) const {
    if (values.size() != placeholders_.size()) throw Error("template arity mismatch in fill");
    for (const auto& v : values)
        if (v.isNull()) return Value::null();
    if (isPassthrough()) return values[0];
    std::string out = literals_[0];
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += values[i].display();
        out += literals_[i + 1];
    }
    return Value::text(std::move(out));
}

std::string Template::toString() const {
    std::string out = literals_[0];
    for (std::size_t i = 0; i < placeholders_.size(); ++i) {
        out += "{" + placeholders_[i] + "}";
        out += literals_[i + 1];
    }
    return out;
}

std::size_t Template::structuralHash() const {
    std::size_t h = 14695981039346656037ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
    };
    for (const auto& l : literals_) mix(l);
    for (const auto& p : placeholders_) mix(p);
    return h;
}

} // namespace obda
