#include "obda/loader.hpp"

#include "obda/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace obda {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> splitTrim(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

// Parses "name(a, b, c)".
std::pair<std::string, std::vector<std::string>> parseRelAttrs(const std::string& s, const std::string& source,
                                                               unsigned line) {
    auto open = s.find('(');
    auto close = s.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ParseError(source, line, 1, "expected name(attr, ...) but got '" + s + "'");
    std::string name = trim(s.substr(0, open));
    auto attrs = splitTrim(s.substr(open + 1, close - open - 1), ',');
    return {name, attrs};
}

} // namespace

std::shared_ptr<Schema> parseSchemaText(const std::string& text, const std::string& source) {
    auto schema = std::make_shared<Schema>();
    std::istringstream in(text);
    std::string raw;
    unsigned lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::string line = trim(raw);
        if (line.empty()) continue;

        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        std::string rest = trim(line.substr(keyword.size()));

        if (keyword == "relation") {
            auto colon = rest.find(':');
            if (colon == std::string::npos) throw ParseError(source, lineNo, 1, "expected 'relation name : attrs'");
            std::string name = trim(rest.substr(0, colon));
            std::vector<std::string> attrs;
            std::vector<ValueType> types;
            std::vector<std::string> notNull;
            for (const auto& part : splitTrim(rest.substr(colon + 1), ',')) {
                std::istringstream ps(part);
                std::string attr, type;
                ps >> attr >> type;
                if (attr.empty() || type.empty())
                    throw ParseError(source, lineNo, 1, "expected 'attr type' but got '" + part + "'");
                if (type.back() == '!') { // trailing '!' marks a not-null column
                    type.pop_back();
                    notNull.push_back(attr);
                }
                attrs.push_back(attr);
                types.push_back(parseValueType(type));
            }
            schema->addRelation(name, std::move(attrs), std::move(types));
            for (const auto& a : notNull) schema->addNotNull(name, a);
        } else if (keyword == "key" || keyword == "unique") {
            auto colon = rest.find(':');
            if (colon == std::string::npos)
                throw ParseError(source, lineNo, 1, "expected '" + keyword + " relation : attrs'");
            std::string name = trim(rest.substr(0, colon));
            auto attrs = splitTrim(rest.substr(colon + 1), ',');
            if (keyword == "key")
                schema->addPrimaryKey(name, std::move(attrs));
            else
                schema->addUnique(name, std::move(attrs));
        } else if (keyword == "include") {
            auto inPos = rest.find(" in ");
            if (inPos == std::string::npos)
                throw ParseError(source, lineNo, 1, "expected 'include a(x) in b(y)'");
            auto [from, fromAttrs] = parseRelAttrs(trim(rest.substr(0, inPos)), source, lineNo);
            auto [to, toAttrs] = parseRelAttrs(trim(rest.substr(inPos + 4)), source, lineNo);
            schema->addInclusion({from, fromAttrs, to, toAttrs});
        } else {
            throw ParseError(source, lineNo, 1, "unknown schema directive '" + keyword + "'");
        }
    }
    schema->validate();
    return schema;
}

std::string readFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::shared_ptr<Schema> loadSchemaFile(const std::filesystem::path& path) {
    return parseSchemaText(readFile(path), path.string());
}

namespace {

// One CSV record per call; handles quoted fields and embedded newlines.
bool readCsvRecord(const std::string& text, std::size_t& pos, std::vector<std::string>& fields,
                   std::vector<bool>& quoted) {
    fields.clear();
    quoted.clear();
    if (pos >= text.size()) return false;
    std::string cur;
    bool curQuoted = false;
    bool inQuotes = false;
    while (pos < text.size()) {
        char c = text[pos];
        if (inQuotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    cur.push_back('"');
                    pos += 2;
                } else {
                    inQuotes = false;
                    ++pos;
                }
            } else {
                cur.push_back(c);
                ++pos;
            }
        } else if (c == '"' && cur.empty()) {
            inQuotes = true;
            curQuoted = true;
            ++pos;
        } else if (c == ',') {
            fields.push_back(cur);
            quoted.push_back(curQuoted);
            cur.clear();
            curQuoted = false;
            ++pos;
        } else if (c == '\n' || c == '\r') {
            while (pos < text.size() && (text[pos] == '\r' || text[pos] == '\n')) {
                if (text[pos] == '\n') {
                    ++pos;
                    break;
                }
                ++pos;
            }
            break;
        } else {
            cur.push_back(c);
            ++pos;
        }
    }
    fields.push_back(cur);
    quoted.push_back(curQuoted);
    return true;
}

} // namespace

Relation parseCsvText(const Schema& schema, const std::string& relName, const std::string& text,
                      const std::string& source) {
    const auto& def = schema.relation(relName);
    std::size_t pos = 0;
    std::vector<std::string> fields;
    std::vector<bool> quoted;
    if (!readCsvRecord(text, pos, fields, quoted)) throw ParseError(source, 1, 1, "missing CSV header");

    std::vector<std::size_t> schemaIdx; // column -> schema attr index
    for (const auto& h : fields) {
        std::string name = trim(h);
        if (!def.hasAttr(name))
            throw ParseError(source, 1, 1, "CSV header '" + name + "' is not an attribute of '" + relName + "'");
        schemaIdx.push_back(def.indexOf(name));
    }
    if (schemaIdx.size() != def.attrs.size())
        throw ParseError(source, 1, 1, "CSV header does not cover all attributes of '" + relName + "'");

    Relation rel(def.attrs);
    unsigned lineNo = 1;
    while (readCsvRecord(text, pos, fields, quoted)) {
        ++lineNo;
        if (fields.size() == 1 && fields[0].empty() && !quoted[0]) continue; // blank line
        if (fields.size() != schemaIdx.size())
            throw ParseError(source, lineNo, 1, "expected " + std::to_string(schemaIdx.size()) + " fields, got " +
                                                    std::to_string(fields.size()));
        Tuple row(def.attrs.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            std::size_t si = schemaIdx[i];
            const std::string& f = fields[i];
            if (f.empty() && !quoted[i]) {
                row[si] = Value::null();
            } else if (def.types[si] == ValueType::Int) {
                try {
                    std::size_t used = 0;
                    long long v = std::stoll(f, &used);
                    if (used != f.size()) throw std::invalid_argument(f);
                    row[si] = Value::integer(v);
                } catch (const std::exception&) {
                    throw ParseError(source, lineNo, 1, "invalid integer '" + f + "' in column '" + def.attrs[si] + "'");
                }
            } else {
                row[si] = Value::text(f);
            }
        }
        rel.rows.insert(std::move(row));
    }
    return rel;
}

Instance loadInstanceDir(std::shared_ptr<const Schema> schema, const std::filesystem::path& dir) {
    Instance inst(schema);
    for (const auto& [name, def] : schema->relations) {
        auto path = dir / (name + ".csv");
        if (std::filesystem::exists(path))
            inst.setRelation(name, parseCsvText(*schema, name, readFile(path), path.string()));
        else
            inst.setRelation(name, Relation(def.attrs));
    }
    return inst;
}

} // namespace obda
