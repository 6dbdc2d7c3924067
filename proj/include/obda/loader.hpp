#pragma once

#include "obda/schema.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace obda {

/// Parses the declarative schema format:
///
///   relation wellbore : wellbore_s int, year int, r_existence_kd_nm text
///   key tab1 : unique2
///   unique tab1 : unique1
///   include prod_wellbore(wellbore_s) in wellbore(wellbore_s)
///
/// '#' starts a comment. Throws ParseError / SchemaError.
std::shared_ptr<Schema> parseSchemaText(const std::string& text, const std::string& source = "<schema>");
std::shared_ptr<Schema> loadSchemaFile(const std::filesystem::path& path);

/// Parses one CSV document into a relation of the named schema relation.
/// First row is the header; fields are reordered to schema order. An empty
/// field is null. Quoted fields with "" escapes are supported.
Relation parseCsvText(const Schema& schema, const std::string& relName, const std::string& text,
                      const std::string& source = "<csv>");

/// Loads `<dir>/<rel>.csv` for every schema relation; missing files load
/// as empty relations.
Instance loadInstanceDir(std::shared_ptr<const Schema> schema, const std::filesystem::path& dir);

std::string readFile(const std::filesystem::path& path);

} // namespace obda
