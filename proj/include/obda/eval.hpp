#pragma once

#include "obda/relalg.hpp"
#include "obda/schema.hpp"

#include <string>
#include <vector>

namespace obda {

/// Evaluates an expression against an instance under set semantics.
/// Join compatibility treats null as incompatible. Pure: safe to call
/// concurrently on the same instance.
Relation evaluate(const RelExpr& expr, const Instance& inst);
inline Relation evaluate(const RelExprPtr& expr, const Instance& inst) { return evaluate(*expr, inst); }

/// True iff x functionally determines y in rel. Tuples with a null in
/// x or y are removed first, mirroring the not-null filters that mapping
/// queries carry on template attributes.
bool checkFd(const Relation& rel, const std::vector<std::string>& x, const std::vector<std::string>& y);

/// True iff every tuple of a, with attributes renamed by colMap (a-attr,
/// b-attr), occurs in b. colMap must be a bijection onto b's attributes.
bool checkContainment(const Relation& a, const Relation& b,
                      const std::vector<std::pair<std::string, std::string>>& colMap);

} // namespace obda
