#pragma once

#include "jmt/justification.hpp"
#include "jmt/smt.hpp"

#include <optional>

namespace jmt {

bool isWellBehaved(const SymbolicExecutionGraph &g);

/* Conditions 1-3 and 5-7 for stage (g, ci) after committed set cprev, against target t. */
bool ok(const SymbolicExecutionGraph &t, const SymbolicExecutionGraph &g, const KeySet &ci, const KeySet &cprev);

/* Stages committing 1..bound further target events (bound 0: no limit). */
std::vector<JustificationStage> genSuccessors(const Pool &pool, std::size_t target, const JustificationStage &current,
					      std::size_t bound);

/* Sync edges that become part of a committed prefix must persist in later stages and the target. */
bool checkCondition8(const Pool &pool, const Justification &j);

struct SearchConfig {
	std::size_t commitBound = 0;       /* 0: the whole frontier */
	std::size_t maxStages = 0;         /* 0: one stage per target event plus one */
	std::size_t nodeBudget = 2000000;
	int smtTimeoutMs = -1;
};

enum class SearchStatus { Found, NotFound, BudgetExhausted };
const char *toString(SearchStatus s);

struct SearchResult {
	SearchStatus status = SearchStatus::NotFound;
	std::optional<Justification> justification;
	std::map<std::string, Value> model;
	std::size_t nodes = 0;
};

/*
 * Searches for a justification of pool[target] whose SMT encoding together
 * with phi is satisfiable. Shorter justifications are found first.
 */
SearchResult findJustification(const Pool &pool, std::size_t target, const Formula &phi, smt::Backend &smt,
			       const SearchConfig &cfg = {});

} // namespace jmt
