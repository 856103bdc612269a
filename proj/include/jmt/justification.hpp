#pragma once

#include "jmt/graph.hpp"

#include <set>
#include <vector>

namespace jmt {

using KeySet = std::set<EventKey>;

/* A stage pairs a candidate graph (index into the pool) with its committed events. */
struct JustificationStage {
	std::size_t graph = 0;
	KeySet committed;

	bool operator==(const JustificationStage &) const = default;
};

struct Justification {
	std::size_t target = 0;
	std::vector<JustificationStage> stages;
};

using Pool = std::vector<SymbolicExecutionGraph>;

KeySet keysOf(const SymbolicExecutionGraph &g, EventSet s);
EventSet eventsOf(const SymbolicExecutionGraph &g, const KeySet &keys);

} // namespace jmt
