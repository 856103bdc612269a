#pragma once

#include "jmt/graph.hpp"
#include "jmt/smt.hpp"

#include <vector>

namespace jmt {

/* Stage 1: one graph per control-flow path of a thread (po and constraints only). */
std::vector<SymbolicExecutionGraph> buildThreadGraphs(const Block &body, ThreadId thread);

/* Cartesian product of per-thread graphs, plus one initializer write per location. */
std::vector<SymbolicExecutionGraph> productWithInit(const LitmusTest &test,
						    const std::vector<std::vector<SymbolicExecutionGraph>> &perThread);

/* Stage 2: every read takes a same-location write; unsatisfiable constraint sets are dropped. */
std::vector<SymbolicExecutionGraph> enumerateRf(const SymbolicExecutionGraph &g, smt::SatOracle &oracle);

/* Stages 1 and 2 for a whole program. */
std::vector<SymbolicExecutionGraph> buildCandidateGraphs(const LitmusTest &test, smt::SatOracle &oracle);

} // namespace jmt
