#pragma once

#include "jmt/justification.hpp"
#include "jmt/smt.hpp"

#include <string>
#include <vector>

namespace jmt {

/* "tag:thread:Wr x@p" style names; RMW events use RmwRd / RmwWr. */
std::string accessVariable(const std::string &tag, const EventKey &k, bool writeSide);
std::string registerVariable(const std::string &tag, const Register &r);
Expr renameRegisters(const Expr &e, const std::string &tag);

/* Non-initializing writes only; the committed form chains to the target's variable. */
Expr encWrite(const SymbolicExecutionGraph &g, std::size_t e, const std::string &tag, bool committed);
Expr encRead(const SymbolicExecutionGraph &g, std::size_t e, const std::string &tag);
std::vector<Expr> encStage(const SymbolicExecutionGraph &g, EventSet committed, const std::string &tag);

/* The assertion over the target's registers; registers the target never assigns read as 0. */
std::vector<Expr> encAssertion(const SymbolicExecutionGraph &target, const Formula &phi);

/* phi[T] /\ EncStage(T, T.E) /\ EncStage(s_1) /\ ... with stage tags G1..Gn. */
smt::Query encJustification(const Pool &pool, const Justification &j, const Formula &phi);

/* Register values of the target under a model; unassigned registers are 0. */
Behavior decodeBehavior(const SymbolicExecutionGraph &target, const std::set<RegisterRef> &registers,
			const std::map<std::string, Value> &model);

} // namespace jmt
