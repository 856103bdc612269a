#include "jmt/encoding.hpp"

namespace jmt {

KeySet keysOf(const SymbolicExecutionGraph &g, EventSet s)
{
	KeySet out;
	s.forEach([&](std::size_t e) { out.insert(g.keys[e]); });
	return out;
}

EventSet eventsOf(const SymbolicExecutionGraph &g, const KeySet &keys)
{
	EventSet s;
	for (std::size_t e = 0; e < g.size(); e++)
		if (keys.count(g.keys[e]))
			s.insert(e);
	return s;
}

std::string accessVariable(const std::string &tag, const EventKey &k, bool writeSide)
{
	std::string kind;
	if (k.type == EventType::Rmw)
		kind = writeSide ? "RmwWr" : "RmwRd";
	else
		kind = writeSide ? "Wr" : "Rd";
	return tag + ":" + std::to_string(k.thread) + ":" + kind + " " + k.what + "@" + std::to_string(k.idx);
}

std::string registerVariable(const std::string &tag, const Register &r)
{
	return tag + ":" + r;
}

Expr renameRegisters(const Expr &e, const std::string &tag)
{
	return rename(e, [&](const std::string &r) { return registerVariable(tag, r); });
}

Expr encWrite(const SymbolicExecutionGraph &g, std::size_t e, const std::string &tag, bool committed)
{
	const EventKey &k = g.keys[e];
	Expr v = Expr::var(accessVariable(tag, k, true));
	Expr w = renameRegisters(g.events[e].label.writeExpr, tag);
	if (!committed)
		return Expr::eq(v, w);
	Expr t = Expr::var(accessVariable("T", k, true));
	return Expr::land(Expr::eq(v, w), Expr::eq(w, t));
}

Expr encRead(const SymbolicExecutionGraph &g, std::size_t e, const std::string &tag)
{
	return Expr::eq(Expr::var(accessVariable(tag, g.keys[e], false)),
			renameRegisters(g.events[e].label.readExpr, tag));
}

std::vector<Expr> encStage(const SymbolicExecutionGraph &g, EventSet committed, const std::string &tag)
{
	std::vector<Expr> out;
	for (std::size_t e = 0; e < g.size(); e++)
		if (g.events[e].label.isWrite() && !g.events[e].isInit())
			out.push_back(encWrite(g, e, tag, committed.contains(e)));
	for (std::size_t e = 0; e < g.size(); e++)
		if (g.events[e].label.isRead())
			out.push_back(encRead(g, e, tag));
	for (auto &c : g.gamma)
		out.push_back(renameRegisters(c, tag));
	return out;
}

std::vector<Expr> encAssertion(const SymbolicExecutionGraph &target, const Formula &phi)
{
	std::vector<Expr> out;
	out.push_back(renameRegisters(formulaToExpr(phi), "T"));
	for (auto &[t, r] : registersOf(phi))
		if (!target.definedRegisters.count(r))
			out.push_back(Expr::eq(Expr::var(registerVariable("T", r)), Expr::constant(0)));
	return out;
}

smt::Query encJustification(const Pool &pool, const Justification &j, const Formula &phi)
{
	const SymbolicExecutionGraph &T = pool[j.target];
	smt::Query q;
	q.comment = "justification of target " + std::to_string(j.target) + " with " + std::to_string(j.stages.size()) + " stages";
	q.assertions = encAssertion(T, phi);
	for (auto &a : encStage(T, EventSet::full(T.size()), "T"))
		q.assertions.push_back(std::move(a));
	for (std::size_t i = 0; i < j.stages.size(); i++) {
		const SymbolicExecutionGraph &g = pool[j.stages[i].graph];
		for (auto &a : encStage(g, eventsOf(g, j.stages[i].committed), "G" + std::to_string(i + 1)))
			q.assertions.push_back(std::move(a));
	}
	return q;
}

Behavior decodeBehavior(const SymbolicExecutionGraph &target, const std::set<RegisterRef> &registers,
			const std::map<std::string, Value> &model)
{
	Behavior b;
	for (auto &ref : registers) {
		Value v = 0;
		if (target.definedRegisters.count(ref.second)) {
			auto it = model.find(registerVariable("T", ref.second));
			if (it != model.end())
				v = it->second;
		}
		b[ref] = v;
	}
	return b;
}

} // namespace jmt
