#include "jmt/graph_builder.hpp"

namespace jmt {

namespace {

struct PathState {
	std::vector<EventLabel> events;
	std::vector<Expr> gamma;
	std::set<Register> defined;
};

using Frame = std::pair<const Block *, std::size_t>;

void explore(std::vector<Frame> stack, PathState st, std::vector<PathState> &out)
{
	while (!stack.empty()) {
		auto &[block, i] = stack.back();
		if (i == block->size()) {
			stack.pop_back();
			continue;
		}
		const Instruction &ins = (*block)[i++];
		switch (ins.kind) {
		case Instruction::Kind::Assign:
			st.gamma.push_back(Expr::eq(Expr::var(ins.reg), ins.expr));
			st.defined.insert(ins.reg);
			break;
		case Instruction::Kind::Store: {
			EventLabel l;
			l.type = EventType::Write;
			l.loc = ins.loc;
			l.wm = ins.wm;
			l.writeExpr = ins.expr;
			st.events.push_back(l);
			break;
		}
		case Instruction::Kind::Load: {
			EventLabel l;
			l.type = EventType::Read;
			l.loc = ins.loc;
			l.rm = ins.rm;
			l.readExpr = Expr::var(ins.reg);
			st.events.push_back(l);
			st.defined.insert(ins.reg);
			break;
		}
		case Instruction::Kind::Fence: {
			EventLabel l;
			l.type = EventType::Fence;
			l.fm = ins.fm;
			st.events.push_back(l);
			break;
		}
		case Instruction::Kind::Cax: {
			PathState fail = st;
			EventLabel ok;
			ok.type = EventType::Rmw;
			ok.loc = ins.loc;
			ok.rm = ins.rm;
			ok.wm = ins.wm;
			ok.readExpr = Expr::var(ins.reg);
			ok.writeExpr = ins.desired;
			st.events.push_back(ok);
			st.gamma.push_back(Expr::eq(Expr::var(ins.reg), ins.expected));
			st.defined.insert(ins.reg);
			explore(stack, std::move(st), out);

			EventLabel rd;
			rd.type = EventType::Read;
			rd.loc = ins.loc;
			rd.rm = ins.rm;
			rd.readExpr = Expr::var(ins.reg);
			fail.events.push_back(rd);
			fail.gamma.push_back(Expr::ne(Expr::var(ins.reg), ins.expected));
			fail.defined.insert(ins.reg);
			explore(std::move(stack), std::move(fail), out);
			return;
		}
		case Instruction::Kind::If: {
			PathState other = st;
			std::vector<Frame> otherStack = stack;
			st.gamma.push_back(ins.expr);
			stack.emplace_back(&ins.thenBlock, 0);
			explore(std::move(stack), std::move(st), out);

			other.gamma.push_back(Expr::lnot(ins.expr));
			otherStack.emplace_back(&ins.elseBlock, 0);
			explore(std::move(otherStack), std::move(other), out);
			return;
		}
		case Instruction::Kind::Skip:
			break;
		}
	}
	out.push_back(std::move(st));
}

} // namespace

std::vector<SymbolicExecutionGraph> buildThreadGraphs(const Block &body, ThreadId thread)
{
	std::vector<PathState> paths;
	explore({{&body, 0}}, {}, paths);
	std::vector<SymbolicExecutionGraph> out;
	for (auto &p : paths) {
		SymbolicExecutionGraph g;
		for (auto &l : p.events)
			g.events.push_back({thread, l});
		std::size_t n = g.events.size();
		if (n > maxEvents)
			throw Error("thread " + std::to_string(thread) + " has more than 64 events");
		g.po = Relation(n);
		for (std::size_t a = 0; a < n; a++)
			for (std::size_t b = a + 1; b < n; b++)
				g.po.insert(a, b);
		g.rf = Relation(n);
		g.gamma = std::move(p.gamma);
		g.definedRegisters = std::move(p.defined);
		g.finalize();
		out.push_back(std::move(g));
	}
	return out;
}

std::vector<SymbolicExecutionGraph> productWithInit(const LitmusTest &test,
						    const std::vector<std::vector<SymbolicExecutionGraph>> &perThread)
{
	std::vector<Event> inits;
	for (auto &loc : test.locations()) {
		Event e;
		e.thread = 0;
		e.label.type = EventType::Write;
		e.label.loc = loc;
		e.label.writeExpr = Expr::constant(test.initialValue(loc));
		inits.push_back(e);
	}
	std::vector<SymbolicExecutionGraph> out;
	std::vector<std::size_t> choice(perThread.size(), 0);
	for (auto &v : perThread)
		if (v.empty())
			return out;
	for (;;) {
		SymbolicExecutionGraph g;
		g.events = inits;
		std::vector<std::pair<std::size_t, std::size_t>> ranges;
		for (std::size_t t = 0; t < perThread.size(); t++) {
			const SymbolicExecutionGraph &tg = perThread[t][choice[t]];
			std::size_t start = g.events.size();
			g.events.insert(g.events.end(), tg.events.begin(), tg.events.end());
			ranges.emplace_back(start, g.events.size());
			g.gamma.insert(g.gamma.end(), tg.gamma.begin(), tg.gamma.end());
			g.definedRegisters.insert(tg.definedRegisters.begin(), tg.definedRegisters.end());
		}
		std::size_t n = g.events.size();
		if (n > maxEvents)
			throw Error("program has more than 64 events");
		g.po = Relation(n);
		g.rf = Relation(n);
		for (auto [s, e] : ranges)
			for (std::size_t a = s; a < e; a++)
				for (std::size_t b = a + 1; b < e; b++)
					g.po.insert(a, b);
		g.finalize();
		out.push_back(std::move(g));

		std::size_t t = 0;
		while (t < choice.size() && ++choice[t] == perThread[t].size())
			choice[t++] = 0;
		if (t == choice.size())
			break;
	}
	return out;
}

std::vector<SymbolicExecutionGraph> enumerateRf(const SymbolicExecutionGraph &g, smt::SatOracle &oracle)
{
	std::vector<std::size_t> reads = g.readSet.elements();
	std::vector<std::vector<std::size_t>> sources;
	for (auto r : reads) {
		std::vector<std::size_t> ws;
		(g.writeSet & g.locationSet(g.events[r].label.loc)).forEach([&](std::size_t w) {
			if (w != r)
				ws.push_back(w);
		});
		if (ws.empty())
			return {};
		sources.push_back(std::move(ws));
	}
	std::vector<SymbolicExecutionGraph> out;
	std::vector<std::size_t> choice(reads.size(), 0);
	for (;;) {
		SymbolicExecutionGraph h = g;
		h.rf = Relation(g.size());
		for (std::size_t i = 0; i < reads.size(); i++) {
			std::size_t w = sources[i][choice[i]];
			h.rf.insert(w, reads[i]);
			h.gamma.push_back(Expr::eq(g.events[reads[i]].label.readExpr, g.events[w].label.writeExpr));
		}
		if (oracle.check(h.gamma) != smt::Status::Unsat)
			out.push_back(std::move(h));

		std::size_t i = 0;
		while (i < choice.size() && ++choice[i] == sources[i].size())
			choice[i++] = 0;
		if (i == choice.size())
			break;
	}
	return out;
}

std::vector<SymbolicExecutionGraph> buildCandidateGraphs(const LitmusTest &test, smt::SatOracle &oracle)
{
	std::vector<std::vector<SymbolicExecutionGraph>> perThread;
	for (std::size_t t = 0; t < test.threads.size(); t++)
		perThread.push_back(buildThreadGraphs(test.threads[t], static_cast<ThreadId>(t + 1)));
	std::vector<SymbolicExecutionGraph> out;
	for (auto &g : productWithInit(test, perThread)) {
		auto gs = enumerateRf(g, oracle);
		for (auto &h : gs)
			out.push_back(std::move(h));
	}
	return out;
}

} // namespace jmt
