#include "brute_force.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace jmt::oracle {

namespace {

std::string place(const ConcreteEvent &e)
{
	return e.type == 'F' ? "F" + std::to_string(e.fm) : e.loc;
}

struct ThreadRun {
	Env env;
	std::vector<ConcreteEvent> events;
};

using Frame = std::pair<const Block *, std::size_t>;

void interpret(std::vector<Frame> stack, ThreadRun run, int thread, const std::vector<Value> &domain,
	       std::vector<std::vector<ConcreteEvent>> &out)
{
	auto push = [&](ConcreteEvent e) {
		e.thread = thread;
		e.po = static_cast<unsigned>(run.events.size());
		run.events.push_back(std::move(e));
	};
	while (!stack.empty()) {
		auto &[block, i] = stack.back();
		if (i == block->size()) {
			stack.pop_back();
			continue;
		}
		const Instruction &ins = (*block)[i++];
		switch (ins.kind) {
		case Instruction::Kind::Assign:
			run.env[ins.reg] = eval(ins.expr, run.env);
			break;
		case Instruction::Kind::Store: {
			ConcreteEvent e;
			e.type = 'W';
			e.loc = ins.loc;
			e.wm = static_cast<int>(ins.wm);
			e.wv = eval(ins.expr, run.env);
			push(e);
			break;
		}
		case Instruction::Kind::Fence: {
			ConcreteEvent e;
			e.type = 'F';
			e.fm = static_cast<int>(ins.fm);
			push(e);
			break;
		}
		case Instruction::Kind::Load:
		case Instruction::Kind::Cax:
			for (Value v : domain) {
				ThreadRun branch = run;
				ConcreteEvent e;
				e.thread = thread;
				e.po = static_cast<unsigned>(branch.events.size());
				e.loc = ins.loc;
				e.rm = static_cast<int>(ins.rm);
				e.rv = v;
				e.type = 'R';
				if (ins.kind == Instruction::Kind::Cax && v == eval(ins.expected, branch.env)) {
					e.type = 'U';
					e.wm = static_cast<int>(ins.wm);
					e.wv = eval(ins.desired, branch.env);
				}
				branch.events.push_back(e);
				branch.env[ins.reg] = v;
				interpret(stack, std::move(branch), thread, domain, out);
			}
			return;
		case Instruction::Kind::If:
			stack.emplace_back(holds(ins.expr, run.env) ? &ins.thenBlock : &ins.elseBlock, 0);
			break;
		case Instruction::Kind::Skip:
			break;
		}
	}
	out.push_back(std::move(run.events));
}

bool isRead(const ConcreteEvent &e) { return e.type == 'R' || e.type == 'U'; }
bool isWrite(const ConcreteEvent &e) { return e.type == 'W' || e.type == 'U'; }

} // namespace

std::vector<std::string> eventKeys(const std::vector<ConcreteEvent> &events)
{
	std::vector<std::string> keys;
	for (auto &e : events) {
		if (e.thread == 0) {
			keys.push_back("ini:" + e.loc);
			continue;
		}
		unsigned idx = 1;
		for (auto &o : events)
			if (o.thread == e.thread && o.po < e.po && o.type == e.type && place(o) == place(e))
				idx++;
		keys.push_back(std::to_string(e.thread) + ":" + e.type + ":" + place(e) + "@" + std::to_string(idx));
	}
	return keys;
}

std::string canonical(const std::vector<ConcreteEvent> &events, const std::vector<std::pair<std::size_t, std::size_t>> &rf)
{
	std::vector<std::string> keys = eventKeys(events);
	std::vector<std::string> parts;
	for (std::size_t i = 0; i < events.size(); i++) {
		const ConcreteEvent &e = events[i];
		std::ostringstream s;
		s << keys[i] << "{" << e.rm << "," << e.wm << ",";
		if (isRead(e))
			s << "r" << e.rv;
		if (isWrite(e))
			s << "w" << e.wv;
		s << "}";
		parts.push_back(s.str());
	}
	std::sort(parts.begin(), parts.end());
	std::vector<std::string> edges;
	for (auto [w, r] : rf)
		edges.push_back(keys[w] + ">" + keys[r]);
	std::sort(edges.begin(), edges.end());
	std::ostringstream out;
	for (auto &p : parts)
		out << p << " ";
	out << "|";
	for (auto &e : edges)
		out << " " << e;
	return out.str();
}

ExecutionSet bruteForceExecutions(const LitmusTest &test, const std::vector<Value> &domain)
{
	std::vector<std::vector<std::vector<ConcreteEvent>>> perThread;
	for (std::size_t t = 0; t < test.threads.size(); t++) {
		std::vector<std::vector<ConcreteEvent>> runs;
		interpret({{&test.threads[t], 0}}, {}, static_cast<int>(t + 1), domain, runs);
		perThread.push_back(std::move(runs));
	}
	std::vector<ConcreteEvent> inits;
	for (auto &loc : test.locations()) {
		ConcreteEvent e;
		e.loc = loc;
		e.wv = test.initialValue(loc);
		inits.push_back(e);
	}

	ExecutionSet out;
	std::vector<std::size_t> choice(perThread.size(), 0);
	for (;;) {
		std::vector<ConcreteEvent> events = inits;
		for (std::size_t t = 0; t < perThread.size(); t++)
			for (auto &e : perThread[t][choice[t]])
				events.push_back(e);

		std::vector<std::size_t> reads;
		std::vector<std::vector<std::size_t>> sources;
		bool feasible = true;
		for (std::size_t r = 0; r < events.size() && feasible; r++) {
			if (!isRead(events[r]))
				continue;
			std::vector<std::size_t> ws;
			for (std::size_t w = 0; w < events.size(); w++)
				if (w != r && isWrite(events[w]) && events[w].loc == events[r].loc && events[w].wv == events[r].rv)
					ws.push_back(w);
			feasible = !ws.empty();
			reads.push_back(r);
			sources.push_back(std::move(ws));
		}
		if (feasible) {
			std::vector<std::size_t> pick(reads.size(), 0);
			for (;;) {
				std::vector<std::pair<std::size_t, std::size_t>> rf;
				for (std::size_t i = 0; i < reads.size(); i++)
					rf.emplace_back(sources[i][pick[i]], reads[i]);
				out.insert(canonical(events, rf));
				std::size_t i = 0;
				while (i < pick.size() && ++pick[i] == sources[i].size())
					pick[i++] = 0;
				if (i == pick.size())
					break;
			}
		}

		std::size_t t = 0;
		while (t < choice.size() && ++choice[t] == perThread[t].size())
			choice[t++] = 0;
		if (t == choice.size())
			break;
	}
	return out;
}

namespace {

std::vector<ConcreteEvent> skeleton(const SymbolicExecutionGraph &g)
{
	std::vector<ConcreteEvent> out;
	for (std::size_t i = 0; i < g.size(); i++) {
		const Event &ev = g.events[i];
		ConcreteEvent e;
		e.thread = ev.thread;
		switch (ev.label.type) {
		case EventType::Read: e.type = 'R'; break;
		case EventType::Write: e.type = 'W'; break;
		case EventType::Rmw: e.type = 'U'; break;
		case EventType::Fence: e.type = 'F'; e.fm = static_cast<int>(ev.label.fm); break;
		}
		if (e.type != 'F')
			e.loc = ev.label.loc;
		if (ev.label.rm)
			e.rm = static_cast<int>(*ev.label.rm);
		if (ev.label.wm)
			e.wm = static_cast<int>(*ev.label.wm);
		e.po = static_cast<unsigned>(g.po.predecessors(i).size());
		out.push_back(e);
	}
	return out;
}

} // namespace

std::vector<std::string> symbolicKeys(const SymbolicExecutionGraph &g)
{
	return eventKeys(skeleton(g));
}

ExecutionSet concretize(const SymbolicExecutionGraph &g, const std::vector<Value> &domain)
{
	std::vector<std::string> order;
	std::map<std::string, std::size_t> position;
	auto note = [&](const Expr &e) {
		std::set<std::string> vs;
		collectVars(e, vs);
		std::vector<std::string> fresh;
		for (auto &v : vs)
			if (!position.count(v))
				fresh.push_back(v);
		for (auto &v : fresh) {
			position[v] = order.size();
			order.push_back(v);
		}
	};
	for (auto &c : g.gamma)
		note(c);
	for (auto &e : g.events) {
		note(e.label.readExpr);
		note(e.label.writeExpr);
	}

	/* Each constraint is checked as soon as its last variable is bound. */
	std::vector<std::vector<const Expr *>> checks(order.size() + 1);
	for (auto &c : g.gamma) {
		std::set<std::string> vs;
		collectVars(c, vs);
		std::size_t last = 0;
		for (auto &v : vs)
			last = std::max(last, position[v] + 1);
		checks[last].push_back(&c);
	}

	std::vector<ConcreteEvent> base = skeleton(g);
	std::vector<std::pair<std::size_t, std::size_t>> rf = g.rf.pairs();
	ExecutionSet out;
	Env env;
	std::function<void(std::size_t)> bind = [&](std::size_t k) {
		for (const Expr *c : checks[k])
			if (!holds(*c, env))
				return;
		if (k == order.size()) {
			std::vector<ConcreteEvent> evs = base;
			for (std::size_t i = 0; i < evs.size(); i++) {
				const EventLabel &l = g.events[i].label;
				if (l.isRead())
					evs[i].rv = eval(l.readExpr, env);
				if (l.isWrite())
					evs[i].wv = eval(l.writeExpr, env);
			}
			out.insert(canonical(evs, rf));
			return;
		}
		for (Value v : domain) {
			env[order[k]] = v;
			bind(k + 1);
		}
		env.erase(order[k]);
	};
	bind(0);
	return out;
}

} // namespace jmt::oracle
