#include "validator.hpp"

#include "brute_force.hpp"

#include <map>
#include <set>
#include <sstream>

namespace jmt::oracle {

namespace {

struct Info {
	const SymbolicExecutionGraph *g = nullptr;
	std::vector<std::string> keys;
	std::map<std::string, std::size_t> index;
	std::set<std::string> all, inits;

	bool has(const std::string &k) const { return index.count(k) != 0; }
	std::size_t at(const std::string &k) const { return index.at(k); }
	const Relation &hb() const { return g->enhanced->hb; }
	const Relation &so() const { return g->enhanced->so; }
	const Relation &sw() const { return g->enhanced->sw; }
	bool isRead(std::size_t e) const { return g->events[e].label.isRead(); }

	std::optional<std::string> source(std::size_t r) const
	{
		for (std::size_t w = 0; w < g->size(); w++)
			if (g->rf.contains(w, r))
				return keys[w];
		return std::nullopt;
	}
	bool rel(const Relation &R, const std::string &a, const std::string &b) const { return R.contains(at(a), at(b)); }
};

Info describe(const SymbolicExecutionGraph &g)
{
	Info in;
	in.g = &g;
	in.keys = symbolicKeys(g);
	for (std::size_t e = 0; e < g.size(); e++) {
		in.index[in.keys[e]] = e;
		in.all.insert(in.keys[e]);
		if (g.events[e].isInit())
			in.inits.insert(in.keys[e]);
	}
	return in;
}

class Checker {
public:
	Checker(const Pool &pool, const Justification &j) : pool_(pool), j_(j) {}

	Validation run(const std::map<std::string, Value> &model, const Formula &phi)
	{
		if (j_.target >= pool_.size())
			return fail("target index out of range"), std::move(v_);
		if (j_.stages.empty())
			return fail("no stages"), std::move(v_);
		std::vector<std::size_t> graphs{j_.target};
		for (auto &s : j_.stages) {
			if (s.graph >= pool_.size())
				return fail("stage graph index out of range"), std::move(v_);
			graphs.push_back(s.graph);
		}
		for (auto gi : graphs)
			if (!infos_.count(gi) && wellFormed(gi))
				infos_[gi] = describe(pool_[gi]);
		if (!v_.ok())
			return std::move(v_);
		const Info &T = infos_.at(j_.target);

		std::vector<std::set<std::string>> committed;
		for (std::size_t i = 0; i < j_.stages.size(); i++)
			committed.push_back(translate(i));

		const Info &g1 = infos_.at(j_.stages[0].graph);
		if (committed[0] != g1.inits)
			fail("stage 1 does not commit exactly the initializer writes");
		for (std::size_t e = 0; e < g1.g->size(); e++)
			if (auto w = g1.source(e); w && !g1.rel(g1.hb(), *w, g1.keys[e]))
				fail("stage 1 graph is not well-behaved");

		std::set<std::string> prev;
		for (std::size_t i = 0; i < j_.stages.size(); i++) {
			for (auto &k : prev)
				if (!committed[i].count(k))
					fail("stage " + std::to_string(i + 1) + " drops committed event " + k);
			stage(infos_.at(j_.stages[i].graph), committed[i], prev, T, "stage " + std::to_string(i + 1));
			prev = committed[i];
		}
		if (prev != T.all)
			fail("last committed set differs from the target's events");
		stage(T, T.all, prev, T, "final");
		condition8(committed, T);
		values(committed, model, phi);
		return std::move(v_);
	}

private:
	void fail(const std::string &m) { v_.problems.push_back(m); }

	bool wellFormed(std::size_t gi)
	{
		const SymbolicExecutionGraph &g = pool_[gi];
		std::string tag = "graph " + std::to_string(gi) + ": ";
		if (!g.enhanced) {
			fail(tag + "not enhanced");
			return false;
		}
		const Enhancement &e = *g.enhanced;
		std::size_t n = g.size();
		EventSet vol;
		for (std::size_t a = 0; a < n; a++)
			if (g.events[a].label.isVolatile() && !g.events[a].label.isFence())
				vol.insert(a);
		for (std::size_t a = 0; a < n; a++) {
			if (!e.hb.contains(a, a))
				fail(tag + "hb is not reflexive");
			for (std::size_t b = 0; b < n; b++) {
				if ((g.po.contains(a, b) || e.sw.contains(a, b)) && !e.hb.contains(a, b))
					fail(tag + "po or sw not included in hb");
				if (a != b && e.hb.contains(a, b) && e.hb.contains(b, a))
					fail(tag + "hb is cyclic");
				for (std::size_t c = 0; c < n; c++)
					if (e.hb.contains(a, b) && e.hb.contains(b, c) && !e.hb.contains(a, c))
						fail(tag + "hb is not transitive");
				if (e.so.contains(a, b) && !(vol.contains(a) && vol.contains(b)))
					fail(tag + "so relates a non-volatile event");
			}
		}
		for (std::size_t a = 0; a < n; a++)
			for (std::size_t b = 0; b < n; b++)
				if (vol.contains(a) && vol.contains(b) && a != b && e.so.contains(a, b) == e.so.contains(b, a))
					fail(tag + "so is not a strict total order on volatile events");
		for (std::size_t r = 0; r < n; r++) {
			if (!g.events[r].label.isRead())
				continue;
			std::size_t sources = 0;
			for (std::size_t w = 0; w < n; w++)
				if (g.rf.contains(w, r)) {
					sources++;
					if (!g.events[w].label.isWrite() || g.events[w].label.loc != g.events[r].label.loc)
						fail(tag + "rf edge between mismatched events");
				}
			if (sources != 1)
				fail(tag + "read without a unique rf source");
		}
		/* library keys and oracle keys must induce the same identity */
		std::vector<std::string> mine = symbolicKeys(g);
		for (std::size_t a = 0; a < n; a++) {
			auto [it, fresh] = keyMap_.emplace(g.keys[a], mine[a]);
			if (!fresh && it->second != mine[a])
				fail(tag + "event identity disagrees with the oracle's keys");
			for (std::size_t b = a + 1; b < n; b++)
				if (mine[a] == mine[b])
					fail(tag + "duplicate event key " + mine[a]);
		}
		return v_.ok();
	}

	std::set<std::string> translate(std::size_t i)
	{
		const Info &in = infos_.at(j_.stages[i].graph);
		std::set<std::string> out;
		for (auto &k : j_.stages[i].committed) {
			auto e = in.g->find(k);
			if (!e) {
				fail("stage " + std::to_string(i + 1) + " commits an event absent from its graph (condition 1)");
				continue;
			}
			out.insert(in.keys[*e]);
		}
		return out;
	}

	void stage(const Info &G, const std::set<std::string> &C, const std::set<std::string> &P, const Info &T,
		   const std::string &tag)
	{
		bool present = true;
		for (auto &k : C) {
			if (!G.has(k))
				fail(tag + ": condition 1 fails for " + k), present = false;
			if (!T.has(k))
				fail(tag + ": committed event " + k + " not in target"), present = false;
		}
		if (!present)
			return;
		for (auto &a : C)
			for (auto &b : C) {
				if (G.rel(G.hb(), a, b) != T.rel(T.hb(), a, b))
					fail(tag + ": condition 2 fails on " + a + ", " + b);
				if (G.rel(G.so(), a, b) != T.rel(T.so(), a, b))
					fail(tag + ": condition 3 fails on " + a + ", " + b);
			}
		for (std::size_t r = 0; r < G.g->size(); r++) {
			if (!G.isRead(r))
				continue;
			const std::string &rk = G.keys[r];
			std::string src = G.source(r).value_or("?");
			std::string tsrc = T.has(rk) ? T.source(T.at(rk)).value_or("?") : "?";
			if (src == "?") {
				fail(tag + ": read " + rk + " has no rf source");
				continue;
			}
			if (P.count(rk) && src != tsrc)
				fail(tag + ": condition 5 fails for " + rk);
			if (!P.count(rk) && !G.rel(G.hb(), src, rk))
				fail(tag + ": condition 6 fails for " + rk);
			if (C.count(rk) && !P.count(rk) && (!P.count(src) || !P.count(tsrc)))
				fail(tag + ": condition 7 fails for " + rk);
		}
	}

	void condition8(const std::vector<std::set<std::string>> &committed, const Info &T)
	{
		auto hasSw = [](const Info &in, const std::string &x, const std::string &y) {
			return in.has(x) && in.has(y) && in.rel(in.sw(), x, y);
		};
		for (std::size_t i = 0; i < j_.stages.size(); i++) {
			const Info &G = infos_.at(j_.stages[i].graph);
			std::size_t n = G.g->size();
			const Relation &hb = G.hb();
			for (std::size_t x = 0; x < n; x++)
				for (std::size_t y = 0; y < n; y++) {
					if (x == y || !G.sw().contains(x, y) || G.g->po.contains(x, y))
						continue;
					bool reduced = true;
					for (std::size_t c = 0; c < n && reduced; c++)
						if (c != x && c != y && hb.contains(x, c) && hb.contains(c, y))
							reduced = false;
					if (!reduced)
						continue;
					bool reachesCommitted = false;
					for (std::size_t z = 0; z < n; z++)
						if (hb.contains(y, z) && committed[i].count(G.keys[z]))
							reachesCommitted = true;
					if (!reachesCommitted)
						continue;
					const std::string &xk = G.keys[x], &yk = G.keys[y];
					for (std::size_t k = i; k < j_.stages.size(); k++)
						if (!hasSw(infos_.at(j_.stages[k].graph), xk, yk))
							fail("condition 8 fails: " + xk + " -sw-> " + yk + " lost at stage " + std::to_string(k + 1));
					if (!hasSw(T, xk, yk))
						fail("condition 8 fails: " + xk + " -sw-> " + yk + " absent from target");
				}
		}
	}

	bool environment(const Info &G, const std::string &tag, const std::map<std::string, Value> &model, Env &env)
	{
		std::set<std::string> regs;
		for (auto &c : G.g->gamma)
			collectVars(c, regs);
		for (auto &e : G.g->events) {
			collectVars(e.label.readExpr, regs);
			collectVars(e.label.writeExpr, regs);
		}
		for (auto &r : regs) {
			auto it = model.find(tag + ":" + r);
			if (it == model.end()) {
				fail("model lacks " + tag + ":" + r);
				return false;
			}
			env[r] = it->second;
		}
		for (auto &c : G.g->gamma)
			if (!holds(c, env))
				fail(tag + ": model violates constraint " + toString(c));
		for (std::size_t r = 0; r < G.g->size(); r++) {
			if (!G.isRead(r))
				continue;
			for (std::size_t w = 0; w < G.g->size(); w++)
				if (G.g->rf.contains(w, r) &&
				    eval(G.g->events[r].label.readExpr, env) != eval(G.g->events[w].label.writeExpr, env))
					fail(tag + ": read " + G.keys[r] + " differs from its rf source");
		}
		return true;
	}

	void values(const std::vector<std::set<std::string>> &committed, const std::map<std::string, Value> &model,
		    const Formula &phi)
	{
		const Info &T = infos_.at(j_.target);
		Env tenv;
		if (!environment(T, "T", model, tenv))
			return;
		for (std::size_t i = 0; i < j_.stages.size(); i++) {
			const Info &G = infos_.at(j_.stages[i].graph);
			std::string tag = "G" + std::to_string(i + 1);
			Env env;
			if (!environment(G, tag, model, env))
				return;
			for (auto &k : committed[i]) {
				std::size_t e = G.at(k);
				const EventLabel &l = G.g->events[e].label;
				if (!l.isWrite() || G.g->events[e].isInit())
					continue;
				if (eval(l.writeExpr, env) != eval(T.g->events[T.at(k)].label.writeExpr, tenv))
					fail(tag + ": committed write " + k + " changes value (condition 4)");
			}
		}
		Behavior b;
		for (auto &ref : registersOf(phi)) {
			auto it = tenv.find(ref.second);
			b[ref] = it != tenv.end() && T.g->definedRegisters.count(ref.second) ? it->second : 0;
		}
		if (!evalFormula(phi, b))
			fail("target registers " + toString(b) + " violate " + toString(phi));
	}

	const Pool &pool_;
	const Justification &j_;
	std::map<std::size_t, Info> infos_;
	std::map<EventKey, std::string> keyMap_;
	Validation v_;
};

} // namespace

std::string Validation::summary() const
{
	if (problems.empty())
		return "valid";
	std::ostringstream out;
	for (std::size_t i = 0; i < problems.size(); i++)
		out << (i ? "; " : "") << problems[i];
	return out.str();
}

Validation validateJustification(const Pool &pool, const Justification &j, const std::map<std::string, Value> &model,
				 const Formula &phi)
{
	return Checker(pool, j).run(model, phi);
}

Validation validateWitness(const Witness &w, const Formula &phi)
{
	Validation v = validateJustification(w.pool, w.justification, w.model, phi);
	const SymbolicExecutionGraph &T = w.pool[w.justification.target];
	for (auto &[ref, value] : w.behavior) {
		Value expect = 0;
		if (T.definedRegisters.count(ref.second)) {
			auto it = w.model.find("T:" + ref.second);
			expect = it == w.model.end() ? 0 : it->second;
		}
		if (expect != value)
			v.problems.push_back("reported behavior disagrees with the model at " + ref.second);
	}
	if (!evalFormula(phi, w.behavior))
		v.problems.push_back("reported behavior violates the assertion");
	return v;
}

} // namespace jmt::oracle
