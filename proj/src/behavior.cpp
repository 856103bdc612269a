#include "jmt/behavior.hpp"
#include "jmt/encoding.hpp"
#include "jmt/error.hpp"
#include "jmt/graph_builder.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <sstream>
#include <thread>

namespace jmt {

const char *toString(Outcome o)
{
	switch (o) {
	case Outcome::Pass: return "pass";
	case Outcome::Fail: return "fail";
	case Outcome::Unsupported: return "unsupported";
	case Outcome::Unknown: return "unknown";
	}
	return "?";
}

int exitCode(Outcome o)
{
	switch (o) {
	case Outcome::Pass: return 0;
	case Outcome::Fail: return 1;
	case Outcome::Unsupported: return 2;
	case Outcome::Unknown: return 3;
	}
	return 3;
}

const Witness *Verdict::witness() const
{
	for (auto &c : clauses) {
		if (!c.result.witness)
			continue;
		bool decisive = (c.polarity == Polarity::Forbidden) == (outcome == Outcome::Fail);
		if (decisive)
			return &*c.result.witness;
	}
	return nullptr;
}

Pool Engine::buildPool(const LitmusTest &test, const CatModel &sem)
{
	smt::SolverSatOracle oracle(smt_, cfg_.pruneTimeoutMs);
	Pool pool;
	for (auto &g : buildCandidateGraphs(test, oracle))
		for (auto &e : evaluateSem(sem, g))
			pool.push_back(std::move(e));
	return pool;
}

namespace {

std::size_t races(const SymbolicExecutionGraph &g)
{
	std::size_t n = 0;
	g.readSet.forEach([&](std::size_t r) {
		auto w = g.rfSource(r);
		if (!w || !g.enhanced->hb.contains(*w, r))
			n++;
	});
	return n;
}

} // namespace

AllowedResult Engine::allowed(const LitmusTest &test, const Pool &pool, const Formula &phi)
{
	AllowedResult res;
	std::vector<std::size_t> targets;
	for (std::size_t i = 0; i < pool.size(); i++) {
		smt::Query q;
		q.comment = "target filter";
		q.assertions = encAssertion(pool[i], phi);
		for (auto &a : encStage(pool[i], EventSet::full(pool[i].size()), "T"))
			q.assertions.push_back(std::move(a));
		if (smt_.check(q, cfg_.search.smtTimeoutMs).status != smt::Status::Unsat)
			targets.push_back(i);
	}
	std::vector<std::size_t> raceCount(pool.size());
	for (auto t : targets)
		raceCount[t] = races(pool[t]);
	std::stable_sort(targets.begin(), targets.end(),
			 [&](std::size_t a, std::size_t b) { return raceCount[a] < raceCount[b]; });
	res.targets = targets.size();

	std::vector<SearchResult> results(targets.size());
	std::vector<bool> done(targets.size(), false);
	std::atomic<std::size_t> next{0};
	std::atomic<std::size_t> best{targets.size()};
	std::mutex mu;
	std::exception_ptr failure;
	auto worker = [&] {
		for (;;) {
			std::size_t i = next++;
			if (i >= targets.size() || i > best)
				return;
			try {
				SearchResult r = findJustification(pool, targets[i], phi, smt_, cfg_.search);
				std::lock_guard lock(mu);
				if (r.status == SearchStatus::Found) {
					std::size_t b = best;
					while (i < b && !best.compare_exchange_weak(b, i)) {
					}
				}
				results[i] = std::move(r);
				done[i] = true;
			} catch (...) {
				std::lock_guard lock(mu);
				if (!failure)
					failure = std::current_exception();
				best = 0;
				return;
			}
		}
	};
	unsigned jobs = std::max(1u, std::min<unsigned>(cfg_.jobs, static_cast<unsigned>(targets.size())));
	if (jobs <= 1) {
		worker();
	} else {
		std::vector<std::thread> ts;
		for (unsigned j = 0; j < jobs; j++)
			ts.emplace_back(worker);
		for (auto &t : ts)
			t.join();
	}
	if (failure)
		std::rethrow_exception(failure);

	bool exhausted = false;
	for (std::size_t i = 0; i < targets.size(); i++) {
		if (!done[i])
			continue;
		res.nodes += results[i].nodes;
		if (results[i].status == SearchStatus::BudgetExhausted)
			exhausted = true;
	}
	if (best < targets.size()) {
		SearchResult &r = results[best];
		const SymbolicExecutionGraph &t = pool[targets[best]];
		std::set<RegisterRef> regs = registersOf(test);
		for (auto &rr : registersOf(phi))
			regs.insert(rr);
		Witness w{decodeBehavior(t, regs, r.model), pool, *r.justification, r.model};
		if (!evalFormula(phi, w.behavior))
			throw Error("decoded witness behavior " + toString(w.behavior) + " violates " + toString(phi));
		res.status = SearchStatus::Found;
		res.witness = std::move(w);
	} else {
		res.status = exhausted ? SearchStatus::BudgetExhausted : SearchStatus::NotFound;
	}
	return res;
}

std::optional<Witness> Engine::behaviorAllowed(const LitmusTest &test, const CatModel &sem, const Formula &phi)
{
	Pool pool = buildPool(test, sem);
	AllowedResult r = allowed(test, pool, phi);
	if (r.status == SearchStatus::BudgetExhausted)
		throw Error("search budget exhausted");
	return std::move(r.witness);
}

Verdict Engine::judge(const LitmusTest &test, const CatModel &sem)
{
	auto start = std::chrono::steady_clock::now();
	Verdict v;
	Pool pool = buildPool(test, sem);
	v.poolSize = pool.size();
	bool fail = false, unknown = false;
	for (auto &c : test.assertion.clauses()) {
		ClauseResult cr{c.polarity, c.formula, allowed(test, pool, c.formula)};
		bool found = cr.result.status == SearchStatus::Found;
		if (cr.result.status == SearchStatus::BudgetExhausted)
			unknown = true;
		else if (found == (c.polarity == Polarity::Forbidden))
			fail = true;
		v.clauses.push_back(std::move(cr));
	}
	v.outcome = fail ? Outcome::Fail : unknown ? Outcome::Unknown : Outcome::Pass;
	for (auto &c : v.clauses) {
		bool found = c.result.status == SearchStatus::Found;
		if (!v.message.empty())
			v.message += "; ";
		if (c.polarity == Polarity::Required)
			v.message += found ? "required behavior witnessed"
				     : c.result.status == SearchStatus::BudgetExhausted
					     ? "required behavior undecided, search budget exhausted"
					     : "required behavior has no justification";
		else
			v.message += found ? "forbidden behavior is possible"
				     : c.result.status == SearchStatus::BudgetExhausted
					     ? "forbidden behavior undecided, search budget exhausted"
					     : "forbidden behavior correctly absent";
	}
	v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
	return v;
}

Verdict judgeFile(Engine &engine, const std::string &litmusPath, const CatModel &sem)
{
	LitmusTest test;
	try {
		test = parseLitmusFile(litmusPath);
	} catch (const UnsupportedFeature &e) {
		Verdict v;
		v.outcome = Outcome::Unsupported;
		v.message = e.what();
		return v;
	}
	return engine.judge(test, sem);
}

std::string justificationText(const Witness &w)
{
	std::ostringstream os;
	const Justification &j = w.justification;
	os << "behavior: " << toString(w.behavior) << "\n";
	os << "target graph #" << j.target << ":\n" << dumpText(w.pool[j.target]);
	for (std::size_t i = 0; i < j.stages.size(); i++) {
		os << "stage " << i + 1 << ": graph #" << j.stages[i].graph << " commits {";
		bool first = true;
		for (auto &k : j.stages[i].committed) {
			os << (first ? "" : ", ") << toString(k);
			first = false;
		}
		os << "}\n";
	}
	for (std::size_t g : [&] {
		     std::set<std::size_t> s;
		     for (auto &st : j.stages)
			     if (st.graph != j.target)
				     s.insert(st.graph);
		     return s;
	     }())
		os << "graph #" << g << ":\n" << dumpText(w.pool[g]);
	return os.str();
}

std::string verdictJson(const std::string &file, const LitmusTest *test, const Verdict &v, bool withJustification)
{
	using nlohmann::json;
	json out;
	out["file"] = file;
	if (test)
		out["test"] = test->name;
	out["verdict"] = toString(v.outcome);
	out["message"] = v.message;
	out["candidates"] = v.poolSize;
	out["seconds"] = v.seconds;
	json clauses = json::array();
	for (auto &c : v.clauses) {
		json jc;
		jc["polarity"] = toString(c.polarity);
		jc["formula"] = toString(c.formula);
		jc["search"] = toString(c.result.status);
		jc["targets"] = c.result.targets;
		jc["nodes"] = c.result.nodes;
		if (c.result.witness) {
			const Witness &w = *c.result.witness;
			json beh = json::object();
			for (auto &[rr, val] : w.behavior)
				beh[std::to_string(rr.first) + ":" + rr.second] = val;
			jc["witness"]["behavior"] = beh;
			jc["witness"]["stages"] = w.justification.stages.size();
			if (withJustification) {
				json stages = json::array();
				for (auto &st : w.justification.stages) {
					json js;
					js["graph"] = st.graph;
					json keys = json::array();
					for (auto &k : st.committed)
						keys.push_back(toString(k));
					js["committed"] = keys;
					stages.push_back(js);
				}
				jc["witness"]["justification"] = stages;
				jc["witness"]["target"] = dumpText(w.pool[w.justification.target]);
			}
		}
		clauses.push_back(jc);
	}
	out["clauses"] = clauses;
	return out.dump(2);
}

} // namespace jmt
