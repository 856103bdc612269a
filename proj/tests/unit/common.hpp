#pragma once

#include "doctest.h"

#include "jmt/behavior.hpp"
#include "jmt/cat.hpp"
#include "jmt/graph_builder.hpp"
#include "jmt/litmus.hpp"
#include "jmt/smt.hpp"

#include <string>

namespace test {

inline std::string path(const std::string &rel) { return std::string(JMT_SOURCE_DIR) + "/" + rel; }

inline jmt::smt::Backend &backend()
{
	static jmt::smt::Backend b;
	return b;
}

inline const jmt::CatModel &jls04()
{
	static jmt::CatModel m = jmt::parseCatFile(path("models/jls04.cat"));
	return m;
}

inline jmt::LitmusTest corpus(const std::string &rel) { return jmt::parseLitmusFile(path("litmus/" + rel)); }

/* Accepts every constraint set, so stage 2 keeps all rf candidates. */
struct AlwaysSat : jmt::smt::SatOracle {
	jmt::smt::Status check(const std::vector<jmt::Expr> &) override { return jmt::smt::Status::Sat; }
};

inline std::size_t eventIndex(const jmt::SymbolicExecutionGraph &g, jmt::ThreadId t, jmt::EventType type,
			      const std::string &what, unsigned idx = 1)
{
	auto e = g.find({t, type, what, idx});
	REQUIRE(e.has_value());
	return *e;
}

/* The pool graph whose rf matches the given (writer key, reader key) pairs exactly. */
inline std::size_t graphWithRf(const jmt::Pool &pool,
			       const std::vector<std::pair<jmt::EventKey, jmt::EventKey>> &edges)
{
	for (std::size_t i = 0; i < pool.size(); i++) {
		const auto &g = pool[i];
		bool all = g.rf.count() == edges.size();
		for (auto &[w, r] : edges) {
			auto a = g.find(w), b = g.find(r);
			all = all && a && b && g.rf.contains(*a, *b);
		}
		if (all)
			return i;
	}
	FAIL("no graph with the requested rf");
	return 0;
}

inline jmt::EventKey ini(const std::string &loc) { return {0, jmt::EventType::Write, loc, 0}; }
inline jmt::EventKey rd(jmt::ThreadId t, const std::string &loc, unsigned i = 1) { return {t, jmt::EventType::Read, loc, i}; }
inline jmt::EventKey wr(jmt::ThreadId t, const std::string &loc, unsigned i = 1) { return {t, jmt::EventType::Write, loc, i}; }

} // namespace test
