#include "common.hpp"

#include "jmt/causality.hpp"
#include "jmt/encoding.hpp"
#include "validator.hpp"

using namespace jmt;
using test::ini;
using test::rd;
using test::wr;

namespace {

struct LbOdd {
	LitmusTest test = test::corpus("misc/lbodd.litmus");
	Pool pool = Engine(test::backend()).buildPool(test, test::jls04());
	std::size_t g1 = test::graphWithRf(pool, {{ini("x"), rd(1, "x")}, {ini("y"), rd(2, "y")}});
	std::size_t g4 = test::graphWithRf(pool, {{ini("x"), rd(1, "x")}, {wr(1, "y"), rd(2, "y")}});
	std::size_t t = test::graphWithRf(pool, {{wr(2, "x"), rd(1, "x")}, {wr(1, "y"), rd(2, "y")}});

	KeySet c1{ini("x"), ini("y")};
	KeySet c2 = with(c1, wr(1, "y"));
	KeySet c3 = with(c2, rd(2, "y"));
	KeySet c4 = with(c3, wr(2, "x"));
	KeySet c5 = with(c4, rd(1, "x"));

	static KeySet with(KeySet s, const EventKey &k)
	{
		s.insert(k);
		return s;
	}

	Justification figure3() const
	{
		return {t, {{g1, c1}, {g1, c2}, {g1, c3}, {g4, c4}, {g4, c5}}};
	}
};

} // namespace

TEST_SUITE("causality")
{
	TEST_CASE("well-behaved graphs")
	{
		LbOdd lb;
		CHECK(isWellBehaved(lb.pool[lb.g1]));
		CHECK_FALSE(isWellBehaved(lb.pool[lb.t]));
		Pool p = Engine(test::backend()).buildPool(parseLitmus("Java W\n{ x = 0; }\nx.setPlain(1);\nexists (true)\n"),
							    test::jls04());
		REQUIRE(p.size() == 1);
		CHECK(isWellBehaved(p[0]));
	}

	TEST_CASE("every consecutive pair of the reference LbOdd justification satisfies ok")
	{
		LbOdd lb;
		const auto &T = lb.pool[lb.t];
		Justification j = lb.figure3();
		KeySet prev;
		for (auto &s : j.stages) {
			CHECK(ok(T, lb.pool[s.graph], s.committed, prev));
			prev = s.committed;
		}
		KeySet all = keysOf(T, EventSet::full(T.size()));
		CHECK(ok(T, T, all, prev));
		CHECK(checkCondition8(lb.pool, j));
	}

	TEST_CASE("committing a read before its write violates condition 7")
	{
		LbOdd lb;
		const auto &T = lb.pool[lb.t];
		CHECK_FALSE(ok(T, lb.pool[lb.g1], LbOdd::with(lb.c1, rd(1, "x")), lb.c1));
	}

	TEST_CASE("committing an event absent from the graph violates condition 1")
	{
		LbOdd lb;
		const auto &T = lb.pool[lb.t];
		CHECK_FALSE(ok(T, lb.pool[lb.g1], LbOdd::with(lb.c1, wr(3, "z")), lb.c1));
	}

	TEST_CASE("successors of the first stage include committing the write to y")
	{
		LbOdd lb;
		auto succ = genSuccessors(lb.pool, lb.t, {lb.g1, lb.c1}, 1);
		bool found = false;
		for (auto &s : succ)
			found = found || (s.graph == lb.g1 && s.committed == lb.c2);
		CHECK(found);
		for (auto &s : succ)
			CHECK(s.committed.size() == lb.c1.size() + 1);
	}

	TEST_CASE("a complete stage has no successors")
	{
		LbOdd lb;
		CHECK(genSuccessors(lb.pool, lb.t, {lb.g4, lb.c5}, 0).empty());
		CHECK(genSuccessors(Pool{}, 0, {0, {}}, 0).empty());
	}

	TEST_CASE("LbOdd justification has the reference shape")
	{
		LbOdd lb;
		SearchResult r = findJustification(lb.pool, lb.t, lb.test.assertion.formula, test::backend());
		REQUIRE(r.status == SearchStatus::Found);
		const auto &st = r.justification->stages;
		CHECK(st.size() == 5);
		KeySet prev;
		for (auto &s : st) {
			for (auto &k : prev)
				CHECK(s.committed.count(k));
			prev = s.committed;
		}
		CHECK(prev.size() == lb.pool[lb.t].size());
		CHECK(oracle::validateJustification(lb.pool, *r.justification, r.model, lb.test.assertion.formula).ok());
	}

	TEST_CASE("search is deterministic")
	{
		LbOdd lb;
		SearchResult a = findJustification(lb.pool, lb.t, lb.test.assertion.formula, test::backend());
		SearchResult b = findJustification(lb.pool, lb.t, lb.test.assertion.formula, test::backend());
		REQUIRE(a.justification);
		REQUIRE(b.justification);
		CHECK(a.justification->stages == b.justification->stages);
	}

	TEST_CASE("b = 5 has no justification")
	{
		LbOdd lb;
		SearchResult r = findJustification(lb.pool, lb.t, Formula::atom(1, "b", 5), test::backend());
		CHECK(r.status == SearchStatus::NotFound);
	}

	TEST_CASE("well-behaved targets justify themselves")
	{
		LbOdd lb;
		Formula tt;
		SearchResult r = findJustification(lb.pool, lb.g1, tt, test::backend());
		REQUIRE(r.status == SearchStatus::Found);
		for (auto &s : r.justification->stages)
			CHECK(s.graph == lb.g1);
		CHECK(oracle::validateJustification(lb.pool, *r.justification, r.model, tt).ok());
	}

	TEST_CASE("CTC test 4 forbidden outcome is unjustifiable")
	{
		LitmusTest t = test::corpus("ctc/ctc04.litmus");
		Engine engine(test::backend());
		Pool pool = engine.buildPool(t, test::jls04());
		Formula phi = t.assertion.clauses()[0].formula;
		for (std::size_t i = 0; i < pool.size(); i++)
			CHECK(findJustification(pool, i, phi, test::backend()).status == SearchStatus::NotFound);
	}

	TEST_CASE("a tiny node budget is reported distinctly")
	{
		LitmusTest t = test::corpus("ctc/ctc04.litmus");
		Pool pool = Engine(test::backend()).buildPool(t, test::jls04());
		SearchConfig cfg;
		cfg.nodeBudget = 1;
		bool exhausted = false;
		for (std::size_t i = 0; i < pool.size(); i++)
			exhausted = exhausted ||
				    findJustification(pool, i, t.assertion.clauses()[0].formula, test::backend(), cfg).status ==
					    SearchStatus::BudgetExhausted;
		CHECK(exhausted);
	}

	TEST_CASE("condition 8 over volatile message passing")
	{
		LitmusTest t = test::corpus("manson/mt5_1.litmus");
		Pool pool = Engine(test::backend()).buildPool(t, test::jls04());
		EventKey wv = wr(1, "v"), rv = rd(2, "v");
		std::size_t sync = test::graphWithRf(pool, {{wv, rv}, {wr(1, "x"), rd(2, "x")}});
		std::size_t nosync = test::graphWithRf(pool, {{ini("v"), rv}, {wr(1, "x"), rd(2, "x")}});
		REQUIRE(pool[sync].enhanced->sw.contains(*pool[sync].find(wv), *pool[sync].find(rv)));
		REQUIRE_FALSE(pool[nosync].enhanced->sw.contains(*pool[nosync].find(wv), *pool[nosync].find(rv)));
		KeySet inits{ini("v"), ini("x")};
		KeySet withRead = LbOdd::with(inits, rv);

		Justification keeps{sync, {{sync, inits}, {sync, withRead}}};
		CHECK(checkCondition8(pool, keeps));
		Justification drops{sync, {{sync, withRead}, {nosync, withRead}}};
		CHECK_FALSE(checkCondition8(pool, drops));
		Justification vacuous{nosync, {{nosync, inits}}};
		CHECK(checkCondition8(pool, vacuous));
	}

	TEST_CASE("stage committed sets are monotone and reads follow condition 6")
	{
		Engine engine(test::backend());
		for (auto f : {"ctc/ctc07.litmus", "ctc/ctc11.litmus", "ctc/ctc02.litmus"}) {
			LitmusTest t = test::corpus(f);
			Pool pool = engine.buildPool(t, test::jls04());
			AllowedResult r = engine.allowed(t, pool, t.assertion.formula);
			REQUIRE(r.witness);
			KeySet prev;
			for (auto &s : r.witness->justification.stages) {
				for (auto &k : prev)
					CHECK(s.committed.count(k));
				const auto &g = pool[s.graph];
				g.readSet.forEach([&](std::size_t e) {
					if (!prev.count(g.keys[e]))
						CHECK(g.enhanced->hb.contains(*g.rfSource(e), e));
				});
				prev = s.committed;
			}
		}
	}
}
