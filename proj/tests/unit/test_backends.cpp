#include "common.hpp"

#include "jmt/jcstress.hpp"
#include "jmt/x86.hpp"
#include "validator.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>

using namespace jmt;

namespace {

std::vector<std::string> lines(const std::vector<x86::Instr> &is)
{
	std::vector<std::string> out;
	for (auto &i : is)
		out.push_back(x86::toString(i));
	return out;
}

std::vector<std::string> compileText(const std::string &body)
{
	LitmusTest t = parseLitmus("Java C\n{ x = 0; y = 0; }\n" + body + "exists (true)\n");
	x86::RegisterMap map;
	return lines(x86::compileThread(t.threads[0], 1, map));
}

x86::HerdConfig mockHerd(const std::string &canned)
{
	x86::HerdConfig cfg;
	cfg.command = test::path("tests/mock/herd_mock.sh");
	cfg.args = {canned == "fail" || canned == "sleep" ? canned : test::path("tests/data/herd/" + canned)};
	cfg.timeoutMs = 2000;
	return cfg;
}

} // namespace

TEST_SUITE("behavior")
{
	TEST_CASE("LbOdd behavior is allowed")
	{
		Engine engine(test::backend());
		LitmusTest t = test::corpus("misc/lbodd.litmus");
		auto w = engine.behaviorAllowed(t, test::jls04(), t.assertion.formula);
		REQUIRE(w);
		CHECK(w->behavior == Behavior{{{1, "a"}, 1}, {{1, "b"}, 1}, {{2, "c"}, 1}});
		CHECK(oracle::validateWitness(*w, t.assertion.formula).ok());
	}

	TEST_CASE("CTC test 5 forbidden outcome has no witness")
	{
		Engine engine(test::backend());
		LitmusTest t = test::corpus("ctc/ctc05.litmus");
		CHECK_FALSE(engine.behaviorAllowed(t, test::jls04(), t.assertion.clauses()[0].formula));
	}

	TEST_CASE("false has no witness")
	{
		Engine engine(test::backend());
		Formula ff;
		ff.kind = Formula::Kind::False;
		CHECK_FALSE(engine.behaviorAllowed(test::corpus("misc/lbodd.litmus"), test::jls04(), ff));
	}

	TEST_CASE("verdicts on CTC 1, CTC 4 and mt1_3")
	{
		Engine engine(test::backend());
		for (auto f : {"ctc/ctc01.litmus", "ctc/ctc04.litmus", "manson/mt1_3.litmus"}) {
			Verdict v = engine.judge(test::corpus(f), test::jls04());
			INFO(f << ": " << v.message);
			CHECK(v.outcome == Outcome::Pass);
		}
		Verdict v4 = engine.judge(test::corpus("ctc/ctc04.litmus"), test::jls04());
		CHECK(v4.witness() == nullptr);
		CHECK(v4.message == "forbidden behavior correctly absent");
		Verdict v1 = engine.judge(test::corpus("ctc/ctc01.litmus"), test::jls04());
		REQUIRE(v1.witness());
		CHECK(v1.message == "required behavior witnessed");
	}

	TEST_CASE("violated assertions fail")
	{
		Engine engine(test::backend());
		LitmusTest t = test::corpus("misc/lbodd.litmus");
		t.assertion.quantifier = BehaviorAssertion::Quantifier::NotExists;
		Verdict v = engine.judge(t, test::jls04());
		CHECK(v.outcome == Outcome::Fail);
		CHECK(v.witness() != nullptr);
		CHECK(exitCode(v.outcome) == 1);

		LitmusTest b5 = test::corpus("misc/lbodd-b5.litmus");
		b5.assertion.quantifier = BehaviorAssertion::Quantifier::Exists;
		Verdict u = engine.judge(b5, test::jls04());
		CHECK(u.outcome == Outcome::Fail);
		CHECK(u.witness() == nullptr);
	}

	TEST_CASE("exit codes")
	{
		CHECK(exitCode(Outcome::Pass) == 0);
		CHECK(exitCode(Outcome::Fail) == 1);
		CHECK(exitCode(Outcome::Unsupported) == 2);
		CHECK(exitCode(Outcome::Unknown) == 3);
	}

	TEST_CASE("unsupported programs yield an unsupported verdict")
	{
		auto file = std::filesystem::temp_directory_path() / "jmt-unsupported.litmus";
		{
			std::ofstream out(file);
			out << "Java U\n{ x = 0; }\na = x.getAndAdd(1);\nexists (1:a = 0)\n";
		}
		Engine engine(test::backend());
		Verdict v = judgeFile(engine, file.string(), test::jls04());
		CHECK(v.outcome == Outcome::Unsupported);
		std::filesystem::remove(file);
	}

	TEST_CASE("a smaller budget never turns a forbidden pass into a fail")
	{
		LitmusTest t = test::corpus("ctc/ctc04.litmus");
		for (std::size_t budget : {std::size_t(1), std::size_t(10), std::size_t(1000), std::size_t(2000000)}) {
			EngineConfig cfg;
			cfg.search.nodeBudget = budget;
			Engine engine(test::backend(), cfg);
			Outcome o = engine.judge(t, test::jls04()).outcome;
			CHECK((o == Outcome::Pass || o == Outcome::Unknown));
		}
	}

	TEST_CASE("parallel search finds the same witness")
	{
		LitmusTest t = test::corpus("ctc/ctc07.litmus");
		EngineConfig par;
		par.jobs = 4;
		Engine seq(test::backend()), many(test::backend(), par);
		Pool pool = seq.buildPool(t, test::jls04());
		AllowedResult a = seq.allowed(t, pool, t.assertion.formula);
		AllowedResult b = many.allowed(t, pool, t.assertion.formula);
		REQUIRE(a.witness);
		REQUIRE(b.witness);
		CHECK(a.witness->justification.target == b.witness->justification.target);
		CHECK(a.witness->justification.stages == b.witness->justification.stages);
	}

	TEST_CASE("JSON report")
	{
		Engine engine(test::backend());
		LitmusTest t = test::corpus("misc/lbodd.litmus");
		Verdict v = engine.judge(t, test::jls04());
		auto j = nlohmann::json::parse(verdictJson("lbodd.litmus", &t, v, true));
		CHECK(j["verdict"] == "pass");
		CHECK(j["file"] == "lbodd.litmus");
		CHECK(j.dump().find("stages") != std::string::npos);
		CHECK(justificationText(*v.witness()).find("stage 1") != std::string::npos);
	}
}

TEST_SUITE("x86")
{
	TEST_CASE("mixed-mode example compiles to the golden x86 test")
	{
		x86::Compiled c = x86::compile(test::corpus("misc/fig4a.litmus"));
		REQUIRE(c.program.threads.size() == 3);
		CHECK(lines(c.program.threads[0]) ==
		      std::vector<std::string>{"MOV [x],$2", "MOV EAX,[x]", "MOV EBX,[z]", "MOV ECX,[y]"});
		CHECK(lines(c.program.threads[1]) == std::vector<std::string>{"MOV [y],$2", "MFENCE", "MOV [x],$1", "MFENCE"});
		CHECK(lines(c.program.threads[2]) == std::vector<std::string>{"MOV EAX,[x]", "MOV EBX,[x]"});
		CHECK(x86::render(c.program) == readFile(test::path("tests/golden/fig4b.x86.litmus")));
		CHECK(c.program.condition == "(0:EAX=2 /\\ 0:EBX=0 /\\ 0:ECX=0 /\\ 2:EAX=1 /\\ 2:EBX=2)");
	}

	TEST_CASE("fences")
	{
		CHECK(compileText("VarHandle.acquireFence();\n") == std::vector<std::string>{"NOP"});
		CHECK(compileText("VarHandle.releaseFence();\n") == std::vector<std::string>{"NOP"});
		CHECK(compileText("VarHandle.loadLoadFence();\n") == std::vector<std::string>{"NOP"});
		CHECK(compileText("VarHandle.storeStoreFence();\n") == std::vector<std::string>{"NOP"});
		CHECK(compileText("VarHandle.fullFence();\n") == std::vector<std::string>{"MFENCE"});
	}

	TEST_CASE("loads and stores in every mode")
	{
		for (auto get : {"getPlain", "getOpaque", "getAcquire", "getVolatile"})
			CHECK(compileText(std::string("a = x.") + get + "();\n") == std::vector<std::string>{"MOV EAX,[x]"});
		for (auto set : {"setPlain", "setOpaque", "setRelease"})
			CHECK(compileText(std::string("x.") + set + "(1);\n") == std::vector<std::string>{"MOV [x],$1"});
		CHECK(compileText("x.setVolatile(1);\n") == std::vector<std::string>{"MOV [x],$1", "MFENCE"});
	}

	TEST_CASE("compare-and-exchange sequence")
	{
		auto got = compileText("a = y.getPlain();\nb = x.compareAndExchange(a, 2);\n");
		CHECK(got == std::vector<std::string>{"MOV EBX,[y]", "MOV EAX,EBX", "MOV EDX,$2", "LOCK CMPXCHG [x],EDX",
						      "MOV ECX,EAX"});
	}

	TEST_CASE("translation is local for straight-line code")
	{
		std::string a = "r1 = x.getPlain();\ny.setVolatile(1);\n", b = "VarHandle.fullFence();\nx.setRelease(2);\n";
		auto whole = compileText(a + b);
		auto first = compileText(a);
		auto second = compileText(b);
		first.insert(first.end(), second.begin(), second.end());
		CHECK(whole == first);
	}

	TEST_CASE("register map is invertible on assertion registers")
	{
		x86::Compiled c = x86::compile(test::corpus("misc/fig4a.litmus"));
		for (auto &[t, r] : registersOf(test::corpus("misc/fig4a.litmus"))) {
			auto hw = c.registers.hardware(t, r);
			REQUIRE(hw);
			CHECK(c.registers.source(t, *hw) == r);
		}
	}

	TEST_CASE("unsupported arithmetic is a compile error")
	{
		LitmusTest t = parseLitmus("Java M\n{ x = 0; }\na = x.getPlain();\nb = a * 2;\nx.setPlain(b);\nexists (true)\n");
		CHECK_THROWS_AS(x86::compile(t), CompileError);
	}

	TEST_CASE("parsing herd states")
	{
		auto states = x86::parseHerdOutput(readFile(test::path("tests/data/herd/sb-mfence.txt")));
		REQUIRE(states.size() == 3);
		for (auto &s : states)
			CHECK_FALSE((s.at({1, "EAX"}) == 0 && s.at({2, "EAX"}) == 0));
		auto one = x86::parseHerdOutput("Test T Allowed\nStates 1\n0:EAX=1;\nOk\n");
		REQUIRE(one.size() == 1);
		CHECK(one[0].at({1, "EAX"}) == 1);
		CHECK_THROWS_AS(x86::parseHerdOutput("nothing here"), HerdError);
		CHECK_THROWS_AS(x86::parseHerdOutput(readFile(test::path("tests/data/herd/garbage.txt"))), HerdError);
	}

	TEST_CASE("restoring behaviors")
	{
		x86::RegisterMap map;
		map.bind(1, "a", "EAX");
		CHECK(x86::restoreBehaviors({{{{1, "EAX"}, 2}}}, map) == std::vector<Behavior>{{{{1, "a"}, 2}}});
		CHECK(x86::restoreBehaviors({}, map).empty());
		CHECK_THROWS_AS(x86::restoreBehaviors({{{{2, "EAX"}, 2}}}, map), HerdError);

		x86::Compiled c = x86::compile(test::corpus("misc/fig4a.litmus"));
		auto states = x86::parseHerdOutput(readFile(test::path("tests/data/herd/fig4.txt")));
		auto bs = x86::restoreBehaviors(states, c.registers);
		REQUIRE(bs.size() == 1);
		CHECK(bs[0] == Behavior{{{1, "a"}, 2}, {{1, "b"}, 0}, {{1, "c"}, 0}, {{3, "d"}, 1}, {{3, "e"}, 2}});
	}

	TEST_CASE("running herd through a stand-in")
	{
		x86::Compiled c = x86::compile(test::corpus("jcstress/sb_volatile_00.litmus"));
		CHECK(x86::runHerd(c.program, mockHerd("sb-mfence.txt")).size() == 3);
		CHECK_THROWS_AS(x86::runHerd(c.program, mockHerd("fail")), HerdError);
		CHECK_THROWS_AS(x86::runHerd(c.program, mockHerd("garbage.txt")), HerdError);
		CHECK_THROWS_AS(x86::runHerd(c.program, mockHerd("sleep")), HerdError);
		x86::HerdConfig missing;
		missing.command = "/nonexistent/herd7";
		CHECK_THROWS_AS(x86::runHerd(c.program, missing), HerdError);
	}

	TEST_CASE("inclusion checks")
	{
		Engine engine(test::backend());
		LitmusTest lb = test::corpus("misc/lbodd.litmus");
		auto pass = x86::checkInclusion(engine, lb, test::jls04(), mockHerd("lbodd.txt"));
		CHECK(pass.outcome == Outcome::Pass);
		CHECK(pass.behaviors.size() == 2);

		auto fail = x86::checkInclusion(engine, lb, test::jls04(), mockHerd("lbodd-bogus.txt"));
		CHECK(fail.outcome == Outcome::Fail);
		REQUIRE(fail.witness);
		CHECK(fail.witness->at({1, "b"}) == 0);

		LitmusTest sb = test::corpus("jcstress/sb_volatile_00.litmus");
		CHECK(x86::checkInclusion(engine, sb, test::jls04(), mockHerd("sb-mfence.txt")).outcome == Outcome::Pass);

		LitmusTest seq = parseLitmus("Java S\n{ x = 0; }\nx.setPlain(1);\na = x.getPlain();\nexists (1:a = 1)\n");
		CHECK(x86::checkInclusion(engine, seq, test::jls04(), std::vector<Behavior>{{{{1, "a"}, 1}}}).outcome ==
		      Outcome::Pass);
	}
}

TEST_SUITE("jcstress")
{
	TEST_CASE("SB+rfis source")
	{
		Engine engine(test::backend());
		LitmusTest t = test::corpus("misc/sb-rfis.litmus");
		auto allowed = jcstress::allowedBehaviors(engine, t, test::jls04(), {0, 1});
		std::string java = jcstress::generate(t, allowed);
		CHECK(java == readFile(test::path("tests/golden/SB_rfis.java")));
		std::size_t actors = 0;
		for (std::size_t p = java.find("@Actor"); p != std::string::npos; p = java.find("@Actor", p + 1))
			actors++;
		CHECK(actors == 2);
		for (auto f : {"public int a;", "public int b;", "public int c;", "public int d;"})
			CHECK(java.find(f) != std::string::npos);
		CHECK(java.find("@Outcome(id = \"1, 0, 1, 0\", expect = Expect.ACCEPTABLE") != std::string::npos);
		CHECK(jcstress::className("SB+rfis") == "SB_rfis");
	}

	TEST_CASE("single store and load")
	{
		LitmusTest t = parseLitmus("Java One\n{ x = 0; }\nx.setOpaque(1);\na = x.getOpaque();\nexists (1:a = 1)\n");
		std::string java = jcstress::generate(t);
		CHECK(java.find("public void actor1(Regs r)") != std::string::npos);
		CHECK(java.find("actor2") == std::string::npos);
		CHECK(java.find("public int a;") != std::string::npos);
		CHECK(java.find("VH_x.setOpaque(this, 1);") != std::string::npos);
		CHECK(java.find("ACCEPTABLE_INTERESTING") != std::string::npos);
		CHECK(jcstress::resultRegisters(t) == std::vector<RegisterRef>{{1, "a"}});
	}

	TEST_CASE("LbOdd accepts the out-of-thin-air-looking outcome allowed by the model")
	{
		Engine engine(test::backend());
		LitmusTest t = test::corpus("misc/lbodd.litmus");
		auto allowed = jcstress::allowedBehaviors(engine, t, test::jls04(), {0, 1});
		std::string java = jcstress::generate(t, allowed);
		CHECK(java.find("@Outcome(id = \"1, 1, 1\", expect = Expect.ACCEPTABLE") != std::string::npos);
		CHECK(java.find("@Outcome(id = \"1, 0, 1\"") == std::string::npos);
		CHECK(java.find("Expect.FORBIDDEN") != std::string::npos);
	}

	TEST_CASE("mode mapping is total and injective")
	{
		std::set<std::string> gets, sets, fences;
		for (auto m : {ReadMode::Pln, ReadMode::Opq, ReadMode::Acq, ReadMode::Vol})
			gets.insert(jcstress::varHandleGet(m));
		for (auto m : {WriteMode::Pln, WriteMode::Opq, WriteMode::Rel, WriteMode::Vol})
			sets.insert(jcstress::varHandleSet(m));
		for (auto m : {FenceMode::WW, FenceMode::RR, FenceMode::Acq, FenceMode::Rel, FenceMode::Full})
			fences.insert(jcstress::varHandleFence(m));
		CHECK(gets.size() == 4);
		CHECK(sets.size() == 4);
		CHECK(fences.size() == 5);
		CHECK(std::string(jcstress::varHandleCax(ReadMode::Vol, WriteMode::Vol)) == "compareAndExchange");
		CHECK(std::string(jcstress::varHandleCax(ReadMode::Acq, WriteMode::Pln)) == "compareAndExchangeAcquire");
		CHECK(std::string(jcstress::varHandleCax(ReadMode::Pln, WriteMode::Rel)) == "compareAndExchangeRelease");
		CHECK_THROWS_AS(jcstress::varHandleCax(ReadMode::Opq, WriteMode::Opq), CompileError);
	}
}
