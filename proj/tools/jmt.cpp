#include "jmt/behavior.hpp"
#include "jmt/error.hpp"
#include "jmt/graph_builder.hpp"
#include "jmt/jcstress.hpp"
#include "jmt/x86.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace jmt;

namespace {

constexpr int exitUsage = 64;

struct Options {
	std::string solver;
	int smtTimeout = 30000;
	std::string herd;
	std::size_t commitBound = 0;
	std::size_t maxStages = 0;
	std::size_t nodeBudget = 2000000;
	bool json = false;
	bool showJustification = false;
	std::string smtDump;
	unsigned jobs = 1;
};

smt::SolverConfig solverConfig(const Options &o)
{
	if (o.solver.empty()) {
		smt::SolverConfig c = smt::defaultSolverConfig();
		c.timeoutMs = o.smtTimeout;
		return c;
	}
	return smt::solverConfigFor(o.solver, o.smtTimeout);
}

EngineConfig engineConfig(const Options &o)
{
	EngineConfig c;
	c.search.commitBound = o.commitBound;
	c.search.maxStages = o.maxStages;
	c.search.nodeBudget = o.nodeBudget;
	c.search.smtTimeoutMs = o.smtTimeout;
	c.jobs = o.jobs;
	return c;
}

void requireFile(const std::string &path)
{
	if (!fs::exists(path))
		throw CLI::ValidationError(path + ": no such file or directory");
}

std::vector<std::string> litmusFiles(const std::string &path)
{
	if (!fs::is_directory(path))
		return {path};
	std::vector<std::string> out;
	for (auto &e : fs::recursive_directory_iterator(path))
		if (e.is_regular_file() && e.path().extension() == ".litmus")
			out.push_back(e.path().string());
	std::sort(out.begin(), out.end());
	return out;
}

void writeOutput(const std::string &path, const std::string &text)
{
	if (path.empty() || path == "-") {
		std::cout << text;
		return;
	}
	std::ofstream os(path);
	if (!os)
		throw Error("cannot write " + path);
	os << text;
}

int runCheck(const Options &o, const std::string &target, const std::string &catPath)
{
	requireFile(target);
	requireFile(catPath);
	CatModel sem = parseCatFile(catPath);
	smt::Backend backend(solverConfig(o));
	if (!o.smtDump.empty()) {
		fs::create_directories(o.smtDump);
		backend.setDumpDirectory(o.smtDump);
	}
	Engine engine(backend, engineConfig(o));
	std::vector<std::string> files = litmusFiles(target);
	int worst = 0;
	nlohmann::json reports = nlohmann::json::array();
	for (auto &file : files) {
		Verdict v;
		std::optional<LitmusTest> test;
		try {
			test = parseLitmusFile(file);
			v = engine.judge(*test, sem);
		} catch (const UnsupportedFeature &e) {
			v.outcome = Outcome::Unsupported;
			v.message = e.what();
		}
		int code = exitCode(v.outcome);
		worst = std::max(worst, code);
		if (o.json) {
			reports.push_back(nlohmann::json::parse(verdictJson(file, test ? &*test : nullptr, v, o.showJustification)));
			continue;
		}
		std::string verdict = toString(v.outcome);
		for (auto &c : verdict)
			c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
		std::cout << verdict << "  " << file << "  (" << v.message;
		if (v.outcome != Outcome::Unsupported)
			std::cout << ", " << std::fixed << std::setprecision(2) << v.seconds << "s";
		std::cout << ")\n";
		if (const Witness *w = v.witness()) {
			std::cout << "  witness: " << toString(w->behavior) << " (" << w->justification.stages.size()
				  << " stages)\n";
			if (o.showJustification) {
				std::istringstream in(justificationText(*w));
				for (std::string line; std::getline(in, line);)
					std::cout << "    " << line << "\n";
			}
		}
	}
	if (o.json)
		std::cout << (files.size() == 1 && fs::is_regular_file(target) ? reports[0] : reports).dump(2) << "\n";
	return worst;
}

int runToHerd(const std::string &litmus, const std::string &out)
{
	requireFile(litmus);
	x86::Compiled c = x86::compile(parseLitmusFile(litmus));
	writeOutput(out, x86::render(c.program));
	return 0;
}

int runWithHerd(const Options &o, const std::string &litmus, const std::string &catPath)
{
	requireFile(litmus);
	requireFile(catPath);
	LitmusTest test = parseLitmusFile(litmus);
	CatModel sem = parseCatFile(catPath);
	smt::Backend backend(solverConfig(o));
	Engine engine(backend, engineConfig(o));
	x86::HerdConfig hc = x86::defaultHerdConfig();
	if (!o.herd.empty())
		hc.command = o.herd;
	x86::InclusionResult r = x86::checkInclusion(engine, test, sem, hc);
	if (o.json) {
		nlohmann::json j;
		j["file"] = litmus;
		j["verdict"] = toString(r.outcome);
		j["message"] = r.message;
		j["behaviors"] = nlohmann::json::array();
		for (auto &b : r.behaviors)
			j["behaviors"].push_back(toString(b));
		if (r.witness)
			j["witness"] = toString(*r.witness);
		std::cout << j.dump(2) << "\n";
	} else {
		std::string verdict = toString(r.outcome);
		for (auto &c : verdict)
			c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
		std::cout << verdict << "  " << litmus << "  (" << r.message << ")\n";
		for (auto &b : r.behaviors)
			std::cout << "  x86: " << toString(b) << (r.witness && *r.witness == b ? "  <- not allowed" : "") << "\n";
	}
	return exitCode(r.outcome);
}

int runToJcstress(const Options &o, const std::string &litmus, const std::string &catPath, const std::string &values,
		  const std::string &out)
{
	requireFile(litmus);
	LitmusTest test = parseLitmusFile(litmus);
	std::optional<std::vector<Behavior>> allowed;
	if (!catPath.empty()) {
		requireFile(catPath);
		std::vector<Value> vals;
		std::stringstream ss(values);
		for (std::string v; std::getline(ss, v, ',');)
			vals.push_back(static_cast<Value>(std::stoul(v)));
		smt::Backend backend(solverConfig(o));
		Engine engine(backend, engineConfig(o));
		allowed = jcstress::allowedBehaviors(engine, test, parseCatFile(catPath), vals);
	}
	writeOutput(out, jcstress::generate(test, allowed));
	return 0;
}

int runGraphs(const Options &o, const std::string &litmus, const std::string &catPath, bool dot)
{
	requireFile(litmus);
	LitmusTest test = parseLitmusFile(litmus);
	smt::Backend backend(solverConfig(o));
	Pool pool;
	if (catPath.empty()) {
		smt::SolverSatOracle oracle(backend);
		pool = buildCandidateGraphs(test, oracle);
	} else {
		requireFile(catPath);
		Engine engine(backend, engineConfig(o));
		pool = engine.buildPool(test, parseCatFile(catPath));
	}
	for (std::size_t i = 0; i < pool.size(); i++) {
		if (dot)
			std::cout << dumpDot(pool[i], "G" + std::to_string(i));
		else
			std::cout << "graph #" << i << "\n" << dumpText(pool[i]) << "\n";
	}
	return 0;
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"Checks Java litmus tests against axiomatic memory models"};
	app.require_subcommand(1);
	Options o;
	app.add_option("--smt-solver", o.solver, "SMT solver command (default: $JMT_SMT_SOLVER or z3)");
	app.add_option("--smt-timeout", o.smtTimeout, "Per-query SMT timeout in milliseconds");
	app.add_option("--herd-path", o.herd, "herd executable (default: $JMT_HERD or herd7)");
	app.add_option("--commit-bound", o.commitBound, "Maximum events committed per stage (0: unbounded)");
	app.add_option("--max-stages", o.maxStages, "Maximum justification length (0: events + 1)");
	app.add_option("--node-budget", o.nodeBudget, "Search node budget per target graph");
	app.add_flag("--json", o.json, "Machine-readable report");
	app.add_flag("--show-justification", o.showJustification, "Print witness justifications");
	app.add_option("--smt-dump", o.smtDump, "Directory receiving every SMT query");
	app.add_option("--jobs,-j", o.jobs, "Parallel target searches")->check(CLI::PositiveNumber);

	std::string litmus, cat, out, values = "0,1";
	bool dot = false;

	auto *check = app.add_subcommand("check", "Judge the assertion of a litmus test (or a directory of them)");
	check->add_option("litmus", litmus, "Litmus file or directory")->required();
	check->add_option("model", cat, ".cat model")->required();

	auto *toHerd = app.add_subcommand("to-herd-x86", "Compile a litmus test to an x86 litmus test");
	toHerd->add_option("litmus", litmus)->required();
	toHerd->add_option("-o,--output", out, "Output file");

	auto *withHerd = app.add_subcommand("with-herd-x86", "Check x86 behaviors computed by herd against the model");
	withHerd->add_option("litmus", litmus)->required();
	withHerd->add_option("model", cat)->required();

	auto *toJ = app.add_subcommand("to-jcstress", "Generate a jcstress test");
	toJ->add_option("litmus", litmus)->required();
	toJ->add_option("model", cat, "Model used to classify outcomes (optional)");
	toJ->add_option("--values", values, "Comma-separated register values enumerated for outcomes");
	toJ->add_option("-o,--output", out, "Output file");

	auto *graphs = app.add_subcommand("graphs", "Print symbolic candidate graphs");
	graphs->add_option("litmus", litmus)->required();
	graphs->add_option("model", cat, "Keep only graphs consistent with this model");
	graphs->add_flag("--dot", dot, "Graphviz output");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		int code = app.exit(e);
		return code == 0 ? 0 : exitUsage;
	}

	try {
		if (*check)
			return runCheck(o, litmus, cat);
		if (*toHerd)
			return runToHerd(litmus, out);
		if (*withHerd)
			return runWithHerd(o, litmus, cat);
		if (*toJ)
			return runToJcstress(o, litmus, cat, values, out);
		if (*graphs)
			return runGraphs(o, litmus, cat, dot);
	} catch (const CLI::ValidationError &e) {
		std::cerr << "jmt: " << e.what() << "\n";
		return exitUsage;
	} catch (const UnsupportedFeature &e) {
		std::cerr << "jmt: unsupported: " << e.what() << "\n";
		return exitCode(Outcome::Unsupported);
	} catch (const ParseError &e) {
		std::cerr << "jmt: " << e.what() << "\n";
		return exitUsage;
	} catch (const CompileError &e) {
		std::cerr << "jmt: unsupported: " << e.what() << "\n";
		return exitCode(Outcome::Unsupported);
	} catch (const std::exception &e) {
		std::cerr << "jmt: " << e.what() << "\n";
		return exitCode(Outcome::Unknown);
	}
	return exitUsage;
}
