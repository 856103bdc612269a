#include "jmt/behavior.hpp"
#include "jmt/cat.hpp"
#include "jmt/jcstress.hpp"
#include "jmt/litmus.hpp"
#include "jmt/smt.hpp"
#include "jmt/x86.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace jmt;

namespace {

struct Session {
	explicit Session(const std::string &model, const std::string &solver, int timeoutMs)
	    : sem(parseCatFile(model)),
	      backend(solver.empty() ? smt::defaultSolverConfig() : smt::solverConfigFor(solver, timeoutMs))
	{
	}

	Engine engine(unsigned jobs, std::size_t nodeBudget)
	{
		EngineConfig cfg;
		cfg.jobs = jobs;
		if (nodeBudget)
			cfg.search.nodeBudget = nodeBudget;
		return Engine(backend, cfg);
	}

	CatModel sem;
	smt::Backend backend;
};

std::map<std::string, Value> toPy(const Behavior &b)
{
	std::map<std::string, Value> out;
	for (auto &[r, v] : b)
		out[std::to_string(r.first) + ":" + r.second] = v;
	return out;
}

Behavior fromPy(const std::map<std::string, Value> &m)
{
	Behavior b;
	for (auto &[k, v] : m) {
		auto colon = k.find(':');
		if (colon == std::string::npos)
			throw py::value_error("register keys look like '1:a', got '" + k + "'");
		b[{static_cast<ThreadId>(std::stoul(k.substr(0, colon))), k.substr(colon + 1)}] = v;
	}
	return b;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
	auto error = py::register_exception<Error>(m, "JmtError");
	py::register_exception<ParseError>(m, "ParseError", error.ptr());
	py::register_exception<SolverError>(m, "SolverError", error.ptr());
	py::register_exception<HerdError>(m, "HerdError", error.ptr());
	py::register_exception<CompileError>(m, "CompileError", error.ptr());
	py::register_exception<ModelError>(m, "ModelError", error.ptr());

	m.def("normalize_litmus", [](const std::string &text) { return toString(parseLitmus(text)); },
	      py::arg("text"));
	m.def("registers", [](const std::string &text) {
		std::vector<std::string> out;
		for (auto &[t, r] : registersOf(parseLitmus(text)))
			out.push_back(std::to_string(t) + ":" + r);
		return out;
	}, py::arg("text"));
	m.def("to_herd_x86", [](const std::string &text) { return x86::render(x86::compile(parseLitmus(text)).program); },
	      py::arg("text"));

	py::class_<Session>(m, "Session")
		.def(py::init<const std::string &, const std::string &, int>(), py::arg("model"),
		     py::arg("solver") = "", py::arg("timeout_ms") = 30000)
		.def("pool_size", [](Session &s, const std::string &text) {
			py::gil_scoped_release release;
			return s.engine(1, 0).buildPool(parseLitmus(text), s.sem).size();
		}, py::arg("text"))
		.def("check", [](Session &s, const std::string &text, bool justification, unsigned jobs, std::size_t budget) {
			std::string json;
			{
				py::gil_scoped_release release;
				LitmusTest t = parseLitmus(text);
				Engine e = s.engine(jobs, budget);
				Verdict v = e.judge(t, s.sem);
				json = verdictJson(t.name, &t, v, justification);
			}
			return py::module_::import("json").attr("loads")(json);
		}, py::arg("text"), py::arg("justification") = false, py::arg("jobs") = 1, py::arg("node_budget") = 0)
		.def("allowed_behaviors", [](Session &s, const std::string &text, const std::vector<Value> &values) {
			std::vector<std::map<std::string, Value>> out;
			py::gil_scoped_release release;
			Engine e = s.engine(1, 0);
			for (auto &b : jcstress::allowedBehaviors(e, parseLitmus(text), s.sem, values))
				out.push_back(toPy(b));
			return out;
		}, py::arg("text"), py::arg("values") = std::vector<Value>{0, 1})
		.def("check_inclusion", [](Session &s, const std::string &text,
					   const std::vector<std::map<std::string, Value>> &behaviors) {
			std::vector<Behavior> bs;
			for (auto &b : behaviors)
				bs.push_back(fromPy(b));
			py::gil_scoped_release release;
			Engine e = s.engine(1, 0);
			auto r = x86::checkInclusion(e, parseLitmus(text), s.sem, bs);
			std::optional<std::map<std::string, Value>> witness;
			if (r.witness)
				witness = toPy(*r.witness);
			return std::make_pair(std::string(toString(r.outcome)), witness);
		}, py::arg("text"), py::arg("behaviors"))
		.def("to_jcstress", [](Session &s, const std::string &text, const std::vector<Value> &values) {
			py::gil_scoped_release release;
			LitmusTest t = parseLitmus(text);
			Engine e = s.engine(1, 0);
			return jcstress::generate(t, jcstress::allowedBehaviors(e, t, s.sem, values));
		}, py::arg("text"), py::arg("values") = std::vector<Value>{0, 1});
}
