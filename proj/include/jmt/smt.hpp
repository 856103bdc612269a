#pragma once

#include "jmt/expr.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace jmt::smt {

/* SMT-LIB v2 terms over 32-bit bitvectors. */
std::string quote(const std::string &name);
std::string bvTerm(const Expr &e);
std::string boolTerm(const Expr &e);

struct Query {
	std::string comment;
	std::vector<Expr> assertions;
};

/* Byte-stable QF_BV script: declarations sorted by name, assertions in order. */
std::string toSmtLib(const Query &q);
std::vector<std::string> variables(const Query &q);

enum class Status { Sat, Unsat, Unknown };
const char *toString(Status s);

struct Result {
	Status status = Status::Unknown;
	std::map<std::string, Value> model;
};

struct SolverConfig {
	std::string command = "z3";
	std::vector<std::string> args;
	int timeoutMs = 30000;
};

/* z3 on PATH unless JMT_SMT_SOLVER names another binary. */
SolverConfig defaultSolverConfig();
SolverConfig solverConfigFor(const std::string &command, int timeoutMs);

/* One persistent solver child speaking SMT-LIB over pipes; reset between queries. */
class SolverProcess {
public:
	explicit SolverProcess(SolverConfig cfg);
	~SolverProcess();
	SolverProcess(const SolverProcess &) = delete;
	SolverProcess &operator=(const SolverProcess &) = delete;

	Result solve(const Query &q, int timeoutMs);

private:
	void start();
	void stop();
	void send(const std::string &text);
	/* Reads one line, or one balanced s-expression when sexpr is set. */
	bool receive(std::string &out, bool sexpr, long long deadlineMs);

	SolverConfig cfg_;
	int pid_ = -1;
	int in_ = -1, out_ = -1;
	std::string buffer_;
};

/* Parses the answer to (get-value ...). */
std::map<std::string, Value> parseValues(const std::string &text);

/* Thread-safe front end: process pool, result cache, optional query dump. */
class Backend {
public:
	explicit Backend(SolverConfig cfg = defaultSolverConfig());
	~Backend();

	Result check(const Query &q, int timeoutMs = -1);
	const SolverConfig &config() const { return cfg_; }
	void setDumpDirectory(std::string dir) { dumpDir_ = std::move(dir); }
	void setCaching(bool on) { caching_ = on; }

	std::size_t queries() const { return queries_; }
	std::size_t solverCalls() const { return calls_; }

private:
	std::unique_ptr<SolverProcess> acquire();
	void release(std::unique_ptr<SolverProcess> p);

	SolverConfig cfg_;
	std::mutex mu_;
	std::vector<std::unique_ptr<SolverProcess>> idle_;
	std::map<std::string, Result> cache_;
	std::string dumpDir_;
	bool caching_ = true;
	std::atomic<std::size_t> queries_{0}, calls_{0}, dumped_{0};
};

/* Decides satisfiability of register constraints; Unknown keeps a graph. */
class SatOracle {
public:
	virtual ~SatOracle() = default;
	virtual Status check(const std::vector<Expr> &constraints) = 0;
};

class SolverSatOracle : public SatOracle {
public:
	explicit SolverSatOracle(Backend &b, int timeoutMs = 10000) : backend_(b), timeoutMs_(timeoutMs) {}
	Status check(const std::vector<Expr> &constraints) override;

private:
	Backend &backend_;
	int timeoutMs_;
};

} // namespace jmt::smt
