#include "jmt/smt.hpp"
#include "jmt/error.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cctype>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <poll.h>
#include <set>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace jmt::smt {

std::string quote(const std::string &name)
{
	return "|" + name + "|";
}

static std::string hex(Value v)
{
	char buf[16];
	std::snprintf(buf, sizeof buf, "#x%08x", v);
	return buf;
}

static const char *bvOp(Expr::Op op)
{
	switch (op) {
	case Expr::Op::Add: return "bvadd";
	case Expr::Op::Sub: return "bvsub";
	case Expr::Op::Mul: return "bvmul";
	case Expr::Op::BitAnd: return "bvand";
	case Expr::Op::BitOr: return "bvor";
	case Expr::Op::BitXor: return "bvxor";
	default: return nullptr;
	}
}

std::string bvTerm(const Expr &e)
{
	switch (e.op) {
	case Expr::Op::Const: return hex(e.value);
	case Expr::Op::Var: return quote(e.name);
	default: break;
	}
	if (e.isBoolean())
		return "(ite " + boolTerm(e) + " #x00000001 #x00000000)";
	return std::string("(") + bvOp(e.op) + " " + bvTerm(e.args[0]) + " " + bvTerm(e.args[1]) + ")";
}

std::string boolTerm(const Expr &e)
{
	auto bin = [&](const char *op) {
		return std::string("(") + op + " " + bvTerm(e.args[0]) + " " + bvTerm(e.args[1]) + ")";
	};
	switch (e.op) {
	case Expr::Op::Eq: return bin("=");
	case Expr::Op::Ne: return bin("distinct");
	case Expr::Op::Lt: return bin("bvult");
	case Expr::Op::Le: return bin("bvule");
	case Expr::Op::Gt: return bin("bvugt");
	case Expr::Op::Ge: return bin("bvuge");
	case Expr::Op::Not: return "(not " + boolTerm(e.args[0]) + ")";
	case Expr::Op::And: return "(and " + boolTerm(e.args[0]) + " " + boolTerm(e.args[1]) + ")";
	case Expr::Op::Or: return "(or " + boolTerm(e.args[0]) + " " + boolTerm(e.args[1]) + ")";
	case Expr::Op::Const: return e.value ? "true" : "false";
	default: return "(distinct " + bvTerm(e) + " #x00000000)";
	}
}

std::vector<std::string> variables(const Query &q)
{
	std::set<std::string> vars;
	for (auto &a : q.assertions)
		collectVars(a, vars);
	return {vars.begin(), vars.end()};
}

std::string toSmtLib(const Query &q)
{
	std::string out;
	if (!q.comment.empty())
		out += "; " + q.comment + "\n";
	out += "(set-logic QF_BV)\n";
	for (auto &v : variables(q))
		out += "(declare-const " + quote(v) + " (_ BitVec 32))\n";
	for (auto &a : q.assertions)
		out += "(assert " + boolTerm(a) + ")\n";
	out += "(check-sat)\n";
	return out;
}

const char *toString(Status s)
{
	switch (s) {
	case Status::Sat: return "sat";
	case Status::Unsat: return "unsat";
	case Status::Unknown: return "unknown";
	}
	return "?";
}

SolverConfig solverConfigFor(const std::string &command, int timeoutMs)
{
	SolverConfig cfg;
	cfg.timeoutMs = timeoutMs;
	/* whitespace-separated command line; defaults depend on the solver */
	std::vector<std::string> words;
	std::size_t i = 0;
	while (i < command.size()) {
		while (i < command.size() && command[i] == ' ')
			i++;
		std::size_t j = i;
		while (j < command.size() && command[j] != ' ')
			j++;
		if (j > i)
			words.push_back(command.substr(i, j - i));
		i = j;
	}
	if (words.empty())
		words.push_back("z3");
	cfg.command = words[0];
	cfg.args.assign(words.begin() + 1, words.end());
	if (cfg.args.empty()) {
		std::string base = cfg.command.substr(cfg.command.find_last_of('/') + 1);
		if (base.find("cvc") != std::string::npos)
			cfg.args = {"--lang=smt2", "--incremental"};
		else
			cfg.args = {"-in", "-smt2"};
	}
	return cfg;
}

SolverConfig defaultSolverConfig()
{
	const char *env = std::getenv("JMT_SMT_SOLVER");
	return solverConfigFor(env && *env ? env : "z3", 30000);
}

/* ---------------------------------------------------------------- process */

static long long nowMs()
{
	using namespace std::chrono;
	return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

SolverProcess::SolverProcess(SolverConfig cfg) : cfg_(std::move(cfg))
{
	std::signal(SIGPIPE, SIG_IGN);
}

SolverProcess::~SolverProcess()
{
	stop();
}

void SolverProcess::start()
{
	int toChild[2], fromChild[2];
	if (pipe(toChild) != 0 || pipe(fromChild) != 0)
		throw SolverError("pipe failed");
	int errPipe[2];
	if (pipe(errPipe) != 0)
		throw SolverError("pipe failed");
	pid_t pid = fork();
	if (pid < 0)
		throw SolverError("fork failed");
	if (pid == 0) {
		dup2(toChild[0], 0);
		dup2(fromChild[1], 1);
		int devnull = open("/dev/null", O_WRONLY);
		if (devnull >= 0)
			dup2(devnull, 2);
		close(toChild[0]);
		close(toChild[1]);
		close(fromChild[0]);
		close(fromChild[1]);
		close(errPipe[0]);
		fcntl(errPipe[1], F_SETFD, FD_CLOEXEC);
		std::vector<char *> argv;
		argv.push_back(const_cast<char *>(cfg_.command.c_str()));
		for (auto &a : cfg_.args)
			argv.push_back(const_cast<char *>(a.c_str()));
		argv.push_back(nullptr);
		execvp(argv[0], argv.data());
		int err = errno;
		ssize_t ignored = write(errPipe[1], &err, sizeof err);
		(void)ignored;
		_exit(127);
	}
	close(toChild[0]);
	close(fromChild[1]);
	close(errPipe[1]);
	int err = 0;
	ssize_t n = read(errPipe[0], &err, sizeof err);
	close(errPipe[0]);
	if (n == sizeof err) {
		close(toChild[1]);
		close(fromChild[0]);
		waitpid(pid, nullptr, 0);
		throw SolverError("cannot run SMT solver '" + cfg_.command + "': " + std::strerror(err));
	}
	pid_ = pid;
	in_ = toChild[1];
	out_ = fromChild[0];
	buffer_.clear();
}

void SolverProcess::stop()
{
	if (pid_ < 0)
		return;
	close(in_);
	close(out_);
	kill(pid_, SIGKILL);
	waitpid(pid_, nullptr, 0);
	pid_ = -1;
	in_ = out_ = -1;
	buffer_.clear();
}

void SolverProcess::send(const std::string &text)
{
	std::size_t off = 0;
	while (off < text.size()) {
		ssize_t n = write(in_, text.data() + off, text.size() - off);
		if (n < 0) {
			if (errno == EINTR)
				continue;
			throw SolverError("SMT solver closed its input");
		}
		off += static_cast<std::size_t>(n);
	}
}

static bool balancedPrefix(const std::string &s, std::size_t &end)
{
	int depth = 0;
	bool started = false, inQuote = false;
	for (std::size_t i = 0; i < s.size(); i++) {
		char c = s[i];
		if (inQuote) {
			if (c == '|')
				inQuote = false;
			continue;
		}
		if (c == '|')
			inQuote = true;
		else if (c == '(') {
			depth++;
			started = true;
		} else if (c == ')') {
			depth--;
			if (started && depth == 0) {
				end = i + 1;
				return true;
			}
		}
	}
	return false;
}

bool SolverProcess::receive(std::string &out, bool sexpr, long long deadline)
{
	for (;;) {
		if (sexpr) {
			std::size_t end;
			if (balancedPrefix(buffer_, end)) {
				out = buffer_.substr(0, end);
				buffer_.erase(0, end);
				return true;
			}
		} else {
			std::size_t nl = buffer_.find('\n');
			if (nl != std::string::npos) {
				out = buffer_.substr(0, nl);
				buffer_.erase(0, nl + 1);
				if (!out.empty() && out.back() == '\r')
					out.pop_back();
				if (out.empty())
					continue;
				return true;
			}
		}
		long long left = deadline - nowMs();
		if (left <= 0)
			return false;
		pollfd pfd{out_, POLLIN, 0};
		int r = poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1 << 30)));
		if (r < 0 && errno == EINTR)
			continue;
		if (r <= 0)
			return false;
		char buf[4096];
		ssize_t n = read(out_, buf, sizeof buf);
		if (n <= 0)
			throw SolverError("SMT solver terminated unexpectedly");
		buffer_.append(buf, static_cast<std::size_t>(n));
	}
}

Result SolverProcess::solve(const Query &q, int timeoutMs)
{
	if (pid_ < 0)
		start();
	long long deadline = nowMs() + (timeoutMs > 0 ? timeoutMs : 1LL << 40);
	std::string script = "(reset)\n(set-option :produce-models true)\n" + toSmtLib(q);
	Result res;
	try {
		send(script);
		std::string line;
		if (!receive(line, false, deadline)) {
			stop();
			return res;
		}
		if (line.rfind("(error", 0) == 0) {
			stop();
			throw SolverError("SMT solver error: " + line);
		}
		if (line == "unsat") {
			res.status = Status::Unsat;
			return res;
		}
		if (line != "sat") {
			if (line != "unknown" && line != "timeout") {
				stop();
				throw SolverError("unexpected SMT solver answer: " + line);
			}
			return res;
		}
		res.status = Status::Sat;
		auto vars = variables(q);
		if (!vars.empty()) {
			std::string req = "(get-value (";
			for (auto &v : vars)
				req += quote(v) + " ";
			req += "))\n";
			send(req);
			std::string answer;
			if (!receive(answer, true, deadline)) {
				stop();
				res.status = Status::Unknown;
				return res;
			}
			if (answer.rfind("(error", 0) == 0) {
				stop();
				throw SolverError("SMT solver error: " + answer);
			}
			res.model = parseValues(answer);
		}
	} catch (const SolverError &) {
		stop();
		throw;
	}
	return res;
}

/* ---------------------------------------------------------------- model parsing */

namespace {

struct SExpr {
	std::string atom;
	std::vector<SExpr> list;
	bool isList = false;
};

SExpr parseSExpr(const std::string &s, std::size_t &i)
{
	while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
		i++;
	if (i >= s.size())
		throw SolverError("truncated s-expression");
	SExpr e;
	if (s[i] == '(') {
		e.isList = true;
		i++;
		for (;;) {
			while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
				i++;
			if (i >= s.size())
				throw SolverError("truncated s-expression");
			if (s[i] == ')') {
				i++;
				return e;
			}
			e.list.push_back(parseSExpr(s, i));
		}
	}
	if (s[i] == '|') {
		std::size_t end = s.find('|', i + 1);
		if (end == std::string::npos)
			throw SolverError("unterminated quoted symbol");
		e.atom = s.substr(i + 1, end - i - 1);
		i = end + 1;
		return e;
	}
	std::size_t j = i;
	while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')')
		j++;
	e.atom = s.substr(i, j - i);
	i = j;
	return e;
}

Value literal(const SExpr &e)
{
	if (e.isList) {
		/* (_ bvN 32) */
		if (e.list.size() == 3 && e.list[0].atom == "_" && e.list[1].atom.rfind("bv", 0) == 0)
			return static_cast<Value>(std::stoull(e.list[1].atom.substr(2)));
		throw SolverError("unsupported value in model");
	}
	const std::string &a = e.atom;
	if (a.rfind("#x", 0) == 0)
		return static_cast<Value>(std::stoull(a.substr(2), nullptr, 16));
	if (a.rfind("#b", 0) == 0)
		return static_cast<Value>(std::stoull(a.substr(2), nullptr, 2));
	throw SolverError("unsupported value '" + a + "' in model");
}

} // namespace

std::map<std::string, Value> parseValues(const std::string &text)
{
	std::size_t i = 0;
	SExpr root = parseSExpr(text, i);
	std::map<std::string, Value> out;
	for (auto &p : root.list) {
		if (!p.isList || p.list.size() != 2)
			throw SolverError("malformed get-value answer");
		out[p.list[0].atom] = literal(p.list[1]);
	}
	return out;
}

/* ---------------------------------------------------------------- backend */

Backend::Backend(SolverConfig cfg) : cfg_(std::move(cfg)) {}
Backend::~Backend() = default;

std::unique_ptr<SolverProcess> Backend::acquire()
{
	std::lock_guard<std::mutex> lock(mu_);
	if (!idle_.empty()) {
		auto p = std::move(idle_.back());
		idle_.pop_back();
		return p;
	}
	return std::make_unique<SolverProcess>(cfg_);
}

void Backend::release(std::unique_ptr<SolverProcess> p)
{
	std::lock_guard<std::mutex> lock(mu_);
	idle_.push_back(std::move(p));
}

Result Backend::check(const Query &q, int timeoutMs)
{
	if (timeoutMs < 0)
		timeoutMs = cfg_.timeoutMs;
	queries_++;
	Query body{std::string(), q.assertions};
	std::string key = toSmtLib(body);
	if (caching_) {
		std::lock_guard<std::mutex> lock(mu_);
		auto it = cache_.find(key);
		if (it != cache_.end())
			return it->second;
	}
	if (!dumpDir_.empty()) {
		std::size_t n = dumped_++;
		char name[32];
		std::snprintf(name, sizeof name, "/query-%05zu.smt2", n);
		std::ofstream(dumpDir_ + name) << toSmtLib(q);
	}
	calls_++;
	auto proc = acquire();
	Result r = proc->solve(q, timeoutMs);
	release(std::move(proc));
	if (r.status == Status::Sat) {
		/* re-substitute the model into every assertion */
		Env env(r.model.begin(), r.model.end());
		for (auto &a : q.assertions) {
			bool ok;
			try {
				ok = holds(a, env);
			} catch (const Error &) {
				ok = false;
			}
			if (!ok)
				throw SolverError("solver model violates " + boolTerm(a));
		}
	}
	if (caching_ && r.status != Status::Unknown) {
		std::lock_guard<std::mutex> lock(mu_);
		cache_.emplace(key, r);
	}
	return r;
}

Status SolverSatOracle::check(const std::vector<Expr> &constraints)
{
	Query q{"path constraints", constraints};
	return backend_.check(q, timeoutMs_).status;
}

} // namespace jmt::smt
