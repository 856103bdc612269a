#include "jmt/x86.hpp"
#include "jmt/error.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <functional>
#include <poll.h>
#include <regex>
#include <signal.h>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace jmt::x86 {

std::string toString(const Instr &i)
{
	if (i.op.empty())
		return i.label + ":";
	std::string s = i.op;
	for (std::size_t k = 0; k < i.args.size(); k++)
		s += (k ? "," : " ") + i.args[k];
	return s;
}

void RegisterMap::bind(ThreadId t, const Register &src, const std::string &hw)
{
	if (inv_[t].count(hw) || fwd_[t].count(src))
		throw CompileError("register " + hw + " bound twice in thread " + std::to_string(t));
	fwd_[t][src] = hw;
	inv_[t][hw] = src;
}

std::optional<std::string> RegisterMap::hardware(ThreadId t, const Register &src) const
{
	auto it = fwd_.find(t);
	if (it == fwd_.end())
		return std::nullopt;
	auto jt = it->second.find(src);
	if (jt == it->second.end())
		return std::nullopt;
	return jt->second;
}

std::optional<Register> RegisterMap::source(ThreadId t, const std::string &hw) const
{
	auto it = inv_.find(t);
	if (it == inv_.end())
		return std::nullopt;
	auto jt = it->second.find(hw);
	if (jt == it->second.end())
		return std::nullopt;
	return jt->second;
}

const std::vector<std::string> &registerPool()
{
	static const std::vector<std::string> pool{"EAX", "EBX", "ECX", "EDX", "ESI", "EDI"};
	return pool;
}

namespace {

void collectDefs(const Block &b, std::vector<Register> &order, bool &hasCax)
{
	for (auto &i : b) {
		switch (i.kind) {
		case Instruction::Kind::Assign:
		case Instruction::Kind::Load:
		case Instruction::Kind::Cax:
			if (std::find(order.begin(), order.end(), i.reg) == order.end())
				order.push_back(i.reg);
			hasCax |= i.kind == Instruction::Kind::Cax;
			break;
		case Instruction::Kind::If:
			collectDefs(i.thenBlock, order, hasCax);
			collectDefs(i.elseBlock, order, hasCax);
			break;
		default:
			break;
		}
	}
}

class ThreadCompiler {
public:
	ThreadCompiler(ThreadId t, RegisterMap &map) : t_(t), map_(map) {}

	std::vector<Instr> run(const Block &body)
	{
		std::vector<Register> order;
		bool hasCax = false;
		collectDefs(body, order, hasCax);
		for (auto &r : registerPool())
			if (!(hasCax && r == "EAX"))
				free_.push_back(r);
		for (auto &r : order) {
			if (free_.empty())
				throw CompileError("thread " + std::to_string(t_) + ": out of x86 registers");
			map_.bind(t_, r, free_.front());
			free_.erase(free_.begin());
		}
		block(body);
		return std::move(out_);
	}

private:
	void emit(std::string op, std::vector<std::string> args = {}) { out_.push_back({std::move(op), std::move(args), {}}); }
	void label(const std::string &l) { out_.push_back({{}, {}, l}); }
	std::string fresh() { return "L" + std::to_string(t_) + "_" + std::to_string(labels_++); }

	std::string temp()
	{
		if (free_.empty())
			throw CompileError("thread " + std::to_string(t_) + ": out of x86 registers");
		std::string r = free_.front();
		free_.erase(free_.begin());
		return r;
	}
	void release(const std::string &r) { free_.insert(free_.begin(), r); }

	std::string reg(const Register &r) const
	{
		auto hw = map_.hardware(t_, r);
		if (!hw)
			throw CompileError("register " + r + " has no x86 register");
		return *hw;
	}

	/* Simple expressions as an operand: immediate or register. */
	std::string operand(const Expr &e) const
	{
		if (e.op == Expr::Op::Const)
			return "$" + std::to_string(e.value);
		if (e.op == Expr::Op::Var)
			return reg(e.name);
		throw CompileError("expected a register or constant, got " + toString(e));
	}

	static bool simple(const Expr &e) { return e.op == Expr::Op::Const || e.op == Expr::Op::Var; }

	void value(const Expr &e, const std::string &dst)
	{
		using O = Expr::Op;
		switch (e.op) {
		case O::Const:
		case O::Var:
			if (operand(e) != dst)
				emit("MOV", {dst, operand(e)});
			return;
		case O::Add:
		case O::Sub:
		case O::BitAnd:
		case O::BitOr:
		case O::BitXor: {
			static const std::map<O, std::string> ops{
				{O::Add, "ADD"}, {O::Sub, "SUB"}, {O::BitAnd, "AND"}, {O::BitOr, "OR"}, {O::BitXor, "XOR"}};
			const Expr &l = e.args[0], &r = e.args[1];
			if (simple(r) && !(r.op == O::Var && reg(r.name) == dst && l != r)) {
				value(l, dst);
				emit(ops.at(e.op), {dst, operand(r)});
				return;
			}
			std::string tmp = temp();
			value(r, tmp);
			value(l, dst);
			emit(ops.at(e.op), {dst, tmp});
			release(tmp);
			return;
		}
		case O::Mul:
			throw CompileError("multiplication has no x86 translation");
		default:
			throw CompileError("boolean-valued assignment '" + toString(e) + "' has no x86 translation");
		}
	}

	/* Jumps to target when e evaluates to `when`. */
	void branch(const Expr &e, bool when, const std::string &target)
	{
		using O = Expr::Op;
		switch (e.op) {
		case O::Const:
			if ((e.value != 0) == when)
				emit("JMP", {target});
			return;
		case O::Not:
			branch(e.args[0], !when, target);
			return;
		case O::And:
		case O::Or: {
			bool shortCircuit = (e.op == O::And) != when;
			if (shortCircuit) {
				branch(e.args[0], when, target);
				branch(e.args[1], when, target);
			} else {
				std::string skip = fresh();
				branch(e.args[0], !when, skip);
				branch(e.args[1], when, target);
				label(skip);
			}
			return;
		}
		case O::Eq: case O::Ne: case O::Lt: case O::Le: case O::Gt: case O::Ge: {
			static const std::map<O, std::pair<std::string, std::string>> jcc{
				{O::Eq, {"JE", "JNE"}}, {O::Ne, {"JNE", "JE"}}, {O::Lt, {"JB", "JAE"}},
				{O::Le, {"JBE", "JA"}}, {O::Gt, {"JA", "JBE"}}, {O::Ge, {"JAE", "JB"}}};
			const Expr &l = e.args[0], &r = e.args[1];
			std::string lhs, tmpL, tmpR;
			if (l.op == O::Var) {
				lhs = reg(l.name);
			} else {
				lhs = tmpL = temp();
				value(l, tmpL);
			}
			std::string rhs;
			if (simple(r)) {
				rhs = operand(r);
			} else {
				rhs = tmpR = temp();
				value(r, tmpR);
			}
			emit("CMP", {lhs, rhs});
			emit(when ? jcc.at(e.op).first : jcc.at(e.op).second, {target});
			if (!tmpR.empty())
				release(tmpR);
			if (!tmpL.empty())
				release(tmpL);
			return;
		}
		default: {
			std::string v;
			std::string tmp;
			if (e.op == O::Var) {
				v = reg(e.name);
			} else {
				v = tmp = temp();
				value(e, tmp);
			}
			emit("CMP", {v, "$0"});
			emit(when ? "JNE" : "JE", {target});
			if (!tmp.empty())
				release(tmp);
			return;
		}
		}
	}

	void block(const Block &b)
	{
		for (auto &i : b)
			instruction(i);
	}

	void instruction(const Instruction &i)
	{
		using K = Instruction::Kind;
		switch (i.kind) {
		case K::Skip:
			return;
		case K::Assign:
			value(i.expr, reg(i.reg));
			return;
		case K::Load:
			emit("MOV", {reg(i.reg), "[" + i.loc + "]"});
			return;
		case K::Store:
			emit("MOV", {"[" + i.loc + "]", operand(i.expr)});
			if (i.wm == WriteMode::Vol)
				emit("MFENCE");
			return;
		case K::Fence:
			emit(i.fm == FenceMode::Full ? "MFENCE" : "NOP");
			return;
		case K::Cax: {
			std::string tmp = temp();
			emit("MOV", {"EAX", operand(i.expected)});
			emit("MOV", {tmp, operand(i.desired)});
			emit("LOCK CMPXCHG", {"[" + i.loc + "]", tmp});
			emit("MOV", {reg(i.reg), "EAX"});
			release(tmp);
			return;
		}
		case K::If: {
			std::string elseL = fresh(), endL = fresh();
			branch(i.expr, false, i.elseBlock.empty() ? endL : elseL);
			block(i.thenBlock);
			if (!i.elseBlock.empty()) {
				emit("JMP", {endL});
				label(elseL);
				block(i.elseBlock);
			}
			label(endL);
			return;
		}
		}
	}

	ThreadId t_;
	RegisterMap &map_;
	std::vector<std::string> free_;
	std::vector<Instr> out_;
	unsigned labels_ = 0;
};

std::string conditionText(const Formula &f, const RegisterMap &map)
{
	using K = Formula::Kind;
	switch (f.kind) {
	case K::True: return "true";
	case K::False: return "false";
	case K::Atom: {
		auto hw = map.hardware(f.thread, f.reg);
		if (!hw)
			throw CompileError("assertion register " + std::to_string(f.thread) + ":" + f.reg +
					   " is never assigned");
		return std::to_string(f.thread - 1) + ":" + *hw + "=" + std::to_string(f.value);
	}
	case K::Not: return "~" + conditionText(f.args[0], map);
	case K::And:
	case K::Or: {
		std::vector<const Formula *> parts;
		std::function<void(const Formula &)> flatten = [&](const Formula &g) {
			if (g.kind == f.kind)
				for (auto &a : g.args)
					flatten(a);
			else
				parts.push_back(&g);
		};
		flatten(f);
		std::string s = "(";
		for (std::size_t i = 0; i < parts.size(); i++)
			s += (i ? (f.kind == K::And ? " /\\ " : " \\/ ") : "") + conditionText(*parts[i], map);
		return s + ")";
	}
	}
	return "true";
}

} // namespace

std::vector<Instr> compileThread(const Block &body, ThreadId t, RegisterMap &map)
{
	return ThreadCompiler(t, map).run(body);
}

Compiled compile(const LitmusTest &test)
{
	Compiled c;
	c.program.name = test.name;
	for (auto &loc : test.locations())
		c.program.init[loc] = test.initialValue(loc);
	for (std::size_t t = 0; t < test.threads.size(); t++)
		c.program.threads.push_back(compileThread(test.threads[t], static_cast<ThreadId>(t + 1), c.registers));
	c.program.quantifier = test.assertion.quantifier;
	std::string cond = conditionText(test.assertion.formula, c.registers);
	if (cond.front() != '(')
		cond = "(" + cond + ")";
	c.program.condition = cond;
	return c;
}

std::string render(const Program &p)
{
	std::ostringstream os;
	os << "X86 " << p.name << "\n";
	os << "{ ";
	for (auto &[loc, v] : p.init)
		os << loc << "=" << v << "; ";
	os << "}\n";
	std::vector<std::vector<std::string>> cols;
	std::size_t rows = 0;
	for (std::size_t t = 0; t < p.threads.size(); t++) {
		std::vector<std::string> col{"P" + std::to_string(t)};
		for (auto &i : p.threads[t])
			col.push_back(toString(i));
		rows = std::max(rows, col.size());
		cols.push_back(std::move(col));
	}
	std::vector<std::size_t> width;
	for (auto &col : cols) {
		std::size_t w = 0;
		for (auto &s : col)
			w = std::max(w, s.size());
		width.push_back(w);
	}
	for (std::size_t r = 0; r < rows; r++) {
		for (std::size_t t = 0; t < cols.size(); t++) {
			std::string cell = r < cols[t].size() ? cols[t][r] : "";
			os << " " << cell << std::string(width[t] - cell.size(), ' ') << (t + 1 < cols.size() ? " |" : " ;");
		}
		os << "\n";
	}
	switch (p.quantifier) {
	case BehaviorAssertion::Quantifier::Exists: os << "exists "; break;
	case BehaviorAssertion::Quantifier::NotExists: os << "~exists "; break;
	case BehaviorAssertion::Quantifier::Forall: os << "forall "; break;
	}
	os << p.condition << "\n";
	return os.str();
}

HerdConfig defaultHerdConfig()
{
	HerdConfig cfg;
	if (const char *env = std::getenv("JMT_HERD"); env && *env)
		cfg.command = env;
	else
		cfg.command = "herd7";
	return cfg;
}

std::vector<HwState> parseHerdOutput(const std::string &text)
{
	std::istringstream in(text);
	std::string line;
	std::size_t expected = 0;
	bool found = false;
	while (std::getline(in, line)) {
		static const std::regex states(R"(^\s*States\s+(\d+)\s*$)");
		std::smatch m;
		if (std::regex_match(line, m, states)) {
			expected = std::stoul(m[1]);
			found = true;
			break;
		}
	}
	if (!found)
		throw HerdError("herd output has no 'States' section");
	std::vector<HwState> out;
	static const std::regex binding(R"((\d+):([A-Za-z][A-Za-z0-9]*)\s*=\s*(-?\d+)\s*;)");
	while (out.size() < expected && std::getline(in, line)) {
		HwState s;
		for (std::sregex_iterator it(line.begin(), line.end(), binding), end; it != end; ++it) {
			long long v = std::stoll((*it)[3]);
			s[{std::stoi((*it)[1]) + 1, (*it)[2]}] = static_cast<Value>(v);
		}
		if (s.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
			throw HerdError("cannot parse herd state line '" + line + "'");
		if (!s.empty())
			out.push_back(std::move(s));
	}
	if (out.size() != expected)
		throw HerdError("herd reported " + std::to_string(expected) + " states but listed " +
				std::to_string(out.size()));
	return out;
}

namespace {

std::string runCapture(const std::vector<std::string> &argv, int timeoutMs, int &status)
{
	int out[2], err[2];
	if (pipe(out) != 0 || pipe2(err, O_CLOEXEC) != 0)
		throw HerdError("pipe: " + std::string(std::strerror(errno)));
	pid_t pid = fork();
	if (pid < 0)
		throw HerdError("fork: " + std::string(std::strerror(errno)));
	if (pid == 0) {
		dup2(out[1], 1);
		int devnull = open("/dev/null", O_WRONLY);
		if (devnull >= 0)
			dup2(devnull, 2);
		close(out[0]);
		close(out[1]);
		close(err[0]);
		std::vector<char *> args;
		for (auto &a : argv)
			args.push_back(const_cast<char *>(a.c_str()));
		args.push_back(nullptr);
		execvp(args[0], args.data());
		int e = errno;
		if (write(err[1], &e, sizeof e) < 0) {
		}
		_exit(127);
	}
	close(out[1]);
	close(err[1]);
	int e = 0;
	if (read(err[0], &e, sizeof e) == static_cast<ssize_t>(sizeof e)) {
		close(err[0]);
		close(out[0]);
		waitpid(pid, nullptr, 0);
		throw HerdError("cannot execute herd '" + argv[0] + "': " + std::strerror(e));
	}
	close(err[0]);
	std::string text;
	auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeoutMs);
	char buf[4096];
	for (;;) {
		int left = static_cast<int>(
			std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count());
		if (left <= 0) {
			kill(pid, SIGKILL);
			close(out[0]);
			waitpid(pid, nullptr, 0);
			throw HerdError("herd timed out");
		}
		pollfd pfd{out[0], POLLIN, 0};
		if (poll(&pfd, 1, left) <= 0)
			continue;
		ssize_t n = read(out[0], buf, sizeof buf);
		if (n <= 0)
			break;
		text.append(buf, static_cast<std::size_t>(n));
	}
	close(out[0]);
	waitpid(pid, &status, 0);
	return text;
}

} // namespace

std::vector<HwState> runHerd(const Program &p, const HerdConfig &cfg)
{
	namespace fs = std::filesystem;
	fs::path dir = fs::temp_directory_path() / ("jmt-herd-" + std::to_string(getpid()));
	fs::create_directories(dir);
	static std::atomic<unsigned> counter{0};
	fs::path file = dir / (std::to_string(counter++) + ".litmus");
	{
		std::ofstream os(file);
		os << render(p);
	}
	std::vector<std::string> argv;
	std::istringstream cmd(cfg.command.empty() ? defaultHerdConfig().command : cfg.command);
	for (std::string w; cmd >> w;)
		argv.push_back(w);
	for (auto &a : cfg.args)
		argv.push_back(a);
	argv.push_back(file.string());
	int status = 0;
	std::string text;
	try {
		text = runCapture(argv, cfg.timeoutMs, status);
	} catch (...) {
		fs::remove(file);
		throw;
	}
	fs::remove(file);
	if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
		throw HerdError("herd exited with status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
	return parseHerdOutput(text);
}

std::vector<Behavior> restoreBehaviors(const std::vector<HwState> &raw, const RegisterMap &map)
{
	std::vector<Behavior> out;
	for (auto &s : raw) {
		Behavior b;
		for (auto &[key, v] : s) {
			auto src = map.source(key.first, key.second);
			if (!src)
				throw HerdError("herd state mentions unmapped register " + std::to_string(key.first - 1) + ":" +
						key.second);
			b[{key.first, *src}] = v;
		}
		if (std::find(out.begin(), out.end(), b) == out.end())
			out.push_back(std::move(b));
	}
	return out;
}

InclusionResult checkInclusion(Engine &engine, const LitmusTest &test, const CatModel &sem,
			       const std::vector<Behavior> &behaviors)
{
	InclusionResult res;
	res.behaviors = behaviors;
	Pool pool = engine.buildPool(test, sem);
	bool unknown = false;
	for (auto &b : behaviors) {
		std::vector<Formula> atoms;
		for (auto &[rr, v] : b)
			atoms.push_back(Formula::atom(rr.first, rr.second, v));
		AllowedResult r = engine.allowed(test, pool, Formula::conj(std::move(atoms)));
		if (r.status == SearchStatus::Found)
			continue;
		if (r.status == SearchStatus::BudgetExhausted) {
			unknown = true;
			continue;
		}
		res.outcome = Outcome::Fail;
		res.witness = b;
		res.message = "hardware behavior " + jmt::toString(b) + " is not allowed by the model";
		return res;
	}
	res.outcome = unknown ? Outcome::Unknown : Outcome::Pass;
	res.message = unknown ? "some hardware behaviors are undecided within the search budget"
			      : "all " + std::to_string(behaviors.size()) + " hardware behaviors are allowed";
	return res;
}

InclusionResult checkInclusion(Engine &engine, const LitmusTest &test, const CatModel &sem, const HerdConfig &cfg)
{
	Compiled c = compile(test);
	return checkInclusion(engine, test, sem, restoreBehaviors(runHerd(c.program, cfg), c.registers));
}

} // namespace jmt::x86
