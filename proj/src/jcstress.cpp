#include "jmt/jcstress.hpp"
#include "jmt/error.hpp"

#include <algorithm>
#include <climits>
#include <sstream>

namespace jmt::jcstress {

const char *varHandleGet(ReadMode m)
{
	switch (m) {
	case ReadMode::Pln: return "get";
	case ReadMode::Opq: return "getOpaque";
	case ReadMode::Acq: return "getAcquire";
	case ReadMode::Vol: return "getVolatile";
	}
	return "get";
}

const char *varHandleSet(WriteMode m)
{
	switch (m) {
	case WriteMode::Pln: return "set";
	case WriteMode::Opq: return "setOpaque";
	case WriteMode::Rel: return "setRelease";
	case WriteMode::Vol: return "setVolatile";
	}
	return "set";
}

const char *varHandleFence(FenceMode m)
{
	switch (m) {
	case FenceMode::Full: return "fullFence";
	case FenceMode::Acq: return "acquireFence";
	case FenceMode::Rel: return "releaseFence";
	case FenceMode::RR: return "loadLoadFence";
	case FenceMode::WW: return "storeStoreFence";
	}
	return "fullFence";
}

const char *varHandleCax(ReadMode rm, WriteMode wm)
{
	if (rm == ReadMode::Vol && wm == WriteMode::Vol)
		return "compareAndExchange";
	if (rm == ReadMode::Acq && wm == WriteMode::Pln)
		return "compareAndExchangeAcquire";
	if (rm == ReadMode::Pln && wm == WriteMode::Rel)
		return "compareAndExchangeRelease";
	throw CompileError(std::string("no VarHandle compare-and-exchange with modes ") + toString(rm) + "," +
			   toString(wm));
}

std::string className(const std::string &testName)
{
	std::string s;
	for (char c : testName)
		s += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
	if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])))
		s = "T" + s;
	return s;
}

std::vector<RegisterRef> resultRegisters(const LitmusTest &test)
{
	std::set<RegisterRef> regs = registersOf(test.assertion.formula);
	if (regs.empty())
		regs = registersOf(test);
	return {regs.begin(), regs.end()};
}

namespace {

std::string literal(Value v)
{
	if (v <= static_cast<Value>(INT_MAX))
		return std::to_string(v);
	return "(int) " + std::to_string(v) + "L";
}

std::string javaInt(const Expr &e);

std::string javaBool(const Expr &e)
{
	using O = Expr::Op;
	auto bin = [&](const char *op) { return "(" + javaInt(e.args[0]) + " " + op + " " + javaInt(e.args[1]) + ")"; };
	auto ucmp = [&](const char *op) {
		return "(Integer.compareUnsigned(" + javaInt(e.args[0]) + ", " + javaInt(e.args[1]) + ") " + op + " 0)";
	};
	switch (e.op) {
	case O::Eq: return bin("==");
	case O::Ne: return bin("!=");
	case O::Lt: return ucmp("<");
	case O::Le: return ucmp("<=");
	case O::Gt: return ucmp(">");
	case O::Ge: return ucmp(">=");
	case O::Not: return "!" + javaBool(e.args[0]);
	case O::And: return "(" + javaBool(e.args[0]) + " && " + javaBool(e.args[1]) + ")";
	case O::Or: return "(" + javaBool(e.args[0]) + " || " + javaBool(e.args[1]) + ")";
	case O::Const: return e.value ? "true" : "false";
	default: return "(" + javaInt(e) + " != 0)";
	}
}

std::string javaInt(const Expr &e)
{
	using O = Expr::Op;
	auto bin = [&](const char *op) { return "(" + javaInt(e.args[0]) + " " + op + " " + javaInt(e.args[1]) + ")"; };
	switch (e.op) {
	case O::Const: return literal(e.value);
	case O::Var: return e.name;
	case O::Add: return bin("+");
	case O::Sub: return bin("-");
	case O::Mul: return bin("*");
	case O::BitAnd: return bin("&");
	case O::BitOr: return bin("|");
	case O::BitXor: return bin("^");
	default: return "(" + javaBool(e) + " ? 1 : 0)";
	}
}

std::string stripParens(std::string s)
{
	if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
		int depth = 0;
		for (std::size_t i = 0; i < s.size(); i++) {
			depth += s[i] == '(' ? 1 : s[i] == ')' ? -1 : 0;
			if (depth == 0 && i + 1 < s.size())
				return s;
		}
		return s.substr(1, s.size() - 2);
	}
	return s;
}

std::string handle(const Location &loc) { return "VH_" + loc; }

void collectRegisters(const Block &b, std::vector<Register> &out)
{
	for (auto &i : b) {
		if (i.kind == Instruction::Kind::Assign || i.kind == Instruction::Kind::Load ||
		    i.kind == Instruction::Kind::Cax) {
			if (std::find(out.begin(), out.end(), i.reg) == out.end())
				out.push_back(i.reg);
		} else if (i.kind == Instruction::Kind::If) {
			collectRegisters(i.thenBlock, out);
			collectRegisters(i.elseBlock, out);
		}
	}
}

void emitBlock(std::ostringstream &os, const Block &b, const std::string &indent)
{
	for (auto &i : b) {
		switch (i.kind) {
		case Instruction::Kind::Skip:
			break;
		case Instruction::Kind::Assign:
			os << indent << i.reg << " = " << stripParens(javaInt(i.expr)) << ";\n";
			break;
		case Instruction::Kind::Load:
			os << indent << i.reg << " = (int) " << handle(i.loc) << "." << varHandleGet(i.rm) << "(this);\n";
			break;
		case Instruction::Kind::Store:
			os << indent << handle(i.loc) << "." << varHandleSet(i.wm) << "(this, " << stripParens(javaInt(i.expr))
			   << ");\n";
			break;
		case Instruction::Kind::Fence:
			os << indent << "VarHandle." << varHandleFence(i.fm) << "();\n";
			break;
		case Instruction::Kind::Cax:
			os << indent << i.reg << " = (int) " << handle(i.loc) << "." << varHandleCax(i.rm, i.wm) << "(this, "
			   << stripParens(javaInt(i.expected)) << ", " << stripParens(javaInt(i.desired)) << ");\n";
			break;
		case Instruction::Kind::If:
			os << indent << "if " << "(" << stripParens(javaBool(i.expr)) << ") {\n";
			emitBlock(os, i.thenBlock, indent + "    ");
			if (!i.elseBlock.empty()) {
				os << indent << "} else {\n";
				emitBlock(os, i.elseBlock, indent + "    ");
			}
			os << indent << "}\n";
			break;
		}
	}
}

std::string outcomeId(const std::vector<RegisterRef> &regs, const Behavior &b)
{
	std::string s;
	for (std::size_t i = 0; i < regs.size(); i++) {
		auto it = b.find(regs[i]);
		Value v = it == b.end() ? 0 : it->second;
		s += (i ? ", " : "") + std::to_string(static_cast<std::int32_t>(v));
	}
	return s;
}

} // namespace

std::string generate(const LitmusTest &test, const std::optional<std::vector<Behavior>> &allowed)
{
	std::string cls = className(test.name);
	std::vector<RegisterRef> regs = resultRegisters(test);
	std::ostringstream os;
	os << "// Generated from litmus test " << test.name << "\n";
	os << "import java.lang.invoke.MethodHandles;\n"
	      "import java.lang.invoke.VarHandle;\n\n"
	      "import org.openjdk.jcstress.annotations.Actor;\n"
	      "import org.openjdk.jcstress.annotations.Expect;\n"
	      "import org.openjdk.jcstress.annotations.JCStressTest;\n"
	      "import org.openjdk.jcstress.annotations.Outcome;\n"
	      "import org.openjdk.jcstress.annotations.Result;\n"
	      "import org.openjdk.jcstress.annotations.State;\n\n";
	os << "@JCStressTest\n";
	if (allowed) {
		std::vector<std::string> ids;
		for (auto &b : *allowed)
			ids.push_back(outcomeId(regs, b));
		std::sort(ids.begin(), ids.end());
		ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
		for (auto &id : ids)
			os << "@Outcome(id = \"" << id << "\", expect = Expect.ACCEPTABLE, desc = \"allowed by the model\")\n";
		os << "@Outcome(expect = Expect.FORBIDDEN, desc = \"not allowed by the model\")\n";
	} else {
		os << "@Outcome(expect = Expect.ACCEPTABLE_INTERESTING, desc = \"observed outcome\")\n";
	}
	os << "@State\n";
	os << "public class " << cls << " {\n\n";
	os << "    @Result\n";
	os << "    public static class Regs {\n";
	for (auto &[t, r] : regs)
		os << "        public int " << r << ";\n";
	os << "    }\n\n";
	std::vector<Location> locs = test.locations();
	for (auto &loc : locs) {
		Value v = test.initialValue(loc);
		os << "    int " << loc;
		if (v)
			os << " = " << literal(v);
		os << ";\n";
	}
	os << "\n";
	for (auto &loc : locs)
		os << "    static final VarHandle " << handle(loc) << ";\n";
	os << "\n    static {\n";
	os << "        try {\n";
	os << "            MethodHandles.Lookup lookup = MethodHandles.lookup();\n";
	for (auto &loc : locs)
		os << "            " << handle(loc) << " = lookup.findVarHandle(" << cls << ".class, \"" << loc
		   << "\", int.class);\n";
	os << "        } catch (ReflectiveOperationException e) {\n";
	os << "            throw new ExceptionInInitializerError(e);\n";
	os << "        }\n";
	os << "    }\n";
	for (std::size_t t = 0; t < test.threads.size(); t++) {
		ThreadId tid = static_cast<ThreadId>(t + 1);
		os << "\n    @Actor\n";
		os << "    public void actor" << tid << "(Regs r) {\n";
		std::vector<Register> locals;
		collectRegisters(test.threads[t], locals);
		for (auto &reg : locals)
			os << "        int " << reg << " = 0;\n";
		emitBlock(os, test.threads[t], "        ");
		for (auto &[rt, reg] : regs)
			if (rt == tid)
				os << "        r." << reg << " = "
				   << (std::find(locals.begin(), locals.end(), reg) != locals.end() ? reg : "0") << ";\n";
		os << "    }\n";
	}
	os << "}\n";
	return os.str();
}

std::vector<Behavior> allowedBehaviors(Engine &engine, const LitmusTest &test, const CatModel &sem,
				       const std::vector<Value> &values)
{
	std::vector<RegisterRef> regs = resultRegisters(test);
	Pool pool = engine.buildPool(test, sem);
	std::vector<Behavior> out;
	std::vector<std::size_t> digit(regs.size(), 0);
	if (values.empty())
		return out;
	for (;;) {
		Behavior b;
		std::vector<Formula> atoms;
		for (std::size_t i = 0; i < regs.size(); i++) {
			b[regs[i]] = values[digit[i]];
			atoms.push_back(Formula::atom(regs[i].first, regs[i].second, values[digit[i]]));
		}
		AllowedResult r = engine.allowed(test, pool, Formula::conj(std::move(atoms)));
		if (r.status == SearchStatus::BudgetExhausted)
			throw Error("search budget exhausted while enumerating allowed behaviors");
		if (r.status == SearchStatus::Found)
			out.push_back(std::move(b));
		std::size_t i = regs.size();
		while (i > 0) {
			if (++digit[i - 1] < values.size())
				break;
			digit[i - 1] = 0;
			i--;
		}
		if (i == 0)
			break;
	}
	return out;
}

} // namespace jmt::jcstress
