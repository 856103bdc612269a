#include "jmt/litmus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace jmt {

const char *toString(ReadMode m)
{
	switch (m) {
	case ReadMode::Pln: return "pln";
	case ReadMode::Opq: return "opq";
	case ReadMode::Acq: return "acq";
	case ReadMode::Vol: return "vol";
	}
	return "?";
}

const char *toString(WriteMode m)
{
	switch (m) {
	case WriteMode::Pln: return "pln";
	case WriteMode::Opq: return "opq";
	case WriteMode::Rel: return "rel";
	case WriteMode::Vol: return "vol";
	}
	return "?";
}

const char *toString(FenceMode m)
{
	switch (m) {
	case FenceMode::WW: return "WW";
	case FenceMode::RR: return "RR";
	case FenceMode::Acq: return "acq";
	case FenceMode::Rel: return "rel";
	case FenceMode::Full: return "full";
	}
	return "?";
}

const char *toString(Polarity p)
{
	return p == Polarity::Required ? "required" : "forbidden";
}

bool Instruction::operator==(const Instruction &o) const
{
	if (kind != o.kind)
		return false;
	switch (kind) {
	case Kind::Assign: return reg == o.reg && expr == o.expr;
	case Kind::Store: return loc == o.loc && expr == o.expr && wm == o.wm;
	case Kind::Load: return reg == o.reg && loc == o.loc && rm == o.rm;
	case Kind::Fence: return fm == o.fm;
	case Kind::Cax:
		return reg == o.reg && loc == o.loc && expected == o.expected &&
		       desired == o.desired && rm == o.rm && wm == o.wm;
	case Kind::If:
		return expr == o.expr && thenBlock == o.thenBlock && elseBlock == o.elseBlock;
	case Kind::Skip: return true;
	}
	return false;
}

Formula Formula::atom(ThreadId t, Register r, Value v)
{
	Formula f;
	f.kind = Kind::Atom;
	f.thread = t;
	f.reg = std::move(r);
	f.value = v;
	return f;
}

Formula Formula::conj(std::vector<Formula> fs)
{
	if (fs.empty())
		return Formula{};
	Formula acc = std::move(fs[0]);
	for (std::size_t i = 1; i < fs.size(); i++) {
		Formula f;
		f.kind = Kind::And;
		f.args.push_back(std::move(acc));
		f.args.push_back(std::move(fs[i]));
		acc = std::move(f);
	}
	return acc;
}

Formula Formula::negate(Formula g)
{
	Formula f;
	f.kind = Kind::Not;
	f.args.push_back(std::move(g));
	return f;
}

std::vector<AssertionClause> BehaviorAssertion::clauses() const
{
	switch (quantifier) {
	case Quantifier::Exists:
		return {{Polarity::Required, formula}};
	case Quantifier::NotExists:
		return {{Polarity::Forbidden, formula}};
	case Quantifier::Forall:
		return {{Polarity::Required, formula}, {Polarity::Forbidden, Formula::negate(formula)}};
	}
	return {};
}

static void collectLocations(const Block &b, std::set<Location> &out)
{
	for (auto &i : b) {
		if (!i.loc.empty())
			out.insert(i.loc);
		collectLocations(i.thenBlock, out);
		collectLocations(i.elseBlock, out);
	}
}

std::vector<Location> LitmusTest::locations() const
{
	std::set<Location> locs;
	for (auto &[l, v] : init)
		locs.insert(l);
	for (auto &t : threads)
		collectLocations(t, locs);
	return {locs.begin(), locs.end()};
}

Value LitmusTest::initialValue(const Location &loc) const
{
	auto it = init.find(loc);
	return it == init.end() ? 0 : it->second;
}

std::string readFile(const std::string &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error("cannot open " + path);
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

/* ---------------------------------------------------------------- lexer */

namespace {

struct Token {
	enum class Kind { Ident, Number, Sym, Newline, End };
	Kind kind = Kind::End;
	std::string text;
	SourcePos pos;
};

const char *const symbols[] = {
	"|||", "/\\", "\\/", "==", "!=", "<=", ">=", "&&", "||",
	"{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "+", "-", "*",
	"&", "|", "^", "!", "<", ">", "~", ":", "/", "%",
};

std::vector<Token> tokenize(const std::string &text, SourcePos origin)
{
	std::vector<Token> out;
	int line = origin.line, col = origin.column;
	std::size_t i = 0;
	auto advance = [&](std::size_t n) {
		for (std::size_t k = 0; k < n; k++, i++) {
			if (text[i] == '\n') {
				line++;
				col = 1;
			} else {
				col++;
			}
		}
	};
	while (i < text.size()) {
		char c = text[i];
		SourcePos pos{line, col};
		if (c == '\n') {
			out.push_back({Token::Kind::Newline, "\n", pos});
			advance(1);
			continue;
		}
		if (std::isspace(static_cast<unsigned char>(c))) {
			advance(1);
			continue;
		}
		if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
			std::size_t j = i;
			while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
				j++;
			out.push_back({Token::Kind::Ident, text.substr(i, j - i), pos});
			advance(j - i);
			continue;
		}
		if (std::isdigit(static_cast<unsigned char>(c))) {
			std::size_t j = i;
			while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
				j++;
			out.push_back({Token::Kind::Number, text.substr(i, j - i), pos});
			advance(j - i);
			continue;
		}
		bool matched = false;
		for (const char *s : symbols) {
			std::size_t n = std::char_traits<char>::length(s);
			if (text.compare(i, n, s) == 0) {
				out.push_back({Token::Kind::Sym, s, pos});
				advance(n);
				matched = true;
				break;
			}
		}
		if (!matched)
			throw LitmusSyntaxError(std::string("unexpected character '") + c + "'", pos);
	}
	out.push_back({Token::Kind::End, "", {line, col}});
	return out;
}

Value parseValue(const Token &t)
{
	unsigned long long v = 0;
	for (char c : t.text) {
		v = v * 10 + static_cast<unsigned>(c - '0');
		if (v > 0xffffffffULL)
			throw LitmusSyntaxError("value " + t.text + " does not fit in 32 bits", t.pos);
	}
	return static_cast<Value>(v);
}

const std::set<std::string> unsupportedKeywords = {
	"while", "for", "do", "synchronized", "return", "final", "try", "switch",
	"new", "break", "continue", "goto", "volatile", "class", "static",
};

/* ---------------------------------------------------------------- parser */

class TokenParser {
public:
	explicit TokenParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

	const Token &peek(std::size_t k = 0) const
	{
		return toks_[std::min(pos_ + k, toks_.size() - 1)];
	}
	const Token &next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
	bool atEnd() const { return peek().kind == Token::Kind::End; }
	bool isSym(const char *s, std::size_t k = 0) const
	{
		return peek(k).kind == Token::Kind::Sym && peek(k).text == s;
	}
	bool isIdent(const char *s, std::size_t k = 0) const
	{
		return peek(k).kind == Token::Kind::Ident && peek(k).text == s;
	}
	[[noreturn]] void fail(const std::string &what) const
	{
		const Token &t = peek();
		std::string got = t.kind == Token::Kind::End ? "end of input"
				: t.kind == Token::Kind::Newline ? "end of line" : "'" + t.text + "'";
		throw LitmusSyntaxError(what + ", got " + got, t.pos);
	}
	void expectSym(const char *s)
	{
		if (!isSym(s))
			fail(std::string("expected '") + s + "'");
		next();
	}
	std::string expectIdent(const char *what)
	{
		if (peek().kind != Token::Kind::Ident)
			fail(std::string("expected ") + what);
		return next().text;
	}
	void skipNewlines()
	{
		while (peek().kind == Token::Kind::Newline)
			next();
	}
	void skipSeparators()
	{
		while (peek().kind == Token::Kind::Newline || isSym(";"))
			next();
	}

	/* -------- expressions; newlines inside parentheses are ignored */

	Expr expr() { return binary(1); }

	Block block();
	Instruction statement();

	Formula formula() { return formulaOr(); }

private:
	static bool binaryOp(const Token &t, Expr::Op &op)
	{
		if (t.kind != Token::Kind::Sym)
			return false;
		static const std::map<std::string, Expr::Op> ops = {
			{"||", Expr::Op::Or}, {"&&", Expr::Op::And}, {"|", Expr::Op::BitOr},
			{"^", Expr::Op::BitXor}, {"&", Expr::Op::BitAnd}, {"==", Expr::Op::Eq},
			{"!=", Expr::Op::Ne}, {"<", Expr::Op::Lt}, {"<=", Expr::Op::Le},
			{">", Expr::Op::Gt}, {">=", Expr::Op::Ge}, {"+", Expr::Op::Add},
			{"-", Expr::Op::Sub}, {"*", Expr::Op::Mul},
		};
		auto it = ops.find(t.text);
		if (it == ops.end())
			return false;
		op = it->second;
		return true;
	}

	Expr binary(int minPrec)
	{
		Expr lhs = unaryExpr();
		for (;;) {
			if (isSym("/") || isSym("%"))
				throw UnsupportedFeature("operator '" + peek().text + "' is not supported", peek().pos);
			Expr::Op op;
			if (!binaryOp(peek(), op) || precedence(op) < minPrec)
				return lhs;
			next();
			Expr rhs = binary(precedence(op) + 1);
			lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
		}
	}

	Expr unaryExpr()
	{
		if (isSym("!")) {
			next();
			return Expr::lnot(unaryExpr());
		}
		if (isSym("-")) {
			next();
			return Expr::binary(Expr::Op::Sub, Expr::constant(0), unaryExpr());
		}
		return primary();
	}

	Expr primary()
	{
		const Token &t = peek();
		if (t.kind == Token::Kind::Number)
			return Expr::constant(parseValue(next()));
		if (isSym("(")) {
			next();
			Expr e = expr();
			expectSym(")");
			return e;
		}
		if (t.kind == Token::Kind::Ident) {
			if (t.text == "true" || t.text == "false") {
				next();
				return Expr::constant(t.text == "true" ? 1 : 0);
			}
			if (isSym(".", 1) || isSym("(", 1))
				throw UnsupportedFeature("memory accesses and calls are only allowed as whole statements", t.pos);
			if (isSym("[", 1))
				throw UnsupportedFeature("arrays are not supported", t.pos);
			return Expr::var(next().text);
		}
		fail("expected an expression");
	}

	Expr simpleExpr(const char *what)
	{
		SourcePos p = peek().pos;
		Expr e = expr();
		if (!e.isConst() && !e.isVar())
			throw UnsupportedFeature(std::string(what) + " must be a register or a constant", p);
		return e;
	}

	bool accessTail(Instruction &ins, const std::string &loc, bool assigned);

	Formula formulaOr()
	{
		Formula lhs = formulaAnd();
		while (isSym("\\/") || isSym("||")) {
			next();
			Formula f;
			f.kind = Formula::Kind::Or;
			f.args.push_back(std::move(lhs));
			f.args.push_back(formulaAnd());
			lhs = std::move(f);
		}
		return lhs;
	}

	Formula formulaAnd()
	{
		Formula lhs = formulaUnary();
		while (isSym("/\\") || isSym("&&")) {
			next();
			Formula f;
			f.kind = Formula::Kind::And;
			f.args.push_back(std::move(lhs));
			f.args.push_back(formulaUnary());
			lhs = std::move(f);
		}
		return lhs;
	}

	Formula formulaUnary()
	{
		skipNewlines();
		if (isSym("~") || isSym("!") || isIdent("not")) {
			next();
			return Formula::negate(formulaUnary());
		}
		if (isSym("(")) {
			next();
			skipNewlines();
			Formula f = formulaOr();
			skipNewlines();
			expectSym(")");
			return f;
		}
		if (isIdent("true") || isIdent("false")) {
			Formula f;
			f.kind = next().text == "true" ? Formula::Kind::True : Formula::Kind::False;
			return f;
		}
		ThreadId tid = 0;
		if (peek().kind == Token::Kind::Number && isSym(":", 1)) {
			Value v = parseValue(next());
			if (v == 0 || v > 4096)
				throw LitmusSyntaxError("thread numbers start at 1", peek().pos);
			tid = static_cast<ThreadId>(v);
			next();
		}
		std::string reg = expectIdent("a register name");
		if (isSym("==") || isSym("="))
			next();
		else
			fail("expected '='");
		if (peek().kind != Token::Kind::Number)
			fail("expected a value");
		return Formula::atom(tid, reg, parseValue(next()));
	}

	std::vector<Token> toks_;
	std::size_t pos_ = 0;
};

bool TokenParser::accessTail(Instruction &ins, const std::string &loc, bool assigned)
{
	/* at '.': method call on a location */
	expectSym(".");
	const Token &m = peek();
	std::string method = expectIdent("a method name");
	ins.loc = loc;
	static const std::map<std::string, ReadMode> loads = {
		{"get", ReadMode::Pln}, {"getPlain", ReadMode::Pln}, {"getOpaque", ReadMode::Opq},
		{"getAcquire", ReadMode::Acq}, {"getVolatile", ReadMode::Vol},
	};
	static const std::map<std::string, WriteMode> stores = {
		{"set", WriteMode::Pln}, {"setPlain", WriteMode::Pln}, {"setOpaque", WriteMode::Opq},
		{"setRelease", WriteMode::Rel}, {"setVolatile", WriteMode::Vol},
	};
	static const std::map<std::string, std::pair<ReadMode, WriteMode>> caxes = {
		{"compareAndExchange", {ReadMode::Vol, WriteMode::Vol}},
		{"compareAndExchangeAcquire", {ReadMode::Acq, WriteMode::Pln}},
		{"compareAndExchangeRelease", {ReadMode::Pln, WriteMode::Rel}},
	};
	if (auto it = loads.find(method); it != loads.end()) {
		if (!assigned)
			throw UnsupportedFeature("the result of " + method + " must be assigned to a register", m.pos);
		expectSym("(");
		expectSym(")");
		ins.kind = Instruction::Kind::Load;
		ins.rm = it->second;
		return true;
	}
	if (auto it = stores.find(method); it != stores.end()) {
		if (assigned)
			throw LitmusSyntaxError(method + " does not return a value", m.pos);
		expectSym("(");
		ins.kind = Instruction::Kind::Store;
		ins.expr = simpleExpr("a stored value");
		ins.wm = it->second;
		expectSym(")");
		return true;
	}
	auto cax = caxes.find(method);
	if (cax != caxes.end() || method == "cax") {
		if (!assigned)
			throw UnsupportedFeature("the result of " + method + " must be assigned to a register", m.pos);
		ins.kind = Instruction::Kind::Cax;
		if (cax != caxes.end()) {
			ins.rm = cax->second.first;
			ins.wm = cax->second.second;
		} else {
			static const std::map<std::string, ReadMode> rms = {
				{"pln", ReadMode::Pln}, {"opq", ReadMode::Opq}, {"acq", ReadMode::Acq}, {"vol", ReadMode::Vol}};
			static const std::map<std::string, WriteMode> wms = {
				{"pln", WriteMode::Pln}, {"opq", WriteMode::Opq}, {"rel", WriteMode::Rel}, {"vol", WriteMode::Vol}};
			expectSym("[");
			auto r = rms.find(expectIdent("a read mode"));
			if (r == rms.end())
				fail("unknown read mode");
			expectSym(",");
			auto w = wms.find(expectIdent("a write mode"));
			if (w == wms.end())
				fail("unknown write mode");
			expectSym("]");
			ins.rm = r->second;
			ins.wm = w->second;
		}
		expectSym("(");
		ins.expected = simpleExpr("an expected value");
		expectSym(",");
		ins.desired = simpleExpr("a new value");
		expectSym(")");
		return true;
	}
	throw UnsupportedFeature("unsupported access method '" + method + "'", m.pos);
}

Instruction TokenParser::statement()
{
	Instruction ins;
	const Token &t = peek();
	ins.pos = t.pos;
	if (t.kind != Token::Kind::Ident)
		fail("expected a statement");
	if (unsupportedKeywords.count(t.text))
		throw UnsupportedFeature("'" + t.text + "' is not supported", t.pos);
	if (t.text == "skip") {
		next();
		ins.kind = Instruction::Kind::Skip;
		return ins;
	}
	if (t.text == "if") {
		next();
		expectSym("(");
		skipNewlines();
		ins.kind = Instruction::Kind::If;
		ins.expr = expr();
		skipNewlines();
		expectSym(")");
		skipNewlines();
		ins.thenBlock = block();
		std::size_t save = pos_;
		skipSeparators();
		if (isIdent("else")) {
			next();
			skipNewlines();
			ins.elseBlock = block();
		} else {
			pos_ = save;
		}
		return ins;
	}
	if (t.text == "else")
		fail("'else' without 'if'");
	if (t.text == "VarHandle" && isSym(".", 1)) {
		next();
		next();
		const Token &m = peek();
		std::string name = expectIdent("a fence name");
		static const std::map<std::string, FenceMode> fences = {
			{"fullFence", FenceMode::Full}, {"acquireFence", FenceMode::Acq},
			{"releaseFence", FenceMode::Rel}, {"loadLoadFence", FenceMode::RR},
			{"storeStoreFence", FenceMode::WW},
		};
		auto it = fences.find(name);
		if (it == fences.end())
			throw UnsupportedFeature("unsupported fence '" + name + "'", m.pos);
		expectSym("(");
		expectSym(")");
		ins.kind = Instruction::Kind::Fence;
		ins.fm = it->second;
		return ins;
	}
	if (t.text == "int")
		next();
	std::string name = expectIdent("a register or location");
	if (isSym("[", 0))
		throw UnsupportedFeature("arrays are not supported", peek().pos);
	if (isSym(".")) {
		accessTail(ins, name, false);
		return ins;
	}
	if (isSym("(")) {
		throw UnsupportedFeature("method calls are not supported", t.pos);
	}
	expectSym("=");
	ins.reg = name;
	if (peek().kind == Token::Kind::Ident && isSym(".", 1)) {
		std::string loc = next().text;
		accessTail(ins, loc, true);
		return ins;
	}
	ins.kind = Instruction::Kind::Assign;
	ins.expr = expr();
	return ins;
}

Block TokenParser::block()
{
	Block b;
	if (!isSym("{")) {
		b.push_back(statement());
		return b;
	}
	next();
	for (;;) {
		skipSeparators();
		if (isSym("}")) {
			next();
			return b;
		}
		if (atEnd())
			fail("expected '}'");
		b.push_back(statement());
		if (!(peek().kind == Token::Kind::Newline || isSym(";") || isSym("}")))
			fail("expected end of statement");
	}
}

/* ---------------------------------------------------------------- file level */

struct Line {
	std::string text;
	int number;
};

std::string stripComments(const std::string &text)
{
	std::string out = text;
	for (std::size_t i = 0; i < out.size(); i++) {
		if (out.compare(i, 2, "(*") == 0) {
			std::size_t end = out.find("*)", i + 2);
			if (end == std::string::npos)
				end = out.size() - 2;
			for (std::size_t j = i; j < end + 2 && j < out.size(); j++)
				if (out[j] != '\n')
					out[j] = ' ';
		} else if (out.compare(i, 2, "//") == 0) {
			while (i < out.size() && out[i] != '\n')
				out[i++] = ' ';
		} else if (out[i] == '"') {
			/* docstrings are skipped verbatim */
			std::size_t end = out.find('"', i + 1);
			if (end == std::string::npos)
				end = out.size() - 1;
			for (std::size_t j = i; j <= end; j++)
				if (out[j] != '\n')
					out[j] = ' ';
			i = end;
		}
	}
	return out;
}

std::string trim(const std::string &s)
{
	std::size_t b = 0, e = s.size();
	while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
		b++;
	while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
		e--;
	return s.substr(b, e - b);
}

/* Splits a column row on top-level '|' (not inside parentheses, not '||'). */
std::vector<std::pair<std::string, int>> splitCells(const std::string &row, const Line &line)
{
	std::vector<std::pair<std::string, int>> cells;
	int depth = 0;
	std::size_t start = 0;
	for (std::size_t i = 0; i < row.size(); i++) {
		char c = row[i];
		if (c == '(')
			depth++;
		else if (c == ')')
			depth--;
		else if (c == '|' && depth == 0) {
			if (i + 1 < row.size() && row[i + 1] == '|') {
				i++;
				continue;
			}
			cells.emplace_back(row.substr(start, i - start), static_cast<int>(start) + 1);
			start = i + 1;
		}
	}
	cells.emplace_back(row.substr(start), static_cast<int>(start) + 1);
	(void)line;
	return cells;
}

bool isColumnHeader(const std::string &row)
{
	std::string r = trim(row);
	if (r.empty() || r.back() != ';')
		return false;
	r.pop_back();
	std::stringstream ss(r);
	std::string cell;
	bool any = false;
	while (std::getline(ss, cell, '|')) {
		cell = trim(cell);
		if (cell.size() < 2 || (cell[0] != 'P' && cell[0] != 'T'))
			return false;
		if (!std::all_of(cell.begin() + 1, cell.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
			return false;
		any = true;
	}
	return any;
}

struct Checker {
	std::map<Register, ThreadId> owner;
	std::set<Location> locations;

	void collectLocs(const Block &b)
	{
		for (auto &i : b) {
			if (!i.loc.empty())
				locations.insert(i.loc);
			collectLocs(i.thenBlock);
			collectLocs(i.elseBlock);
		}
	}

	void use(const Expr &e, const std::set<Register> &defined, SourcePos pos)
	{
		std::set<std::string> vars;
		collectVars(e, vars);
		for (auto &v : vars) {
			if (locations.count(v))
				throw LitmusSyntaxError("location '" + v + "' used as a register", pos);
			if (!defined.count(v))
				throw SsaError("register '" + v + "' used before it is assigned", pos);
		}
	}

	void define(const Register &r, ThreadId t, std::set<Register> &defined, SourcePos pos)
	{
		if (locations.count(r))
			throw LitmusSyntaxError("'" + r + "' is both a register and a location", pos);
		if (defined.count(r))
			throw SsaError("register '" + r + "' assigned twice", pos);
		auto [it, fresh] = owner.emplace(r, t);
		if (!fresh && it->second != t)
			throw SharedRegisterError("register '" + r + "' is used by threads " +
						  std::to_string(it->second) + " and " + std::to_string(t), pos);
		defined.insert(r);
	}

	/* Walks every path; the register sets are per path. */
	void walk(const Block &b, std::size_t i, ThreadId t, std::set<Register> defined)
	{
		for (; i < b.size(); i++) {
			const Instruction &ins = b[i];
			switch (ins.kind) {
			case Instruction::Kind::Assign:
				use(ins.expr, defined, ins.pos);
				define(ins.reg, t, defined, ins.pos);
				break;
			case Instruction::Kind::Store:
				use(ins.expr, defined, ins.pos);
				break;
			case Instruction::Kind::Load:
				define(ins.reg, t, defined, ins.pos);
				break;
			case Instruction::Kind::Cax:
				use(ins.expected, defined, ins.pos);
				use(ins.desired, defined, ins.pos);
				define(ins.reg, t, defined, ins.pos);
				break;
			case Instruction::Kind::If: {
				use(ins.expr, defined, ins.pos);
				Block thenRest = ins.thenBlock, elseRest = ins.elseBlock;
				thenRest.insert(thenRest.end(), b.begin() + static_cast<long>(i) + 1, b.end());
				elseRest.insert(elseRest.end(), b.begin() + static_cast<long>(i) + 1, b.end());
				walk(thenRest, 0, t, defined);
				walk(elseRest, 0, t, defined);
				return;
			}
			case Instruction::Kind::Fence:
			case Instruction::Kind::Skip:
				break;
			}
		}
	}
};

void resolveFormula(Formula &f, const std::map<Register, ThreadId> &owner, const std::set<Location> &locs, SourcePos pos)
{
	if (f.kind == Formula::Kind::Atom) {
		if (locs.count(f.reg))
			throw UnsupportedFeature("final values of locations cannot be asserted", pos);
		auto it = owner.find(f.reg);
		if (it == owner.end())
			throw LitmusSyntaxError("unknown register '" + f.reg + "' in assertion", pos);
		if (f.thread != 0 && f.thread != it->second)
			throw LitmusSyntaxError("register '" + f.reg + "' belongs to thread " + std::to_string(it->second), pos);
		f.thread = it->second;
	}
	for (auto &a : f.args)
		resolveFormula(a, owner, locs, pos);
}

} // namespace

Expr parseExpr(const std::string &text)
{
	TokenParser p(tokenize(text, {1, 1}));
	Expr e = p.expr();
	if (!p.atEnd())
		p.fail("unexpected trailing input");
	return e;
}

LitmusTest parseLitmus(const std::string &raw)
{
	std::string text = stripComments(raw);
	std::vector<Line> lines;
	{
		std::stringstream ss(text);
		std::string l;
		int n = 1;
		while (std::getline(ss, l))
			lines.push_back({l, n++});
	}
	LitmusTest test;
	std::size_t li = 0;
	auto skipBlank = [&] {
		while (li < lines.size() && trim(lines[li].text).empty())
			li++;
	};

	skipBlank();
	if (li == lines.size())
		throw LitmusSyntaxError("empty litmus file", {1, 1});
	{
		std::string h = trim(lines[li].text);
		if (h.rfind("Java", 0) != 0 || (h.size() > 4 && !std::isspace(static_cast<unsigned char>(h[4]))))
			throw LitmusSyntaxError("expected header 'Java <name>'", {lines[li].number, 1});
		test.name = trim(h.substr(4));
		if (test.name.empty())
			throw LitmusSyntaxError("missing test name", {lines[li].number, 1});
		li++;
	}

	/* init block */
	skipBlank();
	if (li == lines.size() || trim(lines[li].text)[0] != '{')
		throw LitmusSyntaxError("expected init block '{ ... }'", {li < lines.size() ? lines[li].number : 0, 1});
	{
		std::string block;
		int startLine = lines[li].number;
		bool closed = false;
		std::size_t first = li;
		for (; li < lines.size() && !closed; li++) {
			std::string l = lines[li].text;
			std::size_t close = l.find('}');
			if (close != std::string::npos) {
				std::string after = trim(l.substr(close + 1));
				if (!after.empty())
					throw LitmusSyntaxError("unexpected text after init block", {lines[li].number, static_cast<int>(close) + 2});
				l = l.substr(0, close + 1);
				closed = true;
			}
			block += l;
			block += '\n';
		}
		if (!closed)
			throw LitmusSyntaxError("unterminated init block", {startLine, 1});
		(void)first;
		TokenParser p(tokenize(block, {startLine, 1}));
		p.expectSym("{");
		for (;;) {
			p.skipSeparators();
			if (p.isSym("}"))
				break;
			if (p.isIdent("int"))
				p.next();
			SourcePos pos = p.peek().pos;
			std::string loc = p.expectIdent("a location");
			p.expectSym("=");
			if (p.peek().kind != Token::Kind::Number)
				p.fail("expected an initial value");
			Value v = parseValue(p.next());
			if (!test.init.emplace(loc, v).second)
				throw LitmusSyntaxError("location '" + loc + "' initialized twice", pos);
		}
	}

	/* assertion: first line starting with exists / ~exists / forall */
	std::size_t assertLine = lines.size();
	for (std::size_t k = li; k < lines.size(); k++) {
		std::string t = trim(lines[k].text);
		if (t.rfind("exists", 0) == 0 || t.rfind("~exists", 0) == 0 || t.rfind("forall", 0) == 0 ||
		    t.rfind("~ exists", 0) == 0) {
			assertLine = k;
			break;
		}
	}
	if (assertLine == lines.size())
		throw LitmusSyntaxError("missing final assertion (exists / ~exists / forall)",
					{lines.empty() ? 1 : lines.back().number + 1, 1});

	/* threads */
	std::vector<std::vector<Token>> bodies;
	std::size_t firstBody = li;
	while (firstBody < assertLine && trim(lines[firstBody].text).empty())
		firstBody++;
	if (firstBody < assertLine && isColumnHeader(lines[firstBody].text)) {
		std::string hdr = trim(lines[firstBody].text);
		hdr.pop_back();
		std::size_t ncols = splitCells(hdr, lines[firstBody]).size();
		std::vector<std::vector<Token>> cols(ncols);
		for (std::size_t k = firstBody + 1; k < assertLine; k++) {
			std::string row = lines[k].text;
			std::string t = trim(row);
			if (t.empty())
				continue;
			std::size_t semi = row.find_last_of(';');
			if (semi == std::string::npos || !trim(row.substr(semi + 1)).empty())
				throw LitmusSyntaxError("column rows must end with ';'", {lines[k].number, static_cast<int>(row.size()) + 1});
			auto cells = splitCells(row.substr(0, semi), lines[k]);
			if (cells.size() != ncols)
				throw LitmusSyntaxError("row has " + std::to_string(cells.size()) + " cells, header has " +
							std::to_string(ncols), {lines[k].number, 1});
			for (std::size_t c = 0; c < ncols; c++) {
				auto toks = tokenize(cells[c].first, {lines[k].number, cells[c].second});
				toks.back().kind = Token::Kind::Newline;
				cols[c].insert(cols[c].end(), toks.begin(), toks.end());
			}
		}
		for (auto &c : cols) {
			c.push_back({Token::Kind::End, "", {}});
			bodies.push_back(std::move(c));
		}
	} else {
		std::string cur;
		int curLine = firstBody < lines.size() ? lines[firstBody].number : 1;
		bool any = false;
		auto flush = [&](bool force) {
			if (!force && trim(cur).empty() && !any)
				return;
			bodies.push_back(tokenize(cur, {curLine, 1}));
		};
		for (std::size_t k = firstBody; k < assertLine; k++) {
			if (trim(lines[k].text) == "|||") {
				flush(true);
				cur.clear();
				any = true;
				curLine = lines[k].number + 1;
				continue;
			}
			cur += lines[k].text;
			cur += '\n';
		}
		flush(any);
	}
	for (auto &toks : bodies) {
		TokenParser p(std::move(toks));
		Block b;
		for (;;) {
			p.skipSeparators();
			if (p.atEnd())
				break;
			if (p.isSym("|||") || p.isSym("||"))
				p.fail("thread separators '|||' must be on a line of their own");
			b.push_back(p.statement());
			if (!(p.peek().kind == Token::Kind::Newline || p.isSym(";") || p.atEnd()))
				p.fail("expected end of statement");
		}
		test.threads.push_back(std::move(b));
	}

	/* assertion text */
	{
		std::string atext;
		for (std::size_t k = assertLine; k < lines.size(); k++) {
			atext += lines[k].text;
			atext += '\n';
		}
		TokenParser p(tokenize(atext, {lines[assertLine].number, 1}));
		p.skipNewlines();
		SourcePos apos = p.peek().pos;
		if (p.isSym("~")) {
			p.next();
			if (!p.isIdent("exists"))
				p.fail("expected 'exists'");
			p.next();
			test.assertion.quantifier = BehaviorAssertion::Quantifier::NotExists;
		} else if (p.isIdent("exists")) {
			p.next();
			test.assertion.quantifier = BehaviorAssertion::Quantifier::Exists;
		} else {
			p.expectIdent("forall");
			test.assertion.quantifier = BehaviorAssertion::Quantifier::Forall;
		}
		test.assertion.formula = p.formula();
		p.skipSeparators();
		if (!p.atEnd())
			p.fail("unexpected text after assertion");

		Checker chk;
		for (auto &[l, v] : test.init)
			chk.locations.insert(l);
		for (auto &t : test.threads)
			chk.collectLocs(t);
		for (std::size_t t = 0; t < test.threads.size(); t++)
			chk.walk(test.threads[t], 0, static_cast<ThreadId>(t + 1), {});
		resolveFormula(test.assertion.formula, chk.owner, chk.locations, apos);
	}
	return test;
}

LitmusTest parseLitmusFile(const std::string &path)
{
	return parseLitmus(readFile(path));
}

/* ---------------------------------------------------------------- printing */

static void printBlock(const Block &b, int indent, std::string &out);

static void printInstr(const Instruction &i, int indent, std::string &out)
{
	std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
	out += pad;
	switch (i.kind) {
	case Instruction::Kind::Assign:
		out += i.reg + " = " + toString(i.expr) + ";\n";
		return;
	case Instruction::Kind::Store: {
		static const char *names[] = {"setPlain", "setOpaque", "setRelease", "setVolatile"};
		out += i.loc + "." + names[static_cast<int>(i.wm)] + "(" + toString(i.expr) + ");\n";
		return;
	}
	case Instruction::Kind::Load: {
		static const char *names[] = {"getPlain", "getOpaque", "getAcquire", "getVolatile"};
		out += i.reg + " = " + i.loc + "." + names[static_cast<int>(i.rm)] + "();\n";
		return;
	}
	case Instruction::Kind::Fence: {
		static const char *names[] = {"storeStoreFence", "loadLoadFence", "acquireFence", "releaseFence", "fullFence"};
		out += std::string("VarHandle.") + names[static_cast<int>(i.fm)] + "();\n";
		return;
	}
	case Instruction::Kind::Cax: {
		std::string m;
		if (i.rm == ReadMode::Vol && i.wm == WriteMode::Vol)
			m = "compareAndExchange";
		else if (i.rm == ReadMode::Acq && i.wm == WriteMode::Pln)
			m = "compareAndExchangeAcquire";
		else if (i.rm == ReadMode::Pln && i.wm == WriteMode::Rel)
			m = "compareAndExchangeRelease";
		else
			m = std::string("cax[") + toString(i.rm) + "," + toString(i.wm) + "]";
		out += i.reg + " = " + i.loc + "." + m + "(" + toString(i.expected) + ", " + toString(i.desired) + ");\n";
		return;
	}
	case Instruction::Kind::If:
		out += "if (" + toString(i.expr) + ") {\n";
		printBlock(i.thenBlock, indent + 1, out);
		out += pad + "}";
		if (!i.elseBlock.empty()) {
			out += " else {\n";
			printBlock(i.elseBlock, indent + 1, out);
			out += pad + "}";
		}
		out += "\n";
		return;
	case Instruction::Kind::Skip:
		out += "skip;\n";
		return;
	}
}

static void printBlock(const Block &b, int indent, std::string &out)
{
	for (auto &i : b)
		printInstr(i, indent, out);
}

static void printFormula(const Formula &f, std::string &out, int ctx)
{
	switch (f.kind) {
	case Formula::Kind::True: out += "true"; return;
	case Formula::Kind::False: out += "false"; return;
	case Formula::Kind::Atom:
		out += std::to_string(f.thread) + ":" + f.reg + "=" + std::to_string(f.value);
		return;
	case Formula::Kind::Not:
		out += "~";
		printFormula(f.args[0], out, 3);
		return;
	case Formula::Kind::And:
	case Formula::Kind::Or: {
		int p = f.kind == Formula::Kind::And ? 2 : 1;
		if (p < ctx)
			out += "(";
		printFormula(f.args[0], out, p);
		out += p == 2 ? " /\\ " : " \\/ ";
		printFormula(f.args[1], out, p + 1);
		if (p < ctx)
			out += ")";
		return;
	}
	}
}

std::string toString(const Formula &f)
{
	std::string out;
	printFormula(f, out, 0);
	return out;
}

std::string toString(const Behavior &b)
{
	std::string out;
	for (auto &[r, v] : b) {
		if (!out.empty())
			out += " /\\ ";
		out += std::to_string(r.first) + ":" + r.second + "=" + std::to_string(v);
	}
	return out.empty() ? "true" : out;
}

std::string toString(const LitmusTest &t)
{
	std::string out = "Java " + t.name + "\n{";
	for (auto &[l, v] : t.init)
		out += " " + l + " = " + std::to_string(v) + ";";
	out += " }\n";
	for (std::size_t i = 0; i < t.threads.size(); i++) {
		if (i > 0)
			out += "|||\n";
		printBlock(t.threads[i], 0, out);
	}
	switch (t.assertion.quantifier) {
	case BehaviorAssertion::Quantifier::Exists: out += "exists ("; break;
	case BehaviorAssertion::Quantifier::NotExists: out += "~exists ("; break;
	case BehaviorAssertion::Quantifier::Forall: out += "forall ("; break;
	}
	out += toString(t.assertion.formula) + ")\n";
	return out;
}

/* ---------------------------------------------------------------- queries */

static void collectRegisters(const Block &b, ThreadId t, std::set<RegisterRef> &out)
{
	for (auto &i : b) {
		if (!i.reg.empty())
			out.insert({t, i.reg});
		collectRegisters(i.thenBlock, t, out);
		collectRegisters(i.elseBlock, t, out);
	}
}

std::set<RegisterRef> registersOf(const LitmusTest &t)
{
	std::set<RegisterRef> out;
	for (std::size_t i = 0; i < t.threads.size(); i++)
		collectRegisters(t.threads[i], static_cast<ThreadId>(i + 1), out);
	return out;
}

std::set<RegisterRef> registersOf(const Formula &f)
{
	std::set<RegisterRef> out;
	if (f.kind == Formula::Kind::Atom)
		out.insert({f.thread, f.reg});
	for (auto &a : f.args) {
		auto s = registersOf(a);
		out.insert(s.begin(), s.end());
	}
	return out;
}

bool evalFormula(const Formula &f, const Behavior &b)
{
	switch (f.kind) {
	case Formula::Kind::True: return true;
	case Formula::Kind::False: return false;
	case Formula::Kind::Atom: {
		auto it = b.find({f.thread, f.reg});
		Value v = it == b.end() ? 0 : it->second;
		return v == f.value;
	}
	case Formula::Kind::Not: return !evalFormula(f.args[0], b);
	case Formula::Kind::And: return evalFormula(f.args[0], b) && evalFormula(f.args[1], b);
	case Formula::Kind::Or: return evalFormula(f.args[0], b) || evalFormula(f.args[1], b);
	}
	return false;
}

Expr formulaToExpr(const Formula &f)
{
	switch (f.kind) {
	case Formula::Kind::True: return Expr::constant(1);
	case Formula::Kind::False: return Expr::constant(0);
	case Formula::Kind::Atom: return Expr::eq(Expr::var(f.reg), Expr::constant(f.value));
	case Formula::Kind::Not: return Expr::lnot(formulaToExpr(f.args[0]));
	case Formula::Kind::And: return Expr::land(formulaToExpr(f.args[0]), formulaToExpr(f.args[1]));
	case Formula::Kind::Or: return Expr::lor(formulaToExpr(f.args[0]), formulaToExpr(f.args[1]));
	}
	return Expr::constant(0);
}

} // namespace jmt
