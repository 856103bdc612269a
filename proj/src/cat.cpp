#include "jmt/cat.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>

namespace jmt {

std::size_t CatModel::count(CatStatement::Kind k) const
{
	return static_cast<std::size_t>(std::count_if(statements.begin(), statements.end(),
						       [&](const CatStatement &s) { return s.kind == k; }));
}

std::size_t CatModel::countChecks(CatStatement::Check c) const
{
	return static_cast<std::size_t>(std::count_if(statements.begin(), statements.end(), [&](const CatStatement &s) {
		return s.kind == CatStatement::Kind::Check && s.check == c;
	}));
}

const std::vector<std::string> &catBuiltins()
{
	static const std::vector<std::string> names = {
		"po", "rf", "id", "loc", "int", "ext", "0",
		"_", "E", "M", "W", "R", "F", "IW", "RMW", "V",
		"PLN", "OPQ", "ACQ", "REL",
		"Fww", "Frr", "Facq", "Frel", "Ffull",
	};
	return names;
}

namespace {

struct Tok {
	enum class Kind { Ident, String, Sym, End };
	Kind kind = Kind::End;
	std::string text;
	SourcePos pos;
};

std::vector<Tok> lex(const std::string &s)
{
	std::vector<Tok> out;
	int line = 1, col = 1;
	std::size_t i = 0;
	auto adv = [&](std::size_t n) {
		for (std::size_t k = 0; k < n && i < s.size(); k++, i++) {
			if (s[i] == '\n') {
				line++;
				col = 1;
			} else {
				col++;
			}
		}
	};
	while (i < s.size()) {
		char c = s[i];
		SourcePos pos{line, col};
		if (std::isspace(static_cast<unsigned char>(c))) {
			adv(1);
			continue;
		}
		if (s.compare(i, 2, "(*") == 0) {
			std::size_t end = s.find("*)", i + 2);
			if (end == std::string::npos)
				throw CatError("unterminated comment", pos);
			adv(end + 2 - i);
			continue;
		}
		if (c == '"') {
			std::size_t end = s.find('"', i + 1);
			if (end == std::string::npos)
				throw CatError("unterminated string", pos);
			out.push_back({Tok::Kind::String, s.substr(i + 1, end - i - 1), pos});
			adv(end + 1 - i);
			continue;
		}
		if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
			std::size_t j = i + 1;
			while (j < s.size() &&
			       (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
				(s[j] == '-' && j + 1 < s.size() && std::isalnum(static_cast<unsigned char>(s[j + 1])))))
				j++;
			out.push_back({Tok::Kind::Ident, s.substr(i, j - i), pos});
			adv(j - i);
			continue;
		}
		if (s.compare(i, 3, "^-1") == 0) {
			out.push_back({Tok::Kind::Sym, "^-1", pos});
			adv(3);
			continue;
		}
		if (std::string("()[]|&\\;*+?~,=0").find(c) != std::string::npos) {
			out.push_back({Tok::Kind::Sym, std::string(1, c), pos});
			adv(1);
			continue;
		}
		throw CatError(std::string("unexpected character '") + c + "'", pos);
	}
	out.push_back({Tok::Kind::End, "", {line, col}});
	return out;
}

const std::set<std::string> keywords = {
	"let", "rec", "and", "with", "from", "irreflexive", "acyclic", "empty", "as", "show",
	"unshow", "include", "flag", "in", "procedure", "call", "fun", "match", "begin", "end",
	"if", "then", "else", "forall", "do", "enum", "instructions", "undefined_unless",
};

class Parser {
public:
	explicit Parser(std::vector<Tok> t) : toks_(std::move(t)) {}

	CatModel model()
	{
		CatModel m;
		if (peek().kind == Tok::Kind::String)
			m.title = next().text;
		else if (peek().kind == Tok::Kind::Ident && !keywords.count(peek().text))
			m.title = next().text;
		while (peek().kind != Tok::Kind::End)
			m.statements.push_back(statement());
		return m;
	}

private:
	const Tok &peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
	const Tok &next() { return toks_[std::min(i_++, toks_.size() - 1)]; }
	bool sym(const char *s, std::size_t k = 0) const
	{
		return peek(k).kind == Tok::Kind::Sym && peek(k).text == s;
	}
	bool kw(const char *s) const { return peek().kind == Tok::Kind::Ident && peek().text == s; }
	[[noreturn]] void fail(const std::string &what) const
	{
		const Tok &t = peek();
		throw CatError(what + (t.kind == Tok::Kind::End ? ", got end of input" : ", got '" + t.text + "'"), t.pos);
	}
	void expect(const char *s)
	{
		if (!sym(s))
			fail(std::string("expected '") + s + "'");
		next();
	}
	std::string name(const char *what)
	{
		if (peek().kind != Tok::Kind::Ident || keywords.count(peek().text))
			fail(std::string("expected ") + what);
		return next().text;
	}
	bool startsExpr(std::size_t k) const
	{
		const Tok &t = peek(k);
		if (t.kind == Tok::Kind::Ident)
			return !keywords.count(t.text);
		return t.kind == Tok::Kind::Sym && (t.text == "(" || t.text == "[" || t.text == "~" || t.text == "0");
	}

	CatStatement statement()
	{
		CatStatement st;
		st.pos = peek().pos;
		if (kw("let")) {
			next();
			if (kw("rec"))
				throw CatRecursiveDefinition("recursive definitions are not supported", peek().pos);
			st.kind = CatStatement::Kind::Let;
			st.name = name("a name");
			expect("=");
			st.expr = expr();
			if (kw("and"))
				throw CatError("simultaneous definitions are not supported", peek().pos);
			return st;
		}
		if (kw("with")) {
			next();
			st.kind = CatStatement::Kind::With;
			st.name = name("a name");
			if (!kw("from"))
				fail("expected 'from'");
			next();
			SourcePos fp = peek().pos;
			std::string fn = name("a generator");
			if (fn != "linearisations" && fn != "linearizations")
				throw CatError("unsupported generator '" + fn + "'", fp);
			expect("(");
			st.set = expr();
			expect(",");
			st.order = expr();
			expect(")");
			return st;
		}
		if (kw("irreflexive") || kw("acyclic") || kw("empty")) {
			std::string k = next().text;
			st.kind = CatStatement::Kind::Check;
			st.check = k == "irreflexive" ? CatStatement::Check::Irreflexive
				 : k == "acyclic" ? CatStatement::Check::Acyclic : CatStatement::Check::Empty;
			st.expr = expr();
			if (kw("as")) {
				next();
				st.name = name("a name");
			}
			return st;
		}
		if (kw("show")) {
			next();
			st.kind = CatStatement::Kind::Show;
			st.shown.push_back(expr());
			while (sym(",")) {
				next();
				st.shown.push_back(expr());
			}
			if (kw("as")) {
				next();
				name("a name");
			}
			return st;
		}
		if (peek().kind == Tok::Kind::Ident && keywords.count(peek().text))
			throw CatError("unsupported construct '" + peek().text + "'", peek().pos);
		fail("expected a statement");
	}

	CatExpr node(CatExpr::Kind k, std::vector<CatExpr> args, SourcePos pos)
	{
		CatExpr e;
		e.kind = k;
		e.args = std::move(args);
		e.pos = pos;
		return e;
	}

	template <typename Sub>
	CatExpr leftAssoc(const char *op, CatExpr::Kind k, Sub sub)
	{
		CatExpr lhs = (this->*sub)();
		while (sym(op)) {
			SourcePos p = next().pos;
			CatExpr rhs = (this->*sub)();
			lhs = node(k, {std::move(lhs), std::move(rhs)}, p);
		}
		return lhs;
	}

	CatExpr expr() { return leftAssoc("|", CatExpr::Kind::Union, &Parser::seq); }
	CatExpr seq() { return leftAssoc(";", CatExpr::Kind::Seq, &Parser::diff); }
	CatExpr diff() { return leftAssoc("\\", CatExpr::Kind::Diff, &Parser::inter); }
	CatExpr inter() { return leftAssoc("&", CatExpr::Kind::Inter, &Parser::cart); }

	CatExpr cart()
	{
		CatExpr lhs = prefix();
		while (sym("*") && startsExpr(1)) {
			SourcePos p = next().pos;
			CatExpr rhs = prefix();
			lhs = node(CatExpr::Kind::Cartesian, {std::move(lhs), std::move(rhs)}, p);
		}
		return lhs;
	}

	CatExpr prefix()
	{
		if (sym("~")) {
			SourcePos p = next().pos;
			return node(CatExpr::Kind::Complement, {prefix()}, p);
		}
		return postfix();
	}

	CatExpr postfix()
	{
		CatExpr e = primary();
		for (;;) {
			SourcePos p = peek().pos;
			if (sym("^-1")) {
				next();
				e = node(CatExpr::Kind::Inverse, {std::move(e)}, p);
			} else if (sym("*") && !startsExpr(1)) {
				next();
				e = node(CatExpr::Kind::Star, {std::move(e)}, p);
			} else if (sym("+")) {
				next();
				e = node(CatExpr::Kind::Plus, {std::move(e)}, p);
			} else if (sym("?")) {
				next();
				e = node(CatExpr::Kind::Opt, {std::move(e)}, p);
			} else {
				return e;
			}
		}
	}

	CatExpr primary()
	{
		SourcePos p = peek().pos;
		if (sym("(")) {
			next();
			CatExpr e = expr();
			expect(")");
			return e;
		}
		if (sym("[")) {
			next();
			CatExpr e = expr();
			expect("]");
			return node(CatExpr::Kind::Bracket, {std::move(e)}, p);
		}
		if (sym("0")) {
			next();
			return node(CatExpr::Kind::Empty, {}, p);
		}
		std::string n = name("an expression");
		if (sym("(")) {
			if (n != "domain" && n != "range")
				throw CatError("unsupported function '" + n + "'", p);
			next();
			CatExpr a = expr();
			expect(")");
			return node(n == "domain" ? CatExpr::Kind::Domain : CatExpr::Kind::Range, {std::move(a)}, p);
		}
		CatExpr e;
		e.kind = CatExpr::Kind::Name;
		e.name = n;
		e.pos = p;
		return e;
	}

	std::vector<Tok> toks_;
	std::size_t i_ = 0;
};

void freeNames(const CatExpr &e, std::vector<const CatExpr *> &out)
{
	if (e.kind == CatExpr::Kind::Name)
		out.push_back(&e);
	for (auto &a : e.args)
		freeNames(a, out);
}

void checkNames(const CatModel &m)
{
	std::set<std::string> bound(catBuiltins().begin(), catBuiltins().end());
	std::map<std::string, std::size_t> definedAt;
	for (std::size_t i = 0; i < m.statements.size(); i++) {
		auto &s = m.statements[i];
		if (s.kind == CatStatement::Kind::Let || s.kind == CatStatement::Kind::With)
			definedAt.emplace(s.name, i);
	}
	auto check = [&](const CatExpr &e, std::size_t at) {
		std::vector<const CatExpr *> names;
		freeNames(e, names);
		for (auto *n : names) {
			if (bound.count(n->name))
				continue;
			auto it = definedAt.find(n->name);
			if (it != definedAt.end() && it->second >= at)
				throw CatRecursiveDefinition("'" + n->name + "' is used before its definition (recursion is not supported)", n->pos);
			throw CatUndefinedName("undefined name '" + n->name + "'", n->pos);
		}
	};
	for (std::size_t i = 0; i < m.statements.size(); i++) {
		auto &s = m.statements[i];
		switch (s.kind) {
		case CatStatement::Kind::Let:
			check(s.expr, i);
			bound.insert(s.name);
			break;
		case CatStatement::Kind::With:
			check(s.set, i);
			check(s.order, i);
			bound.insert(s.name);
			break;
		case CatStatement::Kind::Check:
			check(s.expr, i);
			break;
		case CatStatement::Kind::Show:
			for (auto &e : s.shown)
				check(e, i);
			break;
		}
	}
}

/* ---------------------------------------------------------------- evaluation */

struct Val {
	bool isSet = false;
	EventSet set;
	Relation rel;
};

struct Evaluator {
	const SymbolicExecutionGraph &g;
	std::size_t n;
	std::map<std::string, Val> builtins;

	explicit Evaluator(const SymbolicExecutionGraph &graph) : g(graph), n(graph.size())
	{
		auto setv = [&](const char *name, EventSet s) { builtins[name] = Val{true, s, {}}; };
		auto relv = [&](const char *name, Relation r) { builtins[name] = Val{false, {}, std::move(r)}; };
		EventSet all = EventSet::full(n);
		relv("po", g.po);
		relv("rf", g.rf);
		relv("id", Relation::identity(n));
		relv("loc", g.sameLocation());
		Relation same(n), other(n);
		for (std::size_t a = 0; a < n; a++)
			for (std::size_t b = 0; b < n; b++) {
				ThreadId ta = g.events[a].thread, tb = g.events[b].thread;
				if (ta != 0 && ta == tb)
					same.insert(a, b);
				else if (ta != tb || ta == 0)
					other.insert(a, b);
			}
		relv("int", same);
		relv("ext", other - Relation::identity(n));
		relv("0", Relation(n));
		setv("_", all);
		setv("E", all);
		setv("M", g.readSet | g.writeSet);
		setv("W", g.writeSet);
		setv("R", g.readSet);
		setv("F", g.fenceSet);
		setv("IW", g.initSet);
		setv("V", g.volatileSet);
		EventSet rmw, pln, opq, acq, rel;
		std::map<FenceMode, EventSet> fences;
		for (std::size_t e = 0; e < n; e++) {
			const EventLabel &l = g.events[e].label;
			if (l.type == EventType::Rmw)
				rmw.insert(e);
			if (l.rm == ReadMode::Pln || l.wm == WriteMode::Pln)
				pln.insert(e);
			if (l.rm == ReadMode::Opq || l.wm == WriteMode::Opq)
				opq.insert(e);
			if (l.rm == ReadMode::Acq)
				acq.insert(e);
			if (l.wm == WriteMode::Rel)
				rel.insert(e);
			if (l.isFence())
				fences[l.fm].insert(e);
		}
		setv("RMW", rmw);
		setv("PLN", pln);
		setv("OPQ", opq);
		setv("ACQ", acq);
		setv("REL", rel);
		setv("Fww", fences[FenceMode::WW]);
		setv("Frr", fences[FenceMode::RR]);
		setv("Facq", fences[FenceMode::Acq]);
		setv("Frel", fences[FenceMode::Rel]);
		setv("Ffull", fences[FenceMode::Full]);
	}

	[[noreturn]] void typeError(const CatExpr &e, const char *what) const
	{
		throw ModelError(std::to_string(e.pos.line) + ":" + std::to_string(e.pos.column) + ": " + what);
	}

	Relation asRel(const CatExpr &e, const std::map<std::string, Val> &env) const
	{
		Val v = eval(e, env);
		if (v.isSet)
			typeError(e, "expected a relation, got a set");
		return v.rel;
	}

	EventSet asSet(const CatExpr &e, const std::map<std::string, Val> &env) const
	{
		Val v = eval(e, env);
		if (!v.isSet)
			typeError(e, "expected a set, got a relation");
		return v.set;
	}

	Val eval(const CatExpr &e, const std::map<std::string, Val> &env) const
	{
		using K = CatExpr::Kind;
		switch (e.kind) {
		case K::Name: {
			auto it = env.find(e.name);
			if (it != env.end())
				return it->second;
			auto b = builtins.find(e.name);
			if (b != builtins.end())
				return b->second;
			typeError(e, "undefined name");
		}
		case K::Empty:
			return Val{false, {}, Relation(n)};
		case K::Union:
		case K::Inter:
		case K::Diff: {
			Val a = eval(e.args[0], env), b = eval(e.args[1], env);
			if (a.isSet != b.isSet)
				typeError(e, "operands mix a set and a relation");
			if (a.isSet) {
				EventSet s = e.kind == K::Union ? a.set | b.set : e.kind == K::Inter ? a.set & b.set : a.set - b.set;
				return Val{true, s, {}};
			}
			Relation r = e.kind == K::Union ? a.rel | b.rel : e.kind == K::Inter ? a.rel & b.rel : a.rel - b.rel;
			return Val{false, {}, std::move(r)};
		}
		case K::Seq:
			return Val{false, {}, asRel(e.args[0], env).compose(asRel(e.args[1], env))};
		case K::Cartesian:
			return Val{false, {}, Relation::product(n, asSet(e.args[0], env), asSet(e.args[1], env))};
		case K::Inverse:
			return Val{false, {}, asRel(e.args[0], env).inverse()};
		case K::Star:
			return Val{false, {}, asRel(e.args[0], env).reflexiveTransitiveClosure()};
		case K::Plus:
			return Val{false, {}, asRel(e.args[0], env).transitiveClosure()};
		case K::Opt:
			return Val{false, {}, asRel(e.args[0], env).reflexiveClosure()};
		case K::Complement: {
			Val a = eval(e.args[0], env);
			if (a.isSet)
				return Val{true, a.set.complement(n), {}};
			return Val{false, {}, a.rel.complement()};
		}
		case K::Bracket:
			return Val{false, {}, Relation::identity(n, asSet(e.args[0], env))};
		case K::Domain:
			return Val{true, asRel(e.args[0], env).domain(), {}};
		case K::Range:
			return Val{true, asRel(e.args[0], env).range(), {}};
		}
		typeError(e, "bad expression");
	}

	bool passes(const CatStatement &s, const std::map<std::string, Val> &env) const
	{
		Relation r = asRel(s.expr, env);
		switch (s.check) {
		case CatStatement::Check::Irreflexive: return r.irreflexive();
		case CatStatement::Check::Acyclic: return r.acyclic();
		case CatStatement::Check::Empty: return r.empty();
		}
		return false;
	}
};

void linearise(std::vector<std::size_t> &prefix, EventSet remaining, const Relation &order, std::size_t n,
	       std::vector<Relation> &out)
{
	if (remaining.empty()) {
		Relation r(n);
		for (std::size_t i = 0; i < prefix.size(); i++)
			for (std::size_t j = i + 1; j < prefix.size(); j++)
				r.insert(prefix[i], prefix[j]);
		out.push_back(std::move(r));
		return;
	}
	remaining.forEach([&](std::size_t e) {
		if (!(order.predecessors(e) & remaining).empty())
			return;
		prefix.push_back(e);
		EventSet rest = remaining;
		rest.erase(e);
		linearise(prefix, rest, order, n, out);
		prefix.pop_back();
	});
}

} // namespace

CatModel parseCat(const std::string &text)
{
	Parser p(lex(text));
	CatModel m = p.model();
	checkNames(m);
	return m;
}

CatModel parseCatFile(const std::string &path)
{
	return parseCat(readFile(path));
}

std::vector<Relation> linearisations(EventSet s, const Relation &r)
{
	std::size_t n = r.size();
	Relation order = r.restrict(s).transitiveClosure();
	std::vector<Relation> out;
	if (!order.irreflexive())
		return out;
	std::vector<std::size_t> prefix;
	linearise(prefix, s, order, n, out);
	return out;
}

namespace {

/* A read-modify-write is evaluated as a read immediately po-followed by a write. */
struct SplitView {
	SymbolicExecutionGraph graph;
	std::vector<std::size_t> origin;
	EventSet rmwParts;
};

SplitView splitRmw(const SymbolicExecutionGraph &g)
{
	SplitView v;
	std::vector<std::size_t> first(g.size()), last(g.size());
	for (std::size_t e = 0; e < g.size(); e++) {
		const Event &ev = g.events[e];
		first[e] = v.graph.events.size();
		if (ev.label.type == EventType::Rmw) {
			Event r = ev, w = ev;
			r.label.type = EventType::Read;
			r.label.wm.reset();
			r.label.writeExpr = Expr{};
			w.label.type = EventType::Write;
			w.label.rm.reset();
			w.label.readExpr = Expr{};
			v.graph.events.push_back(r);
			v.graph.events.push_back(w);
			v.origin.push_back(e);
			v.origin.push_back(e);
			v.rmwParts.insert(first[e]);
			v.rmwParts.insert(first[e] + 1);
		} else {
			v.graph.events.push_back(ev);
			v.origin.push_back(e);
		}
		last[e] = v.graph.events.size() - 1;
	}
	std::size_t n = v.graph.events.size();
	if (n > maxEvents)
		throw ModelError("too many events after splitting read-modify-writes");
	v.graph.po = Relation(n);
	v.graph.rf = Relation(n);
	for (auto [a, b] : g.po.pairs())
		v.graph.po.insert(last[a], first[b]);
	for (std::size_t e = 0; e < g.size(); e++)
		if (first[e] != last[e])
			v.graph.po.insert(first[e], last[e]);
	v.graph.po = v.graph.po.transitiveClosure();
	for (auto [a, b] : g.rf.pairs())
		v.graph.rf.insert(last[a], first[b]);
	v.graph.gamma = g.gamma;
	v.graph.finalize();
	return v;
}

Relation project(const Relation &r, const std::vector<std::size_t> &origin, std::size_t n)
{
	Relation out(n);
	for (auto [a, b] : r.pairs())
		out.insert(origin[a], origin[b]);
	return out;
}

} // namespace

std::vector<SymbolicExecutionGraph> evaluateSem(const CatModel &model, const SymbolicExecutionGraph &g)
{
	bool split = false;
	for (auto &e : g.events)
		split |= e.label.type == EventType::Rmw;
	std::optional<SplitView> view;
	if (split)
		view = splitRmw(g);
	Evaluator ev(split ? view->graph : g);
	if (split)
		ev.builtins["RMW"] = Val{true, view->rmwParts, {}};
	std::vector<SymbolicExecutionGraph> out;
	std::set<std::vector<std::uint64_t>> seen;

	auto finish = [&](const std::map<std::string, Val> &env) {
		Enhancement enh;
		for (auto [name, dst] : {std::pair<const char *, Relation *>{"so", &enh.so}, {"sw", &enh.sw}, {"hb", &enh.hb}}) {
			auto it = env.find(name);
			if (it == env.end())
				throw ModelError(std::string("model does not define '") + name + "'");
			if (it->second.isSet)
				throw ModelError(std::string("'") + name + "' must be a relation");
			*dst = it->second.rel;
		}
		/* hb must be a partial order and so a strict order */
		if (!enh.hb.isTransitive() || !enh.hb.isAntisymmetric())
			return;
		if (!enh.so.irreflexive() || !enh.so.isTransitive())
			return;
		if (split) {
			Relation id = Relation::identity(g.size());
			enh.so = project(enh.so, view->origin, g.size()) - id;
			enh.sw = project(enh.sw, view->origin, g.size()) - id;
			enh.hb = project(enh.hb, view->origin, g.size());
			/* nothing is synchronization-ordered between the two halves of one RMW */
			if (!enh.so.isAntisymmetric())
				return;
		}
		std::vector<std::uint64_t> sig;
		for (const Relation *r : {&enh.so, &enh.sw, &enh.hb})
			for (std::size_t i = 0; i < r->size(); i++)
				sig.push_back(r->row(i));
		if (!seen.insert(sig).second)
			return;
		SymbolicExecutionGraph h = g;
		h.enhanced = std::move(enh);
		out.push_back(std::move(h));
	};

	std::function<void(std::size_t, std::map<std::string, Val>)> run = [&](std::size_t i, std::map<std::string, Val> env) {
		for (; i < model.statements.size(); i++) {
			const CatStatement &s = model.statements[i];
			switch (s.kind) {
			case CatStatement::Kind::Let:
				env[s.name] = ev.eval(s.expr, env);
				break;
			case CatStatement::Kind::With: {
				EventSet set = ev.asSet(s.set, env);
				Relation ord = ev.asRel(s.order, env);
				for (auto &lin : linearisations(set, ord)) {
					auto next = env;
					next[s.name] = Val{false, {}, std::move(lin)};
					run(i + 1, std::move(next));
				}
				return;
			}
			case CatStatement::Kind::Check:
				if (!ev.passes(s, env))
					return;
				break;
			case CatStatement::Kind::Show:
				break;
			}
		}
		finish(env);
	};
	run(0, {});
	return out;
}

} // namespace jmt
