#include "jmt/expr.hpp"
#include "jmt/error.hpp"

namespace jmt {

Expr Expr::constant(Value v)
{
	Expr e;
	e.op = Op::Const;
	e.value = v;
	return e;
}

Expr Expr::var(std::string name)
{
	Expr e;
	e.op = Op::Var;
	e.name = std::move(name);
	return e;
}

Expr Expr::unary(Op op, Expr a)
{
	Expr e;
	e.op = op;
	e.args.push_back(std::move(a));
	return e;
}

Expr Expr::binary(Op op, Expr a, Expr b)
{
	Expr e;
	e.op = op;
	e.args.push_back(std::move(a));
	e.args.push_back(std::move(b));
	return e;
}

bool Expr::isBoolean() const
{
	switch (op) {
	case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
	case Op::Not: case Op::And: case Op::Or:
		return true;
	default:
		return false;
	}
}

Value eval(const Expr &e, const Env &env)
{
	using Op = Expr::Op;
	switch (e.op) {
	case Op::Const:
		return e.value;
	case Op::Var: {
		auto it = env.find(e.name);
		if (it == env.end())
			throw Error("unbound variable " + e.name);
		return it->second;
	}
	case Op::Not:
		return eval(e.args[0], env) == 0 ? 1 : 0;
	case Op::And:
		return (eval(e.args[0], env) != 0 && eval(e.args[1], env) != 0) ? 1 : 0;
	case Op::Or:
		return (eval(e.args[0], env) != 0 || eval(e.args[1], env) != 0) ? 1 : 0;
	default:
		break;
	}
	Value a = eval(e.args[0], env), b = eval(e.args[1], env);
	switch (e.op) {
	case Op::Add: return a + b;
	case Op::Sub: return a - b;
	case Op::Mul: return a * b;
	case Op::BitAnd: return a & b;
	case Op::BitOr: return a | b;
	case Op::BitXor: return a ^ b;
	case Op::Eq: return a == b;
	case Op::Ne: return a != b;
	case Op::Lt: return a < b;
	case Op::Le: return a <= b;
	case Op::Gt: return a > b;
	case Op::Ge: return a >= b;
	default: throw Error("bad expression");
	}
}

void collectVars(const Expr &e, std::set<std::string> &out)
{
	if (e.isVar())
		out.insert(e.name);
	for (auto &a : e.args)
		collectVars(a, out);
}

Expr rename(const Expr &e, const std::function<std::string(const std::string &)> &f)
{
	if (e.isVar())
		return Expr::var(f(e.name));
	Expr r = e;
	for (auto &a : r.args)
		a = rename(a, f);
	return r;
}

const char *opSymbol(Expr::Op op)
{
	using Op = Expr::Op;
	switch (op) {
	case Op::Add: return "+";
	case Op::Sub: return "-";
	case Op::Mul: return "*";
	case Op::BitAnd: return "&";
	case Op::BitOr: return "|";
	case Op::BitXor: return "^";
	case Op::Eq: return "==";
	case Op::Ne: return "!=";
	case Op::Lt: return "<";
	case Op::Le: return "<=";
	case Op::Gt: return ">";
	case Op::Ge: return ">=";
	case Op::Not: return "!";
	case Op::And: return "&&";
	case Op::Or: return "||";
	default: return "?";
	}
}

/* Higher binds tighter. */
int precedence(Expr::Op op)
{
	using Op = Expr::Op;
	switch (op) {
	case Op::Or: return 1;
	case Op::And: return 2;
	case Op::BitOr: return 3;
	case Op::BitXor: return 4;
	case Op::BitAnd: return 5;
	case Op::Eq: case Op::Ne: return 6;
	case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: return 7;
	case Op::Add: case Op::Sub: return 8;
	case Op::Mul: return 9;
	case Op::Not: return 10;
	default: return 11;
	}
}

static void print(const Expr &e, std::string &out, int ctx, bool rightOperand)
{
	using Op = Expr::Op;
	if (e.op == Op::Const) {
		out += std::to_string(e.value);
		return;
	}
	if (e.op == Op::Var) {
		out += e.name;
		return;
	}
	int p = precedence(e.op);
	bool paren = p < ctx || (p == ctx && rightOperand);
	if (paren)
		out += '(';
	if (e.op == Op::Not) {
		out += '!';
		print(e.args[0], out, p, false);
	} else {
		/* left-associative: the right operand needs parentheses at equal precedence */
		print(e.args[0], out, p, false);
		out += ' ';
		out += opSymbol(e.op);
		out += ' ';
		print(e.args[1], out, p, true);
	}
	if (paren)
		out += ')';
}

std::string toString(const Expr &e)
{
	std::string out;
	print(e, out, 0, false);
	return out;
}

} // namespace jmt
