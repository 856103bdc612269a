#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace jmt {

using Value = std::uint32_t;

/*
 * Integer expressions over 32-bit unsigned values. Variables are registers in
 * programs and solver constants in encodings. Boolean operators yield 0 or 1.
 */
struct Expr {
	enum class Op {
		Const, Var,
		Add, Sub, Mul, BitAnd, BitOr, BitXor,
		Eq, Ne, Lt, Le, Gt, Ge,
		Not, And, Or,
	};

	Op op = Op::Const;
	Value value = 0;
	std::string name;
	std::vector<Expr> args;

	static Expr constant(Value v);
	static Expr var(std::string name);
	static Expr unary(Op op, Expr a);
	static Expr binary(Op op, Expr a, Expr b);
	static Expr eq(Expr a, Expr b) { return binary(Op::Eq, std::move(a), std::move(b)); }
	static Expr ne(Expr a, Expr b) { return binary(Op::Ne, std::move(a), std::move(b)); }
	static Expr lnot(Expr a) { return unary(Op::Not, std::move(a)); }
	static Expr land(Expr a, Expr b) { return binary(Op::And, std::move(a), std::move(b)); }
	static Expr lor(Expr a, Expr b) { return binary(Op::Or, std::move(a), std::move(b)); }

	bool isConst() const { return op == Op::Const; }
	bool isVar() const { return op == Op::Var; }
	/* Comparison and logical operators produce truth values. */
	bool isBoolean() const;

	bool operator==(const Expr &) const = default;
};

using Env = std::map<std::string, Value>;

/* Evaluates with wrap-around arithmetic. Throws if a variable is unbound. */
Value eval(const Expr &e, const Env &env);
inline bool holds(const Expr &e, const Env &env) { return eval(e, env) != 0; }

void collectVars(const Expr &e, std::set<std::string> &out);
Expr rename(const Expr &e, const std::function<std::string(const std::string &)> &f);

/* C-like rendering with minimal parentheses; parses back to the same tree. */
std::string toString(const Expr &e);
const char *opSymbol(Expr::Op op);
int precedence(Expr::Op op);

} // namespace jmt
