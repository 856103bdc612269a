#pragma once

#include "jmt/error.hpp"
#include "jmt/expr.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace jmt {

enum class ReadMode { Pln, Opq, Acq, Vol };
enum class WriteMode { Pln, Opq, Rel, Vol };
enum class FenceMode { WW, RR, Acq, Rel, Full };

const char *toString(ReadMode m);
const char *toString(WriteMode m);
const char *toString(FenceMode m);

/* Threads are numbered from 1; 0 is reserved for initializer events. */
using ThreadId = int;
using Register = std::string;
using Location = std::string;

struct Instruction;
using Block = std::vector<Instruction>;

struct Instruction {
	enum class Kind { Assign, Store, Load, Fence, Cax, If, Skip };

	Kind kind = Kind::Skip;
	Register reg;           /* destination of Assign, Load, Cax */
	Location loc;           /* Store, Load, Cax */
	Expr expr;              /* Assign value, Store value, If condition */
	Expr expected, desired; /* Cax operands */
	ReadMode rm = ReadMode::Pln;
	WriteMode wm = WriteMode::Pln;
	FenceMode fm = FenceMode::Full;
	Block thenBlock, elseBlock;
	SourcePos pos;

	bool operator==(const Instruction &o) const;
};

/* Behavior formulas: boolean combinations of register = value atoms. */
struct Formula {
	enum class Kind { True, False, Atom, Not, And, Or };

	Kind kind = Kind::True;
	ThreadId thread = 0;
	Register reg;
	Value value = 0;
	std::vector<Formula> args;

	static Formula atom(ThreadId t, Register r, Value v);
	static Formula conj(std::vector<Formula> fs);
	static Formula negate(Formula f);

	bool operator==(const Formula &) const = default;
};

using RegisterRef = std::pair<ThreadId, Register>;
using Behavior = std::map<RegisterRef, Value>;

enum class Polarity { Required, Forbidden };
const char *toString(Polarity p);

struct AssertionClause {
	Polarity polarity;
	Formula formula;
};

struct BehaviorAssertion {
	enum class Quantifier { Exists, NotExists, Forall };

	Quantifier quantifier = Quantifier::Exists;
	Formula formula;

	/* exists -> required; ~exists -> forbidden; forall f -> required f, forbidden !f */
	std::vector<AssertionClause> clauses() const;
	bool operator==(const BehaviorAssertion &) const = default;
};

struct LitmusTest {
	std::string name;
	std::map<Location, Value> init;
	std::vector<Block> threads;
	BehaviorAssertion assertion;

	/* Locations named in the init block or accessed by any thread, sorted. */
	std::vector<Location> locations() const;
	Value initialValue(const Location &loc) const;

	bool operator==(const LitmusTest &) const = default;
};

LitmusTest parseLitmus(const std::string &text);
LitmusTest parseLitmusFile(const std::string &path);
std::string toString(const LitmusTest &t);
std::string toString(const Formula &f);
std::string toString(const Behavior &b);

std::set<RegisterRef> registersOf(const LitmusTest &t);
std::set<RegisterRef> registersOf(const Formula &f);

bool evalFormula(const Formula &f, const Behavior &b);
/* Registers are unique program-wide, so the thread component can be dropped. */
Expr formulaToExpr(const Formula &f);

/* Parses an expression in the litmus expression syntax (used by tests and tools). */
Expr parseExpr(const std::string &text);

std::string readFile(const std::string &path);

} // namespace jmt
