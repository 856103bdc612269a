#pragma once

#include "jmt/behavior.hpp"
#include "jmt/litmus.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jmt::x86 {

/* One x86 instruction in herd syntax; a label line has an empty mnemonic. */
struct Instr {
	std::string op;
	std::vector<std::string> args;
	std::string label;

	bool operator==(const Instr &) const = default;
};

std::string toString(const Instr &i);

/* Source register <-> x86 register, per thread (index 0 is source thread 1). */
class RegisterMap {
public:
	void bind(ThreadId t, const Register &src, const std::string &hw);
	std::optional<std::string> hardware(ThreadId t, const Register &src) const;
	std::optional<Register> source(ThreadId t, const std::string &hw) const;
	const std::map<ThreadId, std::map<Register, std::string>> &entries() const { return fwd_; }

private:
	std::map<ThreadId, std::map<Register, std::string>> fwd_;
	std::map<ThreadId, std::map<std::string, Register>> inv_;
};

struct Program {
	std::string name;
	std::map<Location, Value> init;
	std::vector<std::vector<Instr>> threads;
	BehaviorAssertion::Quantifier quantifier = BehaviorAssertion::Quantifier::Exists;
	std::string condition;
};

struct Compiled {
	Program program;
	RegisterMap registers;
};

/* Register allocation order; EAX is kept free in threads that contain a CAX. */
const std::vector<std::string> &registerPool();

std::vector<Instr> compileThread(const Block &body, ThreadId t, RegisterMap &map);
Compiled compile(const LitmusTest &test);
std::string render(const Program &p);

struct HerdConfig {
	std::string command;               /* empty: JMT_HERD, then herd7 */
	std::vector<std::string> args;
	int timeoutMs = 60000;
};
HerdConfig defaultHerdConfig();

/* Final states keyed by (herd thread P<n> as n + 1, x86 register). */
using HwState = std::map<std::pair<ThreadId, std::string>, Value>;

std::vector<HwState> parseHerdOutput(const std::string &text);
std::vector<HwState> runHerd(const Program &p, const HerdConfig &cfg);
std::vector<Behavior> restoreBehaviors(const std::vector<HwState> &raw, const RegisterMap &map);

struct InclusionResult {
	Outcome outcome = Outcome::Pass;
	std::vector<Behavior> behaviors;
	std::optional<Behavior> witness; /* a hardware behavior the model does not allow */
	std::string message;
};

InclusionResult checkInclusion(Engine &engine, const LitmusTest &test, const CatModel &sem,
			       const std::vector<Behavior> &behaviors);
InclusionResult checkInclusion(Engine &engine, const LitmusTest &test, const CatModel &sem, const HerdConfig &cfg);

} // namespace jmt::x86
