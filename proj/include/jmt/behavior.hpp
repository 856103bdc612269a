#pragma once

#include "jmt/cat.hpp"
#include "jmt/causality.hpp"
#include "jmt/litmus.hpp"

#include <optional>
#include <string>

namespace jmt {

struct EngineConfig {
	SearchConfig search;
	unsigned jobs = 1;
	int pruneTimeoutMs = 10000;
};

struct Witness {
	Behavior behavior;
	Pool pool;
	Justification justification;
	std::map<std::string, Value> model;
};

struct AllowedResult {
	SearchStatus status = SearchStatus::NotFound;
	std::optional<Witness> witness;
	std::size_t targets = 0;
	std::size_t nodes = 0;
};

enum class Outcome { Pass, Fail, Unsupported, Unknown };
const char *toString(Outcome o);
int exitCode(Outcome o);

struct ClauseResult {
	Polarity polarity;
	Formula formula;
	AllowedResult result;
};

struct Verdict {
	Outcome outcome = Outcome::Pass;
	std::string message;
	std::vector<ClauseResult> clauses;
	std::size_t poolSize = 0;
	double seconds = 0;

	/* The witness that decided the verdict, if any. */
	const Witness *witness() const;
};

class Engine {
public:
	explicit Engine(smt::Backend &smt, EngineConfig cfg = {}) : smt_(smt), cfg_(cfg) {}

	/* Stage 1-3: SEM-consistent symbolic candidate graphs with their enhancements. */
	Pool buildPool(const LitmusTest &test, const CatModel &sem);

	std::optional<Witness> behaviorAllowed(const LitmusTest &test, const CatModel &sem, const Formula &phi);
	AllowedResult allowed(const LitmusTest &test, const Pool &pool, const Formula &phi);

	Verdict judge(const LitmusTest &test, const CatModel &sem);

	smt::Backend &backend() { return smt_; }
	const EngineConfig &config() const { return cfg_; }

private:
	smt::Backend &smt_;
	EngineConfig cfg_;
};

/* Parses and judges; parse-level unsupported features become an unsupported verdict. */
Verdict judgeFile(Engine &engine, const std::string &litmusPath, const CatModel &sem);

std::string verdictJson(const std::string &file, const LitmusTest *test, const Verdict &v, bool withJustification);
std::string justificationText(const Witness &w);

} // namespace jmt
