#pragma once

#include "jmt/behavior.hpp"
#include "jmt/litmus.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jmt::jcstress {

const char *varHandleGet(ReadMode m);
const char *varHandleSet(WriteMode m);
const char *varHandleFence(FenceMode m);
/* compareAndExchange variant for a (read, write) mode pair; throws CompileError when none exists. */
const char *varHandleCax(ReadMode rm, WriteMode wm);

std::string className(const std::string &testName);

/* Registers reported in the result record, in (thread, name) order. */
std::vector<RegisterRef> resultRegisters(const LitmusTest &test);

/*
 * Java source for the test. With an allowed set, its behaviors become
 * ACCEPTABLE rows and everything else is FORBIDDEN; without one, every
 * outcome is ACCEPTABLE_INTERESTING.
 */
std::string generate(const LitmusTest &test, const std::optional<std::vector<Behavior>> &allowed = std::nullopt);

/* Behaviors over the result registers with values drawn from `values` that the model allows. */
std::vector<Behavior> allowedBehaviors(Engine &engine, const LitmusTest &test, const CatModel &sem,
				       const std::vector<Value> &values);

} // namespace jmt::jcstress
