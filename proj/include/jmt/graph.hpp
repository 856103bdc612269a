#pragma once

#include "jmt/litmus.hpp"
#include "jmt/relation.hpp"

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace jmt {

enum class EventType { Read, Write, Rmw, Fence };
const char *toString(EventType t);

struct EventLabel {
	EventType type = EventType::Read;
	Location loc;                     /* empty for fences */
	std::optional<ReadMode> rm;       /* absent for initializers and fences */
	std::optional<WriteMode> wm;
	FenceMode fm = FenceMode::Full;
	Expr readExpr;                    /* receives the read value (Read, Rmw) */
	Expr writeExpr;                   /* written value (Write, Rmw) */

	bool isRead() const { return type == EventType::Read || type == EventType::Rmw; }
	bool isWrite() const { return type == EventType::Write || type == EventType::Rmw; }
	bool isFence() const { return type == EventType::Fence; }
	bool isVolatile() const { return rm == ReadMode::Vol || wm == WriteMode::Vol; }

	bool operator==(const EventLabel &) const = default;
};

struct Event {
	ThreadId thread = 0;     /* 0 for initializers */
	EventLabel label;

	bool isInit() const { return thread == 0; }
	bool operator==(const Event &) const = default;
};

/*
 * Identity of an event across graphs of the same program: initializers by
 * location, others by thread, type, location (or fence mode) and the index
 * among similar po-earlier events.
 */
struct EventKey {
	ThreadId thread = 0;
	EventType type = EventType::Write;
	std::string what;
	unsigned idx = 0;

	auto operator<=>(const EventKey &) const = default;
	bool operator==(const EventKey &) const = default;
};
std::string toString(const EventKey &k);

struct Enhancement {
	Relation so, sw, hb;
	bool operator==(const Enhancement &) const = default;
};

struct SymbolicExecutionGraph {
	std::vector<Event> events;
	Relation po, rf;
	std::vector<Expr> gamma;
	std::set<Register> definedRegisters;
	std::optional<Enhancement> enhanced;

	/* derived by finalize() */
	std::vector<EventKey> keys;
	EventSet readSet, writeSet, initSet, fenceSet, volatileSet;

	std::size_t size() const { return events.size(); }
	/* Computes keys and event classes; call after events and po are fixed. */
	void finalize();

	unsigned idx(std::size_t e) const { return keys[e].idx; }
	std::optional<std::size_t> find(const EventKey &k) const;
	std::optional<std::size_t> rfSource(std::size_t r) const;
	EventSet locationSet(const Location &l) const;
	Relation sameLocation() const;
	/* Every read's rf source is hb-before it. Requires an enhancement. */
	bool wellBehaved() const;

	bool operator==(const SymbolicExecutionGraph &o) const
	{
		return events == o.events && po == o.po && rf == o.rf && gamma == o.gamma && enhanced == o.enhanced;
	}
};

/* Similarity: same type and location (fences: same mode). */
bool similar(const Event &a, const Event &b);
bool eventsEqual(std::size_t e1, const SymbolicExecutionGraph &g1, std::size_t e2, const SymbolicExecutionGraph &g2);

std::string labelString(const Event &e);
std::string dumpText(const SymbolicExecutionGraph &g);
std::string dumpDot(const SymbolicExecutionGraph &g, const std::string &name = "G");

} // namespace jmt
