#pragma once

#include <bit>
#include <cstdint>
#include <utility>
#include <vector>

namespace jmt {

/* Graphs are small; events are indices below 64 and sets are bitmasks. */
constexpr std::size_t maxEvents = 64;

class EventSet {
public:
	EventSet() = default;
	explicit EventSet(std::uint64_t bits) : bits_(bits) {}
	static EventSet full(std::size_t n) { return EventSet(n >= 64 ? ~0ULL : ((1ULL << n) - 1)); }
	static EventSet single(std::size_t i) { return EventSet(1ULL << i); }

	bool contains(std::size_t i) const { return (bits_ >> i) & 1; }
	void insert(std::size_t i) { bits_ |= 1ULL << i; }
	void erase(std::size_t i) { bits_ &= ~(1ULL << i); }
	bool empty() const { return bits_ == 0; }
	std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
	std::uint64_t bits() const { return bits_; }
	bool subsetOf(EventSet o) const { return (bits_ & ~o.bits_) == 0; }

	EventSet operator|(EventSet o) const { return EventSet(bits_ | o.bits_); }
	EventSet operator&(EventSet o) const { return EventSet(bits_ & o.bits_); }
	EventSet operator-(EventSet o) const { return EventSet(bits_ & ~o.bits_); }
	EventSet complement(std::size_t n) const { return EventSet(~bits_) & full(n); }
	bool operator==(const EventSet &) const = default;
	auto operator<=>(const EventSet &) const = default;

	std::vector<std::size_t> elements() const;

	template <typename F>
	void forEach(F &&f) const
	{
		for (std::uint64_t b = bits_; b; b &= b - 1)
			f(static_cast<std::size_t>(std::countr_zero(b)));
	}

private:
	std::uint64_t bits_ = 0;
};

/* Binary relation over the events 0..n-1 of one graph, stored as successor rows. */
class Relation {
public:
	Relation() = default;
	explicit Relation(std::size_t n) : rows_(n, 0) {}

	static Relation identity(std::size_t n);
	static Relation identity(std::size_t n, EventSet s);
	static Relation product(std::size_t n, EventSet a, EventSet b);

	std::size_t size() const { return rows_.size(); }
	bool contains(std::size_t a, std::size_t b) const { return (rows_[a] >> b) & 1; }
	void insert(std::size_t a, std::size_t b) { rows_[a] |= 1ULL << b; }
	void erase(std::size_t a, std::size_t b) { rows_[a] &= ~(1ULL << b); }
	EventSet successors(std::size_t a) const { return EventSet(rows_[a]); }
	EventSet predecessors(std::size_t b) const;
	std::uint64_t row(std::size_t a) const { return rows_[a]; }
	bool empty() const;
	std::size_t count() const;

	Relation operator|(const Relation &o) const;
	Relation operator&(const Relation &o) const;
	Relation operator-(const Relation &o) const;
	Relation compose(const Relation &o) const;
	Relation inverse() const;
	Relation complement() const;
	Relation transitiveClosure() const;
	Relation reflexiveTransitiveClosure() const;
	Relation reflexiveClosure() const;
	/* Transitive reduction of the strict part; assumes the strict part is acyclic. */
	Relation transitiveReduction() const;
	Relation restrict(EventSet s) const;

	EventSet domain() const;
	EventSet range() const;

	bool irreflexive() const;
	bool acyclic() const;
	bool isTransitive() const;
	bool isAntisymmetric() const;
	/* Strict total order over s: irreflexive, transitive, total on s, nothing outside s. */
	bool isStrictTotalOrderOn(EventSet s) const;

	std::vector<std::pair<std::size_t, std::size_t>> pairs() const;

	bool operator==(const Relation &) const = default;
	auto operator<=>(const Relation &) const = default;

private:
	std::vector<std::uint64_t> rows_;
};

} // namespace jmt
