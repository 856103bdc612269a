#include "jmt/relation.hpp"

namespace jmt {

std::vector<std::size_t> EventSet::elements() const
{
	std::vector<std::size_t> out;
	forEach([&](std::size_t i) { out.push_back(i); });
	return out;
}

Relation Relation::identity(std::size_t n)
{
	return identity(n, EventSet::full(n));
}

Relation Relation::identity(std::size_t n, EventSet s)
{
	Relation r(n);
	s.forEach([&](std::size_t i) { r.insert(i, i); });
	return r;
}

Relation Relation::product(std::size_t n, EventSet a, EventSet b)
{
	Relation r(n);
	a.forEach([&](std::size_t i) { r.rows_[i] = b.bits(); });
	return r;
}

EventSet Relation::predecessors(std::size_t b) const
{
	EventSet s;
	for (std::size_t a = 0; a < rows_.size(); a++)
		if (contains(a, b))
			s.insert(a);
	return s;
}

bool Relation::empty() const
{
	for (auto r : rows_)
		if (r)
			return false;
	return true;
}

std::size_t Relation::count() const
{
	std::size_t c = 0;
	for (auto r : rows_)
		c += static_cast<std::size_t>(std::popcount(r));
	return c;
}

Relation Relation::operator|(const Relation &o) const
{
	Relation r = *this;
	for (std::size_t i = 0; i < rows_.size(); i++)
		r.rows_[i] |= o.rows_[i];
	return r;
}

Relation Relation::operator&(const Relation &o) const
{
	Relation r = *this;
	for (std::size_t i = 0; i < rows_.size(); i++)
		r.rows_[i] &= o.rows_[i];
	return r;
}

Relation Relation::operator-(const Relation &o) const
{
	Relation r = *this;
	for (std::size_t i = 0; i < rows_.size(); i++)
		r.rows_[i] &= ~o.rows_[i];
	return r;
}

Relation Relation::compose(const Relation &o) const
{
	Relation r(rows_.size());
	for (std::size_t a = 0; a < rows_.size(); a++) {
		std::uint64_t acc = 0;
		for (std::uint64_t b = rows_[a]; b; b &= b - 1)
			acc |= o.rows_[static_cast<std::size_t>(std::countr_zero(b))];
		r.rows_[a] = acc;
	}
	return r;
}

Relation Relation::inverse() const
{
	Relation r(rows_.size());
	for (std::size_t a = 0; a < rows_.size(); a++)
		for (std::uint64_t b = rows_[a]; b; b &= b - 1)
			r.insert(static_cast<std::size_t>(std::countr_zero(b)), a);
	return r;
}

Relation Relation::complement() const
{
	Relation r(rows_.size());
	std::uint64_t all = EventSet::full(rows_.size()).bits();
	for (std::size_t a = 0; a < rows_.size(); a++)
		r.rows_[a] = ~rows_[a] & all;
	return r;
}

Relation Relation::transitiveClosure() const
{
	/* Warshall over bit rows */
	Relation r = *this;
	std::size_t n = rows_.size();
	for (std::size_t k = 0; k < n; k++)
		for (std::size_t i = 0; i < n; i++)
			if (r.contains(i, k))
				r.rows_[i] |= r.rows_[k];
	return r;
}

Relation Relation::reflexiveTransitiveClosure() const
{
	return transitiveClosure() | identity(rows_.size());
}

Relation Relation::reflexiveClosure() const
{
	return *this | identity(rows_.size());
}

Relation Relation::transitiveReduction() const
{
	Relation strict = *this - identity(rows_.size());
	Relation plus = strict.transitiveClosure();
	return strict - strict.compose(plus);
}

Relation Relation::restrict(EventSet s) const
{
	Relation r(rows_.size());
	s.forEach([&](std::size_t i) { r.rows_[i] = rows_[i] & s.bits(); });
	return r;
}

EventSet Relation::domain() const
{
	EventSet s;
	for (std::size_t a = 0; a < rows_.size(); a++)
		if (rows_[a])
			s.insert(a);
	return s;
}

EventSet Relation::range() const
{
	std::uint64_t acc = 0;
	for (auto r : rows_)
		acc |= r;
	return EventSet(acc);
}

bool Relation::irreflexive() const
{
	for (std::size_t a = 0; a < rows_.size(); a++)
		if (contains(a, a))
			return false;
	return true;
}

bool Relation::acyclic() const
{
	return transitiveClosure().irreflexive();
}

bool Relation::isTransitive() const
{
	return compose(*this) - *this == Relation(rows_.size());
}

bool Relation::isAntisymmetric() const
{
	Relation both = *this & inverse();
	return (both - identity(rows_.size())).empty();
}

bool Relation::isStrictTotalOrderOn(EventSet s) const
{
	if (restrict(s) != *this || !irreflexive() || !isTransitive())
		return false;
	Relation sym = *this | inverse() | identity(rows_.size(), s);
	return sym == product(rows_.size(), s, s);
}

std::vector<std::pair<std::size_t, std::size_t>> Relation::pairs() const
{
	std::vector<std::pair<std::size_t, std::size_t>> out;
	for (std::size_t a = 0; a < rows_.size(); a++)
		for (std::uint64_t b = rows_[a]; b; b &= b - 1)
			out.emplace_back(a, static_cast<std::size_t>(std::countr_zero(b)));
	return out;
}

} // namespace jmt
