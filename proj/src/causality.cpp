#include "jmt/causality.hpp"
#include "jmt/encoding.hpp"

#include <array>
#include <climits>
#include <functional>
#include <unordered_map>

namespace jmt {

const char *toString(SearchStatus s)
{
	switch (s) {
	case SearchStatus::Found: return "found";
	case SearchStatus::NotFound: return "not-found";
	case SearchStatus::BudgetExhausted: return "budget-exhausted";
	}
	return "?";
}

bool isWellBehaved(const SymbolicExecutionGraph &g)
{
	return g.wellBehaved();
}

/* ---------------------------------------------------------------- key-based checks */

bool ok(const SymbolicExecutionGraph &t, const SymbolicExecutionGraph &g, const KeySet &ci, const KeySet &cprev)
{
	for (auto &k : cprev)
		if (!ci.count(k))
			return false;
	std::vector<std::size_t> gi, ti;
	for (auto &k : ci) {
		auto a = g.find(k), b = t.find(k);
		if (!a || !b)
			return false;
		gi.push_back(*a);
		ti.push_back(*b);
	}
	const Enhancement &ge = g.enhanced.value(), &te = t.enhanced.value();
	for (std::size_t a = 0; a < gi.size(); a++)
		for (std::size_t b = 0; b < gi.size(); b++) {
			if (ge.hb.contains(gi[a], gi[b]) != te.hb.contains(ti[a], ti[b]))
				return false;
			if (ge.so.contains(gi[a], gi[b]) != te.so.contains(ti[a], ti[b]))
				return false;
		}
	for (auto &kw : cprev)
		for (auto &kr : cprev)
			if (g.rf.contains(*g.find(kw), *g.find(kr)) != t.rf.contains(*t.find(kw), *t.find(kr)))
				return false;
	for (std::size_t r = 0; r < g.size(); r++) {
		if (!g.events[r].label.isRead() || cprev.count(g.keys[r]))
			continue;
		auto w = g.rfSource(r);
		if (!w || !ge.hb.contains(*w, r))
			return false;
	}
	for (auto &k : ci) {
		if (cprev.count(k) || k.type == EventType::Write || k.type == EventType::Fence)
			continue;
		auto wg = g.rfSource(*g.find(k));
		auto wt = t.rfSource(*t.find(k));
		if (!wg || !wt || !cprev.count(g.keys[*wg]) || !cprev.count(t.keys[*wt]))
			return false;
	}
	return true;
}

std::vector<JustificationStage> genSuccessors(const Pool &pool, std::size_t target, const JustificationStage &current,
					      std::size_t bound)
{
	const SymbolicExecutionGraph &t = pool[target];
	std::vector<JustificationStage> out;
	for (std::size_t gi = 0; gi < pool.size(); gi++) {
		const SymbolicExecutionGraph &g = pool[gi];
		std::vector<EventKey> frontier;
		for (auto &k : t.keys)
			if (!current.committed.count(k) && g.find(k))
				frontier.push_back(k);
		std::size_t n = frontier.size();
		if (n >= 24)
			throw Error("frontier too large for exhaustive successor generation");
		for (std::uint64_t m = 1; m < (1ULL << n); m++) {
			if (bound && static_cast<std::size_t>(std::popcount(m)) > bound)
				continue;
			KeySet ci = current.committed;
			for (std::size_t i = 0; i < n; i++)
				if ((m >> i) & 1)
					ci.insert(frontier[i]);
			if (ok(t, g, ci, current.committed))
				out.push_back({gi, std::move(ci)});
		}
	}
	return out;
}

bool checkCondition8(const Pool &pool, const Justification &j)
{
	const SymbolicExecutionGraph &t = pool[j.target];
	auto hasSw = [](const SymbolicExecutionGraph &g, const EventKey &x, const EventKey &y) {
		auto a = g.find(x), b = g.find(y);
		return a && b && g.enhanced->sw.contains(*a, *b);
	};
	for (std::size_t i = 0; i < j.stages.size(); i++) {
		const SymbolicExecutionGraph &g = pool[j.stages[i].graph];
		const Enhancement &e = *g.enhanced;
		EventSet committed = eventsOf(g, j.stages[i].committed);
		Relation edges = e.sw & (e.hb.transitiveReduction() - g.po);
		for (auto [x, y] : edges.pairs()) {
			if ((e.hb.successors(y) & committed).empty())
				continue;
			for (std::size_t k = i; k < j.stages.size(); k++)
				if (!hasSw(pool[j.stages[k].graph], g.keys[x], g.keys[y]))
					return false;
			if (!hasSw(t, g.keys[x], g.keys[y]))
				return false;
		}
	}
	return true;
}

/* ---------------------------------------------------------------- search */

namespace {

using Mask = std::uint64_t;
inline Mask bit(std::size_t i) { return 1ULL << i; }

/* A pool graph seen through the target's event indices. */
struct View {
	std::array<int, 64> fromT{};
	Mask contains = 0;
	std::array<Mask, 64> hb{}, so{}, rf{}, sw{};
	std::array<int, 64> rfSrc{};
	bool badOutside = false;
	Mask badReads = 0;
	struct Edge {
		int x, y;
		Mask hbSuccY;
	};
	std::vector<Edge> edges;
};

View makeView(const SymbolicExecutionGraph &t, const SymbolicExecutionGraph &g)
{
	View v;
	v.fromT.fill(-1);
	v.rfSrc.fill(-1);
	std::array<int, 64> toT;
	toT.fill(-1);
	for (std::size_t a = 0; a < t.size(); a++)
		if (auto b = g.find(t.keys[a])) {
			v.fromT[a] = static_cast<int>(*b);
			toT[*b] = static_cast<int>(a);
			v.contains |= bit(a);
		}
	const Enhancement &e = *g.enhanced;
	auto project = [&](const Relation &r, std::array<Mask, 64> &rows) {
		for (std::size_t a = 0; a < t.size(); a++) {
			if (v.fromT[a] < 0)
				continue;
			r.successors(static_cast<std::size_t>(v.fromT[a])).forEach([&](std::size_t b) {
				if (toT[b] >= 0)
					rows[a] |= bit(static_cast<std::size_t>(toT[b]));
			});
		}
	};
	project(e.hb, v.hb);
	project(e.so, v.so);
	project(g.rf, v.rf);
	project(e.sw, v.sw);
	g.readSet.forEach([&](std::size_t r) {
		auto w = g.rfSource(r);
		bool hbOk = w && e.hb.contains(*w, r);
		if (toT[r] >= 0) {
			if (w && toT[*w] >= 0)
				v.rfSrc[static_cast<std::size_t>(toT[r])] = toT[*w];
			if (!hbOk)
				v.badReads |= bit(static_cast<std::size_t>(toT[r]));
		} else if (!hbOk) {
			v.badOutside = true;
		}
	});
	Relation edges = e.sw & (e.hb.transitiveReduction() - g.po);
	for (auto [x, y] : edges.pairs()) {
		Mask succ = 0;
		e.hb.successors(y).forEach([&](std::size_t z) {
			if (toT[z] >= 0)
				succ |= bit(static_cast<std::size_t>(toT[z]));
		});
		v.edges.push_back({toT[x], toT[y], succ});
	}
	return v;
}

struct BudgetExceeded {};

class Search {
public:
	Search(const Pool &pool, std::size_t target, const Formula &phi, smt::Backend &smt, const SearchConfig &cfg)
		: pool_(pool), target_(target), t_(pool[target]), phi_(phi), smt_(smt), cfg_(cfg)
	{
		n_ = t_.size();
		full_ = EventSet::full(n_).bits();
		inits_ = t_.initSet.bits();
		reads_ = t_.readSet.bits();
		writes_ = (t_.writeSet - t_.initSet).bits();
		tsrc_.fill(-1);
		t_.readSet.forEach([&](std::size_t r) {
			if (auto w = t_.rfSource(r))
				tsrc_[r] = static_cast<int>(*w);
		});
		for (auto &g : pool_)
			views_.push_back(makeView(t_, g));
		base_ = encAssertion(t_, phi_);
		for (auto &a : encStage(t_, EventSet::full(n_), "T"))
			base_.push_back(std::move(a));
	}

	SearchResult run()
	{
		SearchResult res;
		std::size_t maxStages = cfg_.maxStages ? cfg_.maxStages
						       : static_cast<std::size_t>(std::popcount(full_ & ~inits_)) + 1;
		try {
			for (std::size_t limit = 1; limit <= maxStages; limit++) {
				cutoff_ = false;
				if (root(static_cast<int>(limit))) {
					res.status = SearchStatus::Found;
					res.justification = found_;
					res.model = model_;
					res.nodes = nodes_;
					return res;
				}
				if (!cutoff_)
					break;
			}
		} catch (const BudgetExceeded &) {
			res.status = SearchStatus::BudgetExhausted;
			res.nodes = nodes_;
			return res;
		}
		res.status = (cutoff_ || unknown_) ? SearchStatus::BudgetExhausted : SearchStatus::NotFound;
		res.nodes = nodes_;
		return res;
	}

private:
	using Constraints = std::vector<std::pair<std::size_t, Mask>>;
	using Obligations = std::vector<Mask>;
	struct Outcome {
		bool found = false;
		bool cutoff = false;
	};

	bool root(int limit)
	{
		for (std::size_t gi : graphOrder(target_)) {
			const View &v = views_[gi];
			if (v.badOutside || v.badReads || (inits_ & ~v.contains))
				continue;
			if (!cond23(v, inits_))
				continue;
			Obligations o(n_, 0);
			if (!addObligations(v, inits_, o))
				continue;
			path_.assign(1, {gi, inits_});
			Outcome r = dfs(inits_, {}, o, limit - 1);
			if (r.found)
				return true;
			if (r.cutoff)
				cutoff_ = true;
		}
		return false;
	}

	std::vector<std::size_t> graphOrder(std::size_t current) const
	{
		std::vector<std::size_t> order{current};
		if (current != target_)
			order.push_back(target_);
		for (std::size_t g = 0; g < pool_.size(); g++)
			if (g != current && g != target_)
				order.push_back(g);
		return order;
	}

	bool cond23(const View &v, Mask c) const
	{
		const View &tv = views_[target_];
		for (Mask m = c; m; m &= m - 1) {
			std::size_t a = static_cast<std::size_t>(std::countr_zero(m));
			if (((tv.hb[a] ^ v.hb[a]) & c) || ((tv.so[a] ^ v.so[a]) & c))
				return false;
		}
		return true;
	}

	bool cond5(const View &v, Mask c) const
	{
		const View &tv = views_[target_];
		for (Mask m = c; m; m &= m - 1) {
			std::size_t a = static_cast<std::size_t>(std::countr_zero(m));
			if ((tv.rf[a] ^ v.rf[a]) & c)
				return false;
		}
		return true;
	}

	bool cond6(const View &v, Mask c) const { return !v.badOutside && !(v.badReads & ~c); }

	bool cond7(const View &v, std::size_t r, Mask cprev) const
	{
		if (!(reads_ & bit(r)))
			return true;
		int wg = v.rfSrc[r], wt = tsrc_[r];
		return wg >= 0 && wt >= 0 && (cprev & bit(static_cast<std::size_t>(wg))) &&
		       (cprev & bit(static_cast<std::size_t>(wt)));
	}

	bool obligationsHold(const View &v, const Obligations &o) const
	{
		for (std::size_t x = 0; x < n_; x++)
			if (o[x] & ~v.sw[x])
				return false;
		return true;
	}

	bool addObligations(const View &v, Mask c, Obligations &o) const
	{
		const View &tv = views_[target_];
		for (auto &e : v.edges) {
			if (!(e.hbSuccY & c))
				continue;
			if (e.x < 0 || e.y < 0)
				return false;
			std::size_t x = static_cast<std::size_t>(e.x), y = static_cast<std::size_t>(e.y);
			if (!(tv.sw[x] & bit(y)))
				return false;
			o[x] |= bit(y);
		}
		return true;
	}

	static Constraints with(const Constraints &k, std::size_t g, Mask w)
	{
		Constraints out = k;
		if (!w)
			return out;
		for (auto &[gi, m] : out)
			if (gi == g) {
				m = w;
				return out;
			}
		out.emplace_back(g, w);
		std::sort(out.begin(), out.end());
		return out;
	}

	bool feasible(const Constraints &k)
	{
		auto it = feasible_.find(k);
		if (it != feasible_.end())
			return it->second;
		smt::Query q;
		q.assertions = base_;
		for (auto &[gi, w] : k) {
			const SymbolicExecutionGraph &g = pool_[gi];
			EventSet committed;
			for (Mask m = w; m; m &= m - 1)
				committed.insert(static_cast<std::size_t>(views_[gi].fromT[static_cast<std::size_t>(std::countr_zero(m))]));
			for (auto &a : encStage(g, committed, "P" + std::to_string(gi)))
				q.assertions.push_back(std::move(a));
		}
		smt::Status s = smt_.check(q, cfg_.smtTimeoutMs).status;
		if (s == smt::Status::Unknown)
			unknown_ = true;
		bool r = s != smt::Status::Unsat;
		feasible_.emplace(k, r);
		return r;
	}

	std::string stateKey(Mask c, const Constraints &k, const Obligations &o) const
	{
		std::string s(reinterpret_cast<const char *>(&c), sizeof c);
		for (auto &[g, w] : k) {
			s.append(reinterpret_cast<const char *>(&g), sizeof g);
			s.append(reinterpret_cast<const char *>(&w), sizeof w);
		}
		s += '|';
		for (Mask m : o)
			s.append(reinterpret_cast<const char *>(&m), sizeof m);
		return s;
	}

	bool complete()
	{
		Justification j;
		j.target = target_;
		for (auto &[g, c] : path_)
			j.stages.push_back({g, keysOf(t_, EventSet(c))});
		if (!checkCondition8(pool_, j))
			return false;
		smt::Result r = smt_.check(encJustification(pool_, j, phi_), cfg_.smtTimeoutMs);
		if (r.status == smt::Status::Unknown)
			unknown_ = true;
		if (r.status != smt::Status::Sat)
			return false;
		found_ = std::move(j);
		model_ = std::move(r.model);
		return true;
	}

	Outcome dfs(Mask c, const Constraints &k, const Obligations &o, int depthLeft)
	{
		if (c == full_)
			return {complete(), false};
		if (depthLeft <= 0)
			return {false, true};
		std::string key = stateKey(c, k, o);
		if (auto it = memo_.find(key); it != memo_.end() && it->second >= depthLeft)
			return {false, it->second != INT_MAX};
		if (++nodes_ > cfg_.nodeBudget)
			throw BudgetExceeded{};

		bool cutoff = false;
		std::size_t bound = cfg_.commitBound ? cfg_.commitBound : 64;
		for (std::size_t gi : graphOrder(path_.back().first)) {
			const View &v = views_[gi];
			if ((c & ~v.contains) || !obligationsHold(v, o) || !cond5(v, c) || !cond6(v, c))
				continue;
			Mask cw = c & writes_;
			std::vector<std::size_t> elig;
			for (Mask m = v.contains & full_ & ~c; m; m &= m - 1) {
				std::size_t e = static_cast<std::size_t>(std::countr_zero(m));
				if (!cond7(v, e, c) || !cond23(v, c | bit(e)))
					continue;
				if ((writes_ & bit(e)) && !feasible(with(k, gi, cw | bit(e))))
					continue;
				elig.push_back(e);
			}
			std::size_t maxSize = std::min(bound, elig.size());
			/* on the last stage everything left must be committed */
			std::size_t remaining = static_cast<std::size_t>(std::popcount(full_ & ~c));
			std::size_t minSize = depthLeft == 1 ? remaining : 1;
			if (depthLeft == 1 && !elig.empty() && remaining > 1)
				cutoff = true;
			if (depthLeft == 1 && elig.size() < remaining)
				continue;
			for (std::size_t size = minSize; size <= maxSize; size++) {
				std::vector<std::size_t> pick;
				Outcome r = choose(elig, 0, size, pick, c, k, o, gi, v, depthLeft);
				if (r.found)
					return r;
				cutoff |= r.cutoff;
			}
		}
		auto &slot = memo_[key];
		slot = cutoff ? std::max(slot, depthLeft) : INT_MAX;
		return {false, cutoff};
	}

	Outcome choose(const std::vector<std::size_t> &elig, std::size_t from, std::size_t size, std::vector<std::size_t> &pick,
		       Mask c, const Constraints &k, const Obligations &o, std::size_t gi, const View &v, int depthLeft)
	{
		if (pick.size() == size) {
			Mask x = 0;
			for (auto e : pick)
				x |= bit(e);
			Mask cn = c | x;
			if (size > 1 && !cond23(v, cn))
				return {};
			Constraints kn = with(k, gi, cn & writes_);
			if (kn != k && !feasible(kn))
				return {};
			Obligations on = o;
			if (!addObligations(v, cn, on))
				return {};
			path_.emplace_back(gi, cn);
			Outcome r = dfs(cn, kn, on, depthLeft - 1);
			path_.pop_back();
			return r;
		}
		Outcome acc;
		for (std::size_t i = from; i + (size - pick.size()) <= elig.size(); i++) {
			pick.push_back(elig[i]);
			Outcome r = choose(elig, i + 1, size, pick, c, k, o, gi, v, depthLeft);
			pick.pop_back();
			if (r.found)
				return r;
			acc.cutoff |= r.cutoff;
		}
		return acc;
	}

	const Pool &pool_;
	std::size_t target_;
	const SymbolicExecutionGraph &t_;
	const Formula &phi_;
	smt::Backend &smt_;
	SearchConfig cfg_;
	std::size_t n_ = 0;
	Mask full_ = 0, inits_ = 0, reads_ = 0, writes_ = 0;
	std::array<int, 64> tsrc_{};
	std::vector<View> views_;
	std::vector<Expr> base_;
	std::map<Constraints, bool> feasible_;
	std::unordered_map<std::string, int> memo_;
	std::vector<std::pair<std::size_t, Mask>> path_;
	std::size_t nodes_ = 0;
	bool cutoff_ = false, unknown_ = false;
	Justification found_;
	std::map<std::string, Value> model_;
};

} // namespace

SearchResult findJustification(const Pool &pool, std::size_t target, const Formula &phi, smt::Backend &smt,
			       const SearchConfig &cfg)
{
	return Search(pool, target, phi, smt, cfg).run();
}

} // namespace jmt
