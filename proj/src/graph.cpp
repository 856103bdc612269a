#include "jmt/graph.hpp"

#include <sstream>

namespace jmt {

const char *toString(EventType t)
{
	switch (t) {
	case EventType::Read: return "R";
	case EventType::Write: return "W";
	case EventType::Rmw: return "RMW";
	case EventType::Fence: return "F";
	}
	return "?";
}

std::string toString(const EventKey &k)
{
	if (k.thread == 0)
		return "ini:" + k.what;
	return std::to_string(k.thread) + ":" + toString(k.type) + " " + k.what + "@" + std::to_string(k.idx);
}

bool similar(const Event &a, const Event &b)
{
	if (a.label.type != b.label.type)
		return false;
	if (a.label.isFence())
		return a.label.fm == b.label.fm;
	return a.label.loc == b.label.loc;
}

void SymbolicExecutionGraph::finalize()
{
	keys.assign(events.size(), {});
	readSet = writeSet = initSet = fenceSet = volatileSet = EventSet();
	for (std::size_t e = 0; e < events.size(); e++) {
		const Event &ev = events[e];
		EventKey &k = keys[e];
		k.thread = ev.thread;
		k.type = ev.label.type;
		k.what = ev.label.isFence() ? toString(ev.label.fm) : ev.label.loc;
		if (ev.isInit()) {
			k.idx = 0;
			initSet.insert(e);
		} else {
			unsigned n = 1;
			po.predecessors(e).forEach([&](std::size_t p) {
				if (similar(events[p], ev))
					n++;
			});
			k.idx = n;
		}
		if (ev.label.isRead())
			readSet.insert(e);
		if (ev.label.isWrite())
			writeSet.insert(e);
		if (ev.label.isFence())
			fenceSet.insert(e);
		if (ev.label.isVolatile())
			volatileSet.insert(e);
	}
}

std::optional<std::size_t> SymbolicExecutionGraph::find(const EventKey &k) const
{
	for (std::size_t e = 0; e < keys.size(); e++)
		if (keys[e] == k)
			return e;
	return std::nullopt;
}

std::optional<std::size_t> SymbolicExecutionGraph::rfSource(std::size_t r) const
{
	EventSet p = rf.predecessors(r);
	if (p.empty())
		return std::nullopt;
	return p.elements().front();
}

EventSet SymbolicExecutionGraph::locationSet(const Location &l) const
{
	EventSet s;
	for (std::size_t e = 0; e < events.size(); e++)
		if (!events[e].label.isFence() && events[e].label.loc == l)
			s.insert(e);
	return s;
}

Relation SymbolicExecutionGraph::sameLocation() const
{
	Relation r(events.size());
	for (std::size_t a = 0; a < events.size(); a++)
		for (std::size_t b = 0; b < events.size(); b++)
			if (!events[a].label.isFence() && !events[b].label.isFence() &&
			    events[a].label.loc == events[b].label.loc)
				r.insert(a, b);
	return r;
}

bool SymbolicExecutionGraph::wellBehaved() const
{
	const Relation &hb = enhanced.value().hb;
	for (auto [w, r] : rf.pairs())
		if (!hb.contains(w, r))
			return false;
	return true;
}

bool eventsEqual(std::size_t e1, const SymbolicExecutionGraph &g1, std::size_t e2, const SymbolicExecutionGraph &g2)
{
	return g1.keys[e1] == g2.keys[e2];
}

std::string labelString(const Event &e)
{
	const EventLabel &l = e.label;
	std::string t = e.isInit() ? "ini" : std::to_string(e.thread);
	switch (l.type) {
	case EventType::Read:
		return "R" + t + "^" + toString(*l.rm) + "(" + l.loc + ", " + toString(l.readExpr) + ")";
	case EventType::Write:
		if (e.isInit())
			return "W_ini(" + l.loc + ", " + toString(l.writeExpr) + ")";
		return "W" + t + "^" + toString(*l.wm) + "(" + l.loc + ", " + toString(l.writeExpr) + ")";
	case EventType::Rmw:
		return "RMW" + t + "^" + toString(*l.rm) + "," + toString(*l.wm) + "(" + l.loc + ", " +
		       toString(l.readExpr) + ", " + toString(l.writeExpr) + ")";
	case EventType::Fence:
		return "F" + t + "^" + toString(l.fm);
	}
	return "?";
}

std::string dumpText(const SymbolicExecutionGraph &g)
{
	std::ostringstream out;
	out << "events:\n";
	for (std::size_t e = 0; e < g.size(); e++)
		out << "  e" << e << "  " << labelString(g.events[e]) << "  [" << toString(g.keys[e]) << "]\n";
	auto rel = [&](const char *name, const Relation &r) {
		out << name << ":";
		for (auto [a, b] : r.pairs())
			out << " e" << a << "->e" << b;
		out << "\n";
	};
	rel("po", g.po.transitiveReduction());
	rel("rf", g.rf);
	if (g.enhanced) {
		rel("so", g.enhanced->so.transitiveReduction());
		rel("sw", g.enhanced->sw);
		rel("hb", g.enhanced->hb.transitiveReduction());
	}
	out << "gamma:";
	if (g.gamma.empty())
		out << " true";
	for (auto &c : g.gamma)
		out << "\n  " << toString(c);
	out << "\n";
	return out.str();
}

static std::string dotEscape(const std::string &s)
{
	std::string out;
	for (char c : s) {
		if (c == '"' || c == '\\')
			out += '\\';
		out += c;
	}
	return out;
}

std::string dumpDot(const SymbolicExecutionGraph &g, const std::string &name)
{
	std::ostringstream out;
	out << "digraph \"" << dotEscape(name) << "\" {\n";
	out << "  node [shape=box];\n";
	for (std::size_t e = 0; e < g.size(); e++)
		out << "  e" << e << " [label=\"" << dotEscape(labelString(g.events[e])) << "\"];\n";
	auto edges = [&](const char *label, const char *style, const Relation &r) {
		for (auto [a, b] : r.pairs())
			out << "  e" << a << " -> e" << b << " [label=\"" << label << "\"" << style << "];\n";
	};
	edges("po", "", g.po.transitiveReduction());
	edges("rf", ", color=red", g.rf);
	if (g.enhanced) {
		edges("sw", ", color=blue", g.enhanced->sw);
		edges("so", ", color=gray, style=dashed", g.enhanced->so.transitiveReduction());
	}
	std::string gamma;
	for (auto &c : g.gamma)
		gamma += dotEscape(toString(c)) + "\\l";
	out << "  gamma [shape=note, label=\"" << (gamma.empty() ? "true" : gamma) << "\"];\n";
	out << "}\n";
	return out.str();
}

} // namespace jmt
