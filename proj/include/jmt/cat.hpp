#pragma once

#include "jmt/error.hpp"
#include "jmt/graph.hpp"

#include <memory>
#include <string>
#include <vector>

namespace jmt {

struct CatExpr {
	enum class Kind {
		Name, Empty,
		Union, Inter, Diff, Seq, Cartesian,
		Inverse, Star, Plus, Opt, Complement, Bracket,
		Domain, Range,
	};

	Kind kind = Kind::Name;
	std::string name;
	std::vector<CatExpr> args;
	SourcePos pos;
};

struct CatStatement {
	enum class Kind { Let, With, Check, Show };
	enum class Check { Irreflexive, Acyclic, Empty };

	Kind kind = Kind::Let;
	std::string name;            /* Let / With binding, Check label */
	CatExpr expr;                /* Let body, Check argument */
	CatExpr set, order;          /* With: linearisations(set, order) */
	Check check = Check::Irreflexive;
	std::vector<CatExpr> shown;
	SourcePos pos;
};

struct CatModel {
	std::string title;
	std::vector<CatStatement> statements;

	std::size_t count(CatStatement::Kind k) const;
	std::size_t countChecks(CatStatement::Check c) const;
};

CatModel parseCat(const std::string &text);
CatModel parseCatFile(const std::string &path);

/* Strict total orders over s that contain r restricted to s, in lexicographic order. */
std::vector<Relation> linearisations(EventSet s, const Relation &r);

/*
 * Evaluates the model on g once per choice of the with-bound relations. Each
 * consistent choice yields a copy of g carrying so, sw and hb; identical
 * enhancements are reported once. An empty result means g is inconsistent.
 */
std::vector<SymbolicExecutionGraph> evaluateSem(const CatModel &model, const SymbolicExecutionGraph &g);

/* Names the evaluator provides without a definition. */
const std::vector<std::string> &catBuiltins();

} // namespace jmt
