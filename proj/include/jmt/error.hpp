#pragma once

#include <stdexcept>
#include <string>

namespace jmt {

class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/* Source position inside a parsed text, 1-based. */
struct SourcePos {
	int line = 0;
	int column = 0;
};

class ParseError : public Error {
public:
	ParseError(const std::string &what, SourcePos pos)
		: Error(format(what, pos)), pos_(pos) {}
	SourcePos pos() const { return pos_; }

private:
	static std::string format(const std::string &what, SourcePos pos)
	{
		return std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + what;
	}
	SourcePos pos_;
};

class LitmusSyntaxError : public ParseError { using ParseError::ParseError; };
class SsaError : public ParseError { using ParseError::ParseError; };
class SharedRegisterError : public ParseError { using ParseError::ParseError; };
class UnsupportedFeature : public ParseError { using ParseError::ParseError; };

class CatError : public ParseError { using ParseError::ParseError; };
class CatUndefinedName : public CatError { using CatError::CatError; };
class CatRecursiveDefinition : public CatError { using CatError::CatError; };

class ModelError : public Error { using Error::Error; };
class SolverError : public Error { using Error::Error; };
class HerdError : public Error { using Error::Error; };
class CompileError : public Error { using Error::Error; };

} // namespace jmt
