#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

enum class Errc {
    invalid_argument,
    invalid_query,
    invalid_increment,
    flavor_key,
    clock_skew,
    configuration,
    no_preference,
    parse,
    io,
    ordering,
    empty_judgments,
    undefined_normalization,
    undefined_similarity,
    undefined_correlation,
    no_data,
    invalid_cutoff,
};

const char* to_string(Errc code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

// Parse failures carry the 1-based line number of the offending input.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& message)
        : Error(Errc::parse, "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

}  // namespace swarm
