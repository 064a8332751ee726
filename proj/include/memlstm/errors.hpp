#pragma once

#include <stdexcept>
#include <string>

namespace memlstm {

// Error with a stable machine-parsable category ("ParseFailure", "OutOfRange", ...).
// what() is "<category>: <detail>"; the CLI maps any SimError to a nonzero exit
// with that single line on stderr.
class SimError : public std::runtime_error {
public:
    SimError(std::string category, const std::string& detail)
        : std::runtime_error(category + ": " + detail), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

} // namespace memlstm
