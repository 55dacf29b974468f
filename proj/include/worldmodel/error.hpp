#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace wm {

// Every failure the toolkit reports carries a short machine-readable code
// ("white-peak", "parse", ...) and a human detail string. The CLI prints
// them as `error: <code>: <detail>`.
class Error : public std::runtime_error
{
public:
    Error(std::string code, std::string detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)), detail_(std::move(detail))
    {
    }

    [[nodiscard]] const std::string& code() const noexcept { return code_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    std::string code_;
    std::string detail_;
};

} // namespace wm
