#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace gqa {

// Calendar date with day precision, ISO-8601 ordering. Input with coarser
// precision ("1994" or "1994-06") is normalized by the parser to the first
// day of the period.
struct DateValue {
    int32_t year = 0;
    uint8_t month = 1;
    uint8_t day = 1;

    auto operator<=>(const DateValue&) const = default;

    std::string to_string() const;

    // Accepts "YYYY-MM-DD", "YYYY-MM" and "YYYY"; throws ParseError otherwise.
    static DateValue parse(const std::string& text);
};

}  // namespace gqa
