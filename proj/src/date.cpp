#include "gqa/date.hpp"

#include <cstdio>
#include <cstdlib>

#include "gqa/error.hpp"

namespace gqa {

std::string DateValue::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
    return buf;
}

namespace {

bool parse_int(const std::string& s, size_t from, size_t len, int& out) {
    if (from + len > s.size()) return false;
    int v = 0;
    for (size_t i = from; i < from + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

DateValue DateValue::parse(const std::string& text) {
    int y = 0, m = 1, d = 1;
    bool ok = false;
    if (text.size() == 4) {
        ok = parse_int(text, 0, 4, y);
    } else if (text.size() == 7 && text[4] == '-') {
        ok = parse_int(text, 0, 4, y) && parse_int(text, 5, 2, m);
    } else if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        ok = parse_int(text, 0, 4, y) && parse_int(text, 5, 2, m) && parse_int(text, 8, 2, d);
    }
    static constexpr int month_days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (ok && m >= 1 && m <= 12) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        const int in_month = month_days[m - 1] + (m == 2 && leap ? 1 : 0);
        ok = d >= 1 && d <= in_month;
    } else {
        ok = false;
    }
    if (!ok) throw Error("invalid date '" + text + "' (expected YYYY[-MM[-DD]])");
    DateValue v;
    v.year = y;
    v.month = static_cast<uint8_t>(m);
    v.day = static_cast<uint8_t>(d);
    return v;
}

}  // namespace gqa
