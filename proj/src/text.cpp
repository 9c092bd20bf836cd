#include "failtax/text.hpp"

#include <cctype>
#include <cstdio>

namespace failtax {

std::string_view trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
        --end;
    }
    return s.substr(begin, end - begin);
}

std::string fold_ascii(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

bool folded_equal(std::string_view a, std::string_view b) {
    return fold_ascii(trim(a)) == fold_ascii(trim(b));
}

std::string slugify(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_hyphen = false;
    for (char raw : trim(s)) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            pending_hyphen = true;
            continue;
        }
        char lower = static_cast<char>(std::tolower(c));
        bool safe = (lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9') ||
                    lower == '.' || lower == '_' || lower == '-';
        if (pending_hyphen && !out.empty()) {
            out.push_back('-');
        }
        pending_hyphen = false;
        out.push_back(safe ? lower : '-');
    }
    return out;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

}  // namespace failtax
