#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "vtcap/error.hpp"

namespace vtcap {

/// Decode strict UTF-8 into Unicode scalar values. Overlong forms,
/// surrogates, out-of-range code points and truncated sequences are
/// rejected with the byte offset of the offending sequence.
inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t start = i;
        char32_t cp = 0;
        std::size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            throw DecodeError("invalid UTF-8 lead byte", start);
        }
        if (start + len > s.size())
            throw DecodeError("truncated UTF-8 sequence", start);
        for (std::size_t k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[start + k]);
            if ((b & 0xC0) != 0x80)
                throw DecodeError("invalid UTF-8 continuation byte", start);
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < kMin[len])
            throw DecodeError("overlong UTF-8 encoding", start);
        if (cp >= 0xD800 && cp <= 0xDFFF)
            throw DecodeError("UTF-8 encoded surrogate", start);
        if (cp > 0x10FFFF)
            throw DecodeError("code point out of range", start);
        out.push_back(cp);
        i = start + len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode_utf8(const std::u32string& s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) append_utf8(out, cp);
    return out;
}

/// Character count in Unicode scalar values (the unit every text-length
/// figure in this library is expressed in).
inline std::size_t scalar_count(std::string_view s) {
    return decode_utf8(s).size();
}

} // namespace vtcap
