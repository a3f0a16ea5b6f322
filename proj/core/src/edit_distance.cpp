// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/edit_distance.hpp"

#include <algorithm>
#include <numeric>

namespace driftdiff::datadiff {

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    while (i < s.size()) {
        const unsigned char c = byte(i);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        }
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            if ((byte(i + k) & 0xC0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (byte(i + k) & 0x3F);
            }
        }
        if (ok && len > 1) {
            static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
            ok = cp >= kMin[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
        }
        if (!ok) {
            out.push_back(0xDC00 + c);
            ++i;
        } else {
            out.push_back(cp);
            i += len;
        }
    }
    return out;
}

std::string encode_utf8(char32_t c) {
    std::string out;
    if (c >= 0xDC80 && c <= 0xDCFF) {
        out.push_back(static_cast<char>(c - 0xDC00));
    } else if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t c : s) out += encode_utf8(c);
    return out;
}

std::string_view to_string(EditKind kind) {
    switch (kind) {
        case EditKind::Insert: return "ins";
        case EditKind::Delete: return "del";
        case EditKind::Substitute: return "sub";
    }
    return "sub";
}

EditScript levenshtein(std::u32string_view a, std::u32string_view b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t w = m + 1;
    std::vector<std::uint32_t> d((n + 1) * w);
    for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<std::uint32_t>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        d[i * w] = static_cast<std::uint32_t>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const std::uint32_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i * w + j] = std::min({d[(i - 1) * w + j - 1] + cost, d[(i - 1) * w + j] + 1,
                                     d[i * w + j - 1] + 1});
        }
    }

    EditScript script;
    script.distance = d[n * w + m];
    std::size_t i = n;
    std::size_t j = m;
    while (i > 0 || j > 0) {
        const std::uint32_t here = d[i * w + j];
        if (i > 0 && j > 0) {
            const std::uint32_t diag = d[(i - 1) * w + j - 1];
            if (a[i - 1] == b[j - 1] && here == diag) {
                --i;
                --j;
                continue;
            }
            if (here == diag + 1) {
                script.ops.push_back({EditKind::Substitute, i - 1, b[j - 1]});
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && here == d[(i - 1) * w + j] + 1) {
            script.ops.push_back({EditKind::Delete, i - 1, a[i - 1]});
            --i;
            continue;
        }
        script.ops.push_back({EditKind::Insert, j - 1, b[j - 1]});
        --j;
    }
    std::reverse(script.ops.begin(), script.ops.end());
    return script;
}

EditScript levenshtein(std::string_view a, std::string_view b) {
    return levenshtein(decode_utf8(a), decode_utf8(b));
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            cur[j] = std::min({prev[j - 1] + cost, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

} // namespace driftdiff::datadiff
