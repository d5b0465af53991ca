#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vtcap/unicode.hpp"

namespace vtcap::edist {

/// Raw and normalized Levenshtein distance for one (ground truth,
/// prediction) pair. normalized is raw / max(len_gt, len_pred) under the
/// default convention and 0 when both strings are empty.
struct EditDistanceResult {
    std::size_t raw = 0;
    double normalized = 0.0;
    std::size_t len_gt = 0;
    std::size_t len_pred = 0;
};

/// Normalization denominator. MaxLength bounds D in [0,1] and penalizes
/// truncation and over-generation symmetrically; GroundTruth divides by
/// len_gt only and may exceed 1 for over-long predictions.
enum class EdNorm { MaxLength, GroundTruth };

namespace detail {

/// Plain O(nm) dynamic programming over Unicode scalars; two rows.
inline std::size_t lev_dp(const std::u32string& a, const std::u32string& b) {
    const std::size_t m = a.size(), n = b.size();
    if (m == 0) return n;
    if (n == 0) return m;
    std::vector<std::size_t> prev(n + 1), cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= m; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= n; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

/// Myers bit-parallel edit distance, block version (Hyyro's formulation).
/// Pattern rows map to bits, LSB = first row of the block; horizontal
/// +1/-1 deltas carry across blocks through hin/hout. Exact, not an
/// approximation: equality with lev_dp is part of the test contract.
inline std::size_t lev_myers(const std::u32string& pattern, const std::u32string& text) {
    const std::size_t m = pattern.size(), n = text.size();
    if (m == 0) return n;
    if (n == 0) return m;

    const std::size_t nblocks = (m + 63) / 64;
    const unsigned last_bits = static_cast<unsigned>(m - 64 * (nblocks - 1));
    const std::uint64_t last_top = 1ULL << (last_bits - 1);

    std::unordered_map<char32_t, std::vector<std::uint64_t>> peq;
    peq.reserve(128);
    for (std::size_t i = 0; i < m; ++i) {
        auto& v = peq[pattern[i]];
        if (v.empty()) v.assign(nblocks, 0);
        v[i / 64] |= 1ULL << (i % 64);
    }
    const std::vector<std::uint64_t> zeros(nblocks, 0);

    std::vector<std::uint64_t> vp(nblocks, ~0ULL), vn(nblocks, 0);
    std::size_t score = m;

    for (std::size_t j = 0; j < n; ++j) {
        auto it = peq.find(text[j]);
        const std::vector<std::uint64_t>& eqv = it != peq.end() ? it->second : zeros;
        int hin = 1; // top boundary row of the distance matrix grows by one per column
        for (std::size_t b = 0; b < nblocks; ++b) {
            std::uint64_t eq = eqv[b];
            const std::uint64_t xv = eq | vn[b];
            if (hin < 0) eq |= 1ULL;
            const std::uint64_t xh = (((eq & vp[b]) + vp[b]) ^ vp[b]) | eq;
            std::uint64_t ph = vn[b] | ~(xh | vp[b]);
            std::uint64_t mh = vp[b] & xh;
            const std::uint64_t top = (b + 1 == nblocks) ? last_top : (1ULL << 63);
            int hout = 0;
            if (ph & top) hout = 1;
            else if (mh & top) hout = -1;
            ph <<= 1;
            mh <<= 1;
            if (hin > 0) ph |= 1ULL;
            if (hin < 0) mh |= 1ULL;
            vp[b] = mh | ~(xv | ph);
            vn[b] = ph & xv;
            hin = hout;
        }
        score = static_cast<std::size_t>(static_cast<long long>(score) + hin);
    }
    return score;
}

} // namespace detail

/// Exact minimal single-character edit operation count between two UTF-8
/// strings, measured in Unicode scalar values. Symmetric in (a, b).
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::u32string ua = decode_utf8(a);
    std::u32string ub = decode_utf8(b);
    // the shorter string is the bit-vector pattern
    if (ua.size() > ub.size()) ua.swap(ub);
    return detail::lev_myers(ua, ub);
}

/// Plain DP path; same contract as levenshtein(), kept as the slow exact
/// reference inside the library.
inline std::size_t levenshtein_dp(std::string_view a, std::string_view b) {
    return detail::lev_dp(decode_utf8(a), decode_utf8(b));
}

inline EditDistanceResult normalized_ed(std::string_view gt, std::string_view pred,
                                        EdNorm norm = EdNorm::MaxLength) {
    std::u32string ug = decode_utf8(gt);
    std::u32string up = decode_utf8(pred);
    EditDistanceResult r;
    r.len_gt = ug.size();
    r.len_pred = up.size();
    if (ug.size() <= up.size()) r.raw = detail::lev_myers(ug, up);
    else r.raw = detail::lev_myers(up, ug);
    if (norm == EdNorm::MaxLength) {
        const std::size_t den = std::max(r.len_gt, r.len_pred);
        r.normalized = den == 0 ? 0.0 : static_cast<double>(r.raw) / static_cast<double>(den);
    } else {
        r.normalized = r.len_gt == 0 ? (r.len_pred == 0 ? 0.0 : 1.0)
                                     : static_cast<double>(r.raw) / static_cast<double>(r.len_gt);
    }
    return r;
}

/// Element-wise normalized_ed over (gt, pred) pairs; order preserved.
inline std::vector<EditDistanceResult> batch_ed(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    EdNorm norm = EdNorm::MaxLength) {
    std::vector<EditDistanceResult> out;
    out.reserve(pairs.size());
    for (const auto& [gt, pred] : pairs) out.push_back(normalized_ed(gt, pred, norm));
    return out;
}

} // namespace vtcap::edist
