#pragma once

#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vtcap/error.hpp"
#include "vtcap/rng.hpp"
#include "vtcap/unicode.hpp"

namespace vtcap::corpus {

enum class DomainKind { Novels, Laws, Economics, Medicine, Newspapers, Letters, Other };

struct Domain {
    DomainKind kind = DomainKind::Other;
    std::string other_name; // only meaningful for DomainKind::Other

    static Domain parse(std::string_view s) {
        if (s == "Novels") return {DomainKind::Novels, {}};
        if (s == "Laws") return {DomainKind::Laws, {}};
        if (s == "Economics") return {DomainKind::Economics, {}};
        if (s == "Medicine") return {DomainKind::Medicine, {}};
        if (s == "Newspapers") return {DomainKind::Newspapers, {}};
        if (s == "Letters") return {DomainKind::Letters, {}};
        return {DomainKind::Other, std::string(s)};
    }
    std::string str() const {
        switch (kind) {
            case DomainKind::Novels: return "Novels";
            case DomainKind::Laws: return "Laws";
            case DomainKind::Economics: return "Economics";
            case DomainKind::Medicine: return "Medicine";
            case DomainKind::Newspapers: return "Newspapers";
            case DomainKind::Letters: return "Letters";
            case DomainKind::Other: return other_name;
        }
        return other_name;
    }
    bool operator==(const Domain& o) const {
        return kind == o.kind && (kind != DomainKind::Other || other_name == o.other_name);
    }
};

/// One sanitized text block. char_count is in Unicode scalar values and
/// always equals the decoded length of text.
struct TextBlock {
    std::string id;
    Domain domain;
    std::string text;
    std::size_t char_count = 0;
};

/// Randomized concatenation of blocks; the ground-truth payload for
/// rendering. Regenerating with the same (blocks, target, seed) yields
/// byte-identical text.
struct ShuffledDocument {
    std::vector<std::string> block_ids;
    std::string text;
    std::size_t char_count = 0; // N_char of the joined text, joiners included
    std::uint64_t seed = 0;
};

namespace detail {

inline bool is_space_like(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\f' || c == U'\v';
}

} // namespace detail

/// Normalize raw text. Tabs and vertical whitespace become spaces, CR/CRLF
/// become newlines, leading/trailing whitespace is stripped. A whitespace
/// run that held two or more spaces (or any newline) is a paragraph
/// delimiter and collapses to a single '\n'; a lone space stays a space.
/// The output alphabet therefore contains only single ' ' and single '\n'
/// separators, which makes the function idempotent.
inline std::string sanitize(std::string_view raw) {
    std::u32string in = decode_utf8(raw);
    std::u32string norm;
    norm.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        char32_t c = in[i];
        if (c == U'\r') {
            if (i + 1 < in.size() && in[i + 1] == U'\n') ++i;
            norm.push_back(U'\n');
        } else if (detail::is_space_like(c)) {
            norm.push_back(U' ');
        } else {
            norm.push_back(c);
        }
    }

    std::u32string out;
    out.reserve(norm.size());
    std::size_t i = 0;
    while (i < norm.size()) {
        char32_t c = norm[i];
        if (c != U' ' && c != U'\n') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t j = i;
        std::size_t spaces = 0;
        bool has_newline = false;
        while (j < norm.size() && (norm[j] == U' ' || norm[j] == U'\n')) {
            if (norm[j] == U' ') ++spaces;
            else has_newline = true;
            ++j;
        }
        const bool leading = out.empty();
        const bool trailing = j == norm.size();
        if (!leading && !trailing)
            out.push_back((has_newline || spaces >= 2) ? U'\n' : U' ');
        i = j;
    }
    return encode_utf8(out);
}

namespace detail {

/// Balanced partition of a scalar string into n parts whose lengths differ
/// by at most one; concatenating the parts reproduces the input exactly.
inline std::vector<std::u32string> partition_even(const std::u32string& s, std::size_t n) {
    std::vector<std::u32string> parts;
    parts.reserve(n);
    const std::size_t len = s.size();
    const std::size_t base = n ? len / n : 0;
    const std::size_t rem = n ? len % n : 0;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t take = base + (k < rem ? 1 : 0);
        parts.push_back(s.substr(pos, take));
        pos += take;
    }
    return parts;
}

/// Non-empty segments between marker occurrences. A missing marker yields
/// the whole text as a single split.
inline std::vector<std::u32string> split_at_marker(const std::u32string& text,
                                                   const std::u32string& marker) {
    std::vector<std::u32string> splits;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t hit = text.find(marker, pos);
        std::u32string piece = (hit == std::u32string::npos)
                                   ? text.substr(pos)
                                   : text.substr(pos, hit - pos);
        if (!piece.empty()) splits.push_back(std::move(piece));
        if (hit == std::u32string::npos) break;
        pos = hit + marker.size();
    }
    return splits;
}

inline TextBlock make_block(std::u32string text, const Domain& domain,
                            const std::string& id_prefix, std::size_t index) {
    TextBlock b;
    b.id = id_prefix + std::to_string(index);
    b.domain = domain;
    b.char_count = text.size();
    b.text = encode_utf8(text);
    return b;
}

} // namespace detail

/// Split sanitized text at each marker occurrence, then divide every split
/// into blocks_per_unit near-equal blocks (scalar-length difference <= 1).
inline std::vector<TextBlock> segment(std::string_view text, std::string_view marker,
                                      std::size_t blocks_per_unit,
                                      const Domain& domain = {},
                                      const std::string& id_prefix = "blk-") {
    if (marker.empty()) throw ConfigError("segment: marker must be non-empty");
    if (blocks_per_unit == 0) throw ConfigError("segment: blocks_per_unit must be positive");
    if (text.empty()) return {};
    const std::u32string u = decode_utf8(text);
    const std::u32string m = decode_utf8(marker);
    std::vector<TextBlock> blocks;
    std::size_t idx = 0;
    for (auto& split : detail::split_at_marker(u, m))
        for (auto& part : detail::partition_even(split, blocks_per_unit))
            blocks.push_back(detail::make_block(std::move(part), domain, id_prefix, idx++));
    return blocks;
}

/// Hierarchical segmentation: the first split's length is the standard
/// unit; a split of length L contributes ceil(L / L_std) sub-units, each
/// cut into pages_per_unit pages of blocks_per_page blocks.
inline std::vector<TextBlock> segment_hierarchical(std::string_view text,
                                                   std::string_view marker,
                                                   std::size_t pages_per_unit,
                                                   std::size_t blocks_per_page,
                                                   const Domain& domain = {},
                                                   const std::string& id_prefix = "blk-") {
    if (marker.empty()) throw ConfigError("segment_hierarchical: marker must be non-empty");
    if (pages_per_unit == 0 || blocks_per_page == 0)
        throw ConfigError("segment_hierarchical: pages_per_unit and blocks_per_page must be positive");
    const std::u32string u = decode_utf8(text);
    const std::u32string m = decode_utf8(marker);
    auto splits = detail::split_at_marker(u, m);
    if (splits.empty() || splits.front().empty())
        throw ConfigError("segment_hierarchical: first split is empty");
    const std::size_t l_std = splits.front().size();

    std::vector<TextBlock> blocks;
    std::size_t idx = 0;
    for (auto& split : splits) {
        const std::size_t units = (split.size() + l_std - 1) / l_std;
        for (auto& unit : detail::partition_even(split, units))
            for (auto& page : detail::partition_even(unit, pages_per_unit))
                for (auto& part : detail::partition_even(page, blocks_per_page))
                    blocks.push_back(detail::make_block(std::move(part), domain, id_prefix, idx++));
    }
    return blocks;
}

/// Draw blocks uniformly at random without replacement (refilling the pool
/// once exhausted) until the drawn blocks' combined character count reaches
/// target_chars, then join them with single spaces. Deterministic under
/// seed. The stop rule counts block characters only; the joiners add
/// (n_blocks - 1) to the final char_count.
inline ShuffledDocument shuffle_sample(const std::vector<TextBlock>& blocks,
                                       std::size_t target_chars, std::uint64_t seed) {
    if (blocks.empty()) throw DataError("shuffle_sample: empty block list");
    if (target_chars == 0) throw ConfigError("shuffle_sample: target_chars must be positive");

    std::vector<std::size_t> nonempty;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].char_count > 0) nonempty.push_back(i);
    if (nonempty.empty()) throw DataError("shuffle_sample: all blocks are empty");

    Rng rng(seed);
    std::vector<std::size_t> pool;
    std::vector<std::size_t> drawn;
    std::size_t cum = 0;
    while (cum < target_chars) {
        if (pool.empty()) pool = nonempty;
        std::size_t j = static_cast<std::size_t>(rng.below(pool.size()));
        std::size_t pick = pool[j];
        pool[j] = pool.back();
        pool.pop_back();
        drawn.push_back(pick);
        cum += blocks[pick].char_count;
    }

    ShuffledDocument doc;
    doc.seed = seed;
    std::string text;
    for (std::size_t k = 0; k < drawn.size(); ++k) {
        const TextBlock& b = blocks[drawn[k]];
        if (k > 0) text.push_back(' ');
        text += b.text;
        doc.block_ids.push_back(b.id);
    }
    doc.char_count = cum + (drawn.size() - 1);
    doc.text = std::move(text);
    return doc;
}

// ---------------------------------------------------------------------------
// Corpus manifest and block cache

enum class SegmentationMode { Flat, Hierarchical };

struct ManifestEntry {
    std::string path;
    Domain domain;
    std::string marker;
    SegmentationMode mode = SegmentationMode::Flat;
    std::size_t blocks_per_unit = 4;
    std::size_t pages_per_unit = 6;
    std::size_t blocks_per_page = 4;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
};

inline Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest parse error in " + path + ": " + e.what());
    }
    Manifest m;
    if (!j.contains("sources") || !j["sources"].is_array())
        throw DataError("manifest missing 'sources' array: " + path);
    for (const auto& s : j["sources"]) {
        ManifestEntry e;
        e.path = s.at("path").get<std::string>();
        e.domain = Domain::parse(s.value("domain", "Other"));
        e.marker = s.value("marker", "CHAPTER");
        const std::string mode = s.value("mode", "flat");
        if (mode == "flat") e.mode = SegmentationMode::Flat;
        else if (mode == "hierarchical") e.mode = SegmentationMode::Hierarchical;
        else throw DataError("manifest: unknown segmentation mode '" + mode + "'");
        e.blocks_per_unit = s.value("blocks_per_unit", 4u);
        e.pages_per_unit = s.value("pages_per_unit", 6u);
        e.blocks_per_page = s.value("blocks_per_page", 4u);
        m.entries.push_back(std::move(e));
    }
    return m;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open text file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Sanitize and segment every manifest source. Paths are resolved relative
/// to base_dir when not absolute.
inline std::vector<TextBlock> build_blocks(const Manifest& m, const std::string& base_dir = "") {
    std::vector<TextBlock> all;
    std::size_t src = 0;
    for (const auto& e : m.entries) {
        std::string path = e.path;
        if (!base_dir.empty() && !path.empty() && path.front() != '/')
            path = base_dir + "/" + path;
        const std::string clean = sanitize(read_text_file(path));
        const std::string prefix = "src" + std::to_string(src++) + "-blk-";
        std::vector<TextBlock> blocks =
            e.mode == SegmentationMode::Flat
                ? segment(clean, e.marker, e.blocks_per_unit, e.domain, prefix)
                : segment_hierarchical(clean, e.marker, e.pages_per_unit, e.blocks_per_page,
                                       e.domain, prefix);
        all.insert(all.end(), std::make_move_iterator(blocks.begin()),
                   std::make_move_iterator(blocks.end()));
    }
    return all;
}

inline void save_blocks(const std::vector<TextBlock>& blocks, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write block cache: " + path);
    for (const auto& b : blocks) {
        nlohmann::json j{{"id", b.id},
                         {"domain", b.domain.str()},
                         {"char_count", b.char_count},
                         {"text", b.text}};
        out << j.dump() << '\n';
    }
}

inline std::vector<TextBlock> load_blocks(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open block cache: " + path);
    std::vector<TextBlock> blocks;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("block cache parse error at " + path + ":" +
                            std::to_string(lineno) + ": " + e.what());
        }
        TextBlock b;
        b.id = j.at("id").get<std::string>();
        b.domain = Domain::parse(j.at("domain").get<std::string>());
        b.text = j.at("text").get<std::string>();
        b.char_count = j.at("char_count").get<std::size_t>();
        if (b.char_count != scalar_count(b.text))
            throw DataError("block cache: char_count mismatch for id " + b.id);
        blocks.push_back(std::move(b));
    }
    return blocks;
}

} // namespace vtcap::corpus
