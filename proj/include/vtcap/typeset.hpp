#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "vtcap/corpus.hpp"
#include "vtcap/error.hpp"
#include "vtcap/font.hpp"
#include "vtcap/image.hpp"
#include "vtcap/unicode.hpp"

namespace vtcap::typeset {

/// Fixed-rectangle glyphs with exact integer metrics; the bit-exact mode
/// used wherever tests must not depend on a font rasterizer.
struct SyntheticMonospace {
    int w_f = 0;
    int h_f = 0;
};

/// Real glyph outlines and proportional advances from a TrueType file.
struct MeasuredFont {
    std::string path;
};

using FontMode = std::variant<SyntheticMonospace, MeasuredFont>;

struct LayoutSpec {
    int font_size = 0;    // px; em size in MeasuredFont mode
    int line_spacing = 0; // l_s, px
    int char_spacing = 0; // c_s, px, may be negative
    FontMode mode = SyntheticMonospace{};

    bool synthetic() const { return std::holds_alternative<SyntheticMonospace>(mode); }
    int glyph_height() const {
        return synthetic() ? std::get<SyntheticMonospace>(mode).h_f : font_size;
    }
    int line_height() const { return glyph_height() + line_spacing; }

    void validate() const {
        if (font_size <= 0) throw ConfigError("layout: font_size must be positive");
        if (glyph_height() + line_spacing <= 0)
            throw ConfigError("layout: glyph height plus line spacing must be positive");
        if (synthetic()) {
            const auto& m = std::get<SyntheticMonospace>(mode);
            if (m.w_f <= 0 || m.h_f <= 0)
                throw ConfigError("layout: monospace cell must be positive");
            if (m.w_f + char_spacing <= 0)
                throw ConfigError("layout: w_f plus char spacing must be positive");
        } else if (std::get<MeasuredFont>(mode).path.empty()) {
            throw ConfigError("layout: font file path missing");
        }
    }
};

/// Solved page geometry. aspect_ratio_k is width/height; the layout loop
/// itself works on AR = height/width as in the adjustment rule.
struct LayoutGeometry {
    double wrap_width = 0;    // wrapping limit W in px
    int image_width = 0;      // tight maximal line extent
    int image_height = 0;     // line_count * line height
    double aspect_ratio_k = 0;
    double n_line = 0;        // mean characters per line
    int line_count = 0;
    double w_f_effective = 0; // mean glyph advance, char spacing excluded
    bool best_effort = false;
};

struct RenderedSample {
    img::Image image;
    std::string ground_truth;
    std::size_t n_char = 0;
    LayoutGeometry geometry;
    LayoutSpec layout;
    std::uint64_t seed = 0;
};

namespace detail {

/// Per-character advance source for both font modes.
struct Metrics {
    bool synthetic = true;
    int w_f = 0;
    int h_f = 0;
    int font_size = 0;
    std::shared_ptr<const font::TrueTypeFont> ttf;

    double advance(char32_t cp) const {
        return synthetic ? static_cast<double>(w_f) : ttf->advance_em(cp) * font_size;
    }
};

inline Metrics resolve_metrics(const LayoutSpec& spec) {
    Metrics m;
    m.font_size = spec.font_size;
    if (spec.synthetic()) {
        const auto& s = std::get<SyntheticMonospace>(spec.mode);
        m.w_f = s.w_f;
        m.h_f = s.h_f;
    } else {
        m.synthetic = false;
        m.ttf = font::load_font_shared(std::get<MeasuredFont>(spec.mode).path);
    }
    return m;
}

struct PlacedGlyph {
    char32_t cp;
    double x;
};

struct Line {
    std::vector<PlacedGlyph> glyphs; // spaces excluded (no ink)
    double extent = 0;               // cursor after the last advance
    std::size_t char_count = 0;      // placed + consumed chars, '\n' excluded
};

/// Greedy word wrap. Words break at spaces; a word wider than the wrap
/// limit is hard-broken at the width limit. A space that would overflow
/// the line is consumed at the break (counted, no advance). Paragraph
/// markers '\n' force a line break and are not counted on any line.
inline std::vector<Line> wrap_lines(const std::u32string& text, const Metrics& met,
                                    double c_s, double wrap_width) {
    std::vector<Line> lines(1);
    auto line = [&]() -> Line& { return lines.back(); };
    auto break_line = [&]() { lines.emplace_back(); };

    auto place = [&](char32_t cp) {
        const double adv = met.advance(cp) + c_s;
        if (adv <= 0)
            throw ConfigError("layout: nonpositive advance for code point " +
                              std::to_string(static_cast<std::uint32_t>(cp)));
        if (cp != U' ') line().glyphs.push_back({cp, line().extent});
        line().extent += adv;
        line().char_count += 1;
    };

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char32_t c = text[i];
        if (c == U'\n') {
            break_line();
            ++i;
            continue;
        }
        if (c == U' ') {
            const double adv = met.advance(c) + c_s;
            if (line().extent + adv > wrap_width && line().extent > 0) {
                line().char_count += 1; // consumed at the break
                break_line();
            } else {
                place(c);
            }
            ++i;
            continue;
        }
        // measure the word starting here
        std::size_t j = i;
        double word_adv = 0;
        while (j < n && text[j] != U' ' && text[j] != U'\n') {
            word_adv += met.advance(text[j]) + c_s;
            ++j;
        }
        if (line().extent > 0 && line().extent + word_adv > wrap_width && word_adv <= wrap_width)
            break_line();
        for (std::size_t k = i; k < j; ++k) {
            const double adv = met.advance(text[k]) + c_s;
            if (line().extent > 0 && line().extent + adv > wrap_width) break_line();
            place(text[k]);
        }
        i = j;
    }
    return lines;
}

inline double max_extent(const std::vector<Line>& lines) {
    double m = 0;
    for (const auto& l : lines) m = std::max(m, l.extent);
    return m;
}

inline std::size_t sum_chars(const std::vector<Line>& lines) {
    std::size_t s = 0;
    for (const auto& l : lines) s += l.char_count;
    return s;
}

} // namespace detail

/// Mean horizontal glyph advance over reference_text (paragraph markers
/// skipped). SyntheticMonospace returns the configured w_f exactly.
inline double measure_advance(const LayoutSpec& spec, std::string_view reference_text) {
    spec.validate();
    if (reference_text.empty()) throw ConfigError("measure_advance: reference text is empty");
    const detail::Metrics met = detail::resolve_metrics(spec);
    const std::u32string u = decode_utf8(reference_text);
    double sum = 0;
    std::size_t count = 0;
    for (char32_t c : u) {
        if (c == U'\n') continue;
        sum += met.advance(c);
        ++count;
    }
    if (count == 0) throw ConfigError("measure_advance: reference text has no glyphs");
    return sum / static_cast<double>(count);
}

/// Iterative layout search: start from the square-area width estimate,
/// wrap, and multiply W by sqrt(AR) (clamped to +-25% per step) until
/// AR = H/W_extent lands in [0.9, 1.1] or max_iters runs out; the iterate
/// closest to AR 1 is then returned with best_effort set. Ties prefer the
/// larger width.
inline LayoutGeometry optimize_layout(const corpus::ShuffledDocument& doc,
                                      const LayoutSpec& spec, int max_iters = 20) {
    spec.validate();
    if (doc.char_count == 0 || doc.text.empty())
        throw DataError("optimize_layout: document is empty");
    if (max_iters <= 0) throw ConfigError("optimize_layout: max_iters must be positive");

    const detail::Metrics met = detail::resolve_metrics(spec);
    const std::u32string text = decode_utf8(doc.text);
    const double line_h = spec.line_height();
    const double mean_adv = measure_advance(spec, doc.text);

    double min_w = 1.0;
    for (char32_t c : text)
        if (c != U'\n') min_w = std::max(min_w, met.advance(c) + spec.char_spacing);

    double w = std::sqrt(static_cast<double>(doc.char_count) *
                         (mean_adv + spec.char_spacing) * line_h);
    w = std::max(w, min_w);

    LayoutGeometry best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        const auto lines = detail::wrap_lines(text, met, spec.char_spacing, w);
        const double extent = std::max(detail::max_extent(lines), 1.0);
        const int line_count = static_cast<int>(lines.size());
        const double height = line_count * line_h;
        const double ar = height / extent;

        LayoutGeometry g;
        g.wrap_width = w;
        g.image_width = std::max(1, static_cast<int>(std::ceil(extent)));
        g.image_height = std::max(1, static_cast<int>(std::lround(height)));
        g.aspect_ratio_k = static_cast<double>(g.image_width) / g.image_height;
        g.line_count = line_count;
        g.n_line = static_cast<double>(detail::sum_chars(lines)) / line_count;
        g.w_f_effective = mean_adv;

        const double dist = std::abs(ar - 1.0);
        if (dist < best_dist || (dist == best_dist && g.wrap_width > best.wrap_width)) {
            best_dist = dist;
            best = g;
        }
        if (ar >= 0.9 && ar <= 1.1) return g;

        double next = w * std::sqrt(ar);
        next = std::clamp(next, 0.75 * w, 1.25 * w);
        next = std::max(next, min_w);
        if (std::abs(next - w) < 0.5) break; // no further progress possible
        w = next;
    }
    best.best_effort = true;
    return best;
}

/// Deterministic rasterization of doc under the solved geometry. Line
/// height is glyph height plus line spacing; each glyph advances by its
/// own width plus char spacing; paragraph markers force line breaks.
inline RenderedSample render(const corpus::ShuffledDocument& doc, const LayoutSpec& spec,
                             const LayoutGeometry& geometry) {
    spec.validate();
    if (doc.text.empty()) throw DataError("render: document is empty");
    const detail::Metrics met = detail::resolve_metrics(spec);
    const std::u32string text = decode_utf8(doc.text);
    const auto lines = detail::wrap_lines(text, met, spec.char_spacing, geometry.wrap_width);
    if (static_cast<int>(lines.size()) != geometry.line_count)
        throw DataError("render: geometry does not match document (line count differs)");

    const int line_h = spec.line_height();
    img::Image im(geometry.image_width, geometry.image_height, 255);

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const int top = static_cast<int>(li) * line_h;
        for (const auto& g : lines[li].glyphs) {
            if (met.synthetic) {
                const int x0 = std::max(0, static_cast<int>(std::lround(g.x)));
                const int x1 = std::min(im.width, x0 + met.w_f);
                const int y0 = std::max(0, top);
                const int y1 = std::min(im.height, top + met.h_f);
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) im.at(x, y) = 0;
            } else {
                const double baseline = top + met.ttf->ascent_em() * spec.font_size;
                met.ttf->draw_glyph(im, g.cp, g.x, baseline, spec.font_size);
            }
        }
    }

    RenderedSample s;
    s.image = std::move(im);
    s.ground_truth = doc.text;
    s.n_char = doc.char_count;
    s.geometry = geometry;
    s.layout = spec;
    s.seed = doc.seed;
    return s;
}

struct ShiftVariant {
    int dx = 0;
    int dy = 0;
    img::Image image;
};

/// Rescale the sample to (R - patch) squared, then paste it onto a white
/// R x R canvas at every offset in {0, stride, ..., patch}^2. Returns
/// exactly (patch/stride + 1)^2 variants.
inline std::vector<ShiftVariant> pixel_shift_variants(const img::Image& source, int R,
                                                      int patch, int stride) {
    if (stride <= 0) throw ConfigError("pixel_shift_variants: stride must be positive");
    if (patch <= 0 || patch % stride != 0)
        throw ConfigError("pixel_shift_variants: patch must be a positive multiple of stride");
    if (R <= patch) throw ConfigError("pixel_shift_variants: resolution must exceed patch size");

    const img::Image resized = img::resize_bilinear(source, R - patch, R - patch);
    std::vector<ShiftVariant> variants;
    variants.reserve(static_cast<std::size_t>(patch / stride + 1) * (patch / stride + 1));
    for (int dy = 0; dy <= patch; dy += stride) {
        for (int dx = 0; dx <= patch; dx += stride) {
            ShiftVariant v;
            v.dx = dx;
            v.dy = dy;
            v.image = img::Image(R, R, 255);
            img::paste(v.image, resized, dx, dy);
            variants.push_back(std::move(v));
        }
    }
    return variants;
}

inline std::vector<ShiftVariant> pixel_shift_variants(const RenderedSample& sample, int R,
                                                      int patch, int stride) {
    return pixel_shift_variants(sample.image, R, patch, stride);
}

/// Paste the sample at the top-left of a white canvas-sized square without
/// rescaling, so character pixel density after model-side resizing is
/// equal across samples sharing the canvas.
inline img::Image canvas_align(const img::Image& source, int canvas) {
    if (source.width > canvas || source.height > canvas)
        throw DataError("canvas_align: sample of " + std::to_string(source.width) + "x" +
                        std::to_string(source.height) + " exceeds canvas; need at least " +
                        std::to_string(std::max(source.width, source.height)));
    img::Image out(canvas, canvas, 255);
    img::paste(out, source, 0, 0);
    return out;
}

inline img::Image canvas_align(const RenderedSample& sample, int canvas) {
    return canvas_align(sample.image, canvas);
}

// ---------------------------------------------------------------------------
// Sample metadata sidecars

inline std::string layout_tag(const LayoutSpec& spec) {
    return "font=" + std::to_string(spec.font_size) + ",ls=" + std::to_string(spec.line_spacing) +
           ",cs=" + std::to_string(spec.char_spacing);
}

struct SampleMeta {
    std::string sample_id;
    std::size_t n_char = 0;
    int width = 0;
    int height = 0;
    double k = 0;
    LayoutSpec layout;
    LayoutGeometry geometry;
    std::uint64_t seed = 0;
    std::string resize_filter = "bilinear";
    std::string image_path;
    std::string gt_path;
    std::string tag; // canonical "font=F,ls=L,cs=C"
};

inline nlohmann::json to_json(const SampleMeta& m) {
    nlohmann::json layout{{"font_size", m.layout.font_size},
                          {"line_spacing", m.layout.line_spacing},
                          {"char_spacing", m.layout.char_spacing}};
    if (m.layout.synthetic()) {
        const auto& s = std::get<SyntheticMonospace>(m.layout.mode);
        layout["mode"] = "monospace";
        layout["w_f"] = s.w_f;
        layout["h_f"] = s.h_f;
    } else {
        layout["mode"] = "ttf";
        layout["font_path"] = std::get<MeasuredFont>(m.layout.mode).path;
    }
    return nlohmann::json{{"schema", "vtcap.sample.v1"},
                          {"sample_id", m.sample_id},
                          {"n_char", m.n_char},
                          {"width", m.width},
                          {"height", m.height},
                          {"k", m.k},
                          {"layout", layout},
                          {"layout_tag", m.tag},
                          {"w_f_effective", m.geometry.w_f_effective},
                          {"wrap_width", m.geometry.wrap_width},
                          {"line_count", m.geometry.line_count},
                          {"n_line", m.geometry.n_line},
                          {"best_effort", m.geometry.best_effort},
                          {"seed", m.seed},
                          {"resize_filter", m.resize_filter},
                          {"image_path", m.image_path},
                          {"gt_path", m.gt_path}};
}

inline SampleMeta meta_from_json(const nlohmann::json& j) {
    SampleMeta m;
    m.sample_id = j.at("sample_id").get<std::string>();
    m.n_char = j.at("n_char").get<std::size_t>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.k = j.at("k").get<double>();
    const auto& layout = j.at("layout");
    m.layout.font_size = layout.at("font_size").get<int>();
    m.layout.line_spacing = layout.at("line_spacing").get<int>();
    m.layout.char_spacing = layout.at("char_spacing").get<int>();
    if (layout.at("mode").get<std::string>() == "monospace")
        m.layout.mode = SyntheticMonospace{layout.at("w_f").get<int>(), layout.at("h_f").get<int>()};
    else
        m.layout.mode = MeasuredFont{layout.at("font_path").get<std::string>()};
    m.tag = j.value("layout_tag", layout_tag(m.layout));
    m.geometry.w_f_effective = j.at("w_f_effective").get<double>();
    m.geometry.wrap_width = j.at("wrap_width").get<double>();
    m.geometry.line_count = j.at("line_count").get<int>();
    m.geometry.n_line = j.at("n_line").get<double>();
    m.geometry.best_effort = j.at("best_effort").get<bool>();
    m.geometry.image_width = m.width;
    m.geometry.image_height = m.height;
    m.geometry.aspect_ratio_k = m.k;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.resize_filter = j.value("resize_filter", "bilinear");
    m.image_path = j.value("image_path", "");
    m.gt_path = j.value("gt_path", "");
    return m;
}

inline void write_sidecar(const SampleMeta& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write sidecar: " + path);
    out << to_json(m).dump(2) << '\n';
}

inline SampleMeta read_sidecar(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open sidecar: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("sidecar parse error in " + path + ": " + e.what());
    }
    return meta_from_json(j);
}

} // namespace vtcap::typeset
