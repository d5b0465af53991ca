#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "vtcap/error.hpp"
#include "vtcap/image.hpp"

namespace vtcap::font {

/// Minimal TrueType reader: cmap (formats 4 and 12), hmtx advances, glyf
/// outlines with composite support. Enough to measure proportional
/// advances and rasterize Latin text; no hinting, no kerning.
class TrueTypeFont {
public:
    static std::shared_ptr<const TrueTypeFont> load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open font file: " + path);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        auto f = std::shared_ptr<TrueTypeFont>(new TrueTypeFont());
        f->parse(std::move(bytes), path);
        return f;
    }

    /// Horizontal advance of the glyph mapped to cp, in em fractions.
    double advance_em(char32_t cp) const { return advance_units(glyph_index(cp)) / upem_; }

    double ascent_em() const { return ascent_ / upem_; }
    double descent_em() const { return descent_ / upem_; } // typically negative

    /// Draw the glyph for cp dark-on-light into im. pen_x is the left edge
    /// of the advance box in pixels, baseline_y the baseline row. Coverage
    /// is 2x2 supersampled and combined with min() so overlaps stay dark.
    void draw_glyph(img::Image& im, char32_t cp, double pen_x, double baseline_y,
                    double px_size) const {
        std::vector<Contour> contours;
        outline(glyph_index(cp), 0, contours);
        if (contours.empty()) return;

        const double scale = px_size / upem_;
        double min_x = 1e30, max_x = -1e30, min_y = 1e30, max_y = -1e30;
        for (auto& c : contours)
            for (auto& p : c) {
                const double x = pen_x + p.x * scale;
                const double y = baseline_y - p.y * scale;
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            }
        const int x0 = std::max(0, static_cast<int>(std::floor(min_x)));
        const int x1 = std::min(im.width - 1, static_cast<int>(std::ceil(max_x)));
        const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
        const int y1 = std::min(im.height - 1, static_cast<int>(std::ceil(max_y)));
        if (x0 > x1 || y0 > y1) return;

        struct Edge {
            double xa, ya, xb, yb;
            int dir;
        };
        std::vector<Edge> edges;
        for (auto& c : contours) {
            for (std::size_t i = 0; i < c.size(); ++i) {
                const auto& a = c[i];
                const auto& b = c[(i + 1) % c.size()];
                const double ax = pen_x + a.x * scale, ay = baseline_y - a.y * scale;
                const double bx = pen_x + b.x * scale, by = baseline_y - b.y * scale;
                if (ay == by) continue;
                edges.push_back({ax, ay, bx, by, by > ay ? 1 : -1});
            }
        }
        if (edges.empty()) return;

        std::vector<std::pair<double, int>> xs; // crossing x, winding direction
        for (int py = y0; py <= y1; ++py) {
            for (const double sub : {0.25, 0.75}) {
                const double sy = py + sub;
                xs.clear();
                for (const auto& e : edges) {
                    const double lo = std::min(e.ya, e.yb), hi = std::max(e.ya, e.yb);
                    if (sy < lo || sy >= hi) continue;
                    const double t = (sy - e.ya) / (e.yb - e.ya);
                    xs.emplace_back(e.xa + t * (e.xb - e.xa), e.dir);
                }
                if (xs.empty()) continue;
                std::sort(xs.begin(), xs.end());
                int winding = 0;
                double span_lo = 0;
                for (const auto& [cx, dir] : xs) {
                    const int prev = winding;
                    winding += dir;
                    if (prev == 0 && winding != 0) span_lo = cx;
                    else if (prev != 0 && winding == 0) fill_span(im, span_lo, cx, py, x0, x1);
                }
            }
        }
    }

private:
    struct Pt {
        double x, y;
    };
    using Contour = std::vector<Pt>;

    static void fill_span(img::Image& im, double lo, double hi, int py, int x0, int x1) {
        for (int px = std::max(x0, static_cast<int>(std::floor(lo)));
             px <= std::min(x1, static_cast<int>(std::ceil(hi))); ++px) {
            int cover = 0;
            if (px + 0.25 >= lo && px + 0.25 < hi) ++cover;
            if (px + 0.75 >= lo && px + 0.75 < hi) ++cover;
            if (!cover) continue;
            auto& p = im.at(px, py);
            const int shade = 255 - cover * 255 / 4; // two sub-rows x two sub-columns
            p = static_cast<std::uint8_t>(std::max(0, static_cast<int>(p) - (255 - shade)));
        }
    }

    // -- binary parsing helpers -------------------------------------------
    std::uint8_t u8(std::size_t off) const {
        if (off >= data_.size()) throw DataError("font parse error: " + path_);
        return data_[off];
    }
    std::uint16_t u16(std::size_t off) const {
        return static_cast<std::uint16_t>((u8(off) << 8) | u8(off + 1));
    }
    std::int16_t i16(std::size_t off) const { return static_cast<std::int16_t>(u16(off)); }
    std::uint32_t u32(std::size_t off) const {
        return (static_cast<std::uint32_t>(u16(off)) << 16) | u16(off + 2);
    }

    void parse(std::vector<std::uint8_t> bytes, const std::string& path) {
        data_ = std::move(bytes);
        path_ = path;
        const std::uint32_t ver = u32(0);
        if (ver != 0x00010000 && ver != 0x74727565)
            throw DataError("unsupported font format (need TrueType outlines): " + path);
        const std::uint16_t num_tables = u16(4);
        std::size_t head = 0, hhea = 0, maxp = 0, cmap = 0;
        for (std::uint16_t i = 0; i < num_tables; ++i) {
            const std::size_t rec = 12 + 16 * static_cast<std::size_t>(i);
            char tag[5] = {};
            std::memcpy(tag, &data_.at(rec), 4);
            const std::uint32_t off = u32(rec + 8);
            if (!std::strncmp(tag, "head", 4)) head = off;
            else if (!std::strncmp(tag, "hhea", 4)) hhea = off;
            else if (!std::strncmp(tag, "maxp", 4)) maxp = off;
            else if (!std::strncmp(tag, "cmap", 4)) cmap = off;
            else if (!std::strncmp(tag, "hmtx", 4)) hmtx_ = off;
            else if (!std::strncmp(tag, "loca", 4)) loca_ = off;
            else if (!std::strncmp(tag, "glyf", 4)) glyf_ = off;
        }
        if (!head || !hhea || !maxp || !cmap || !hmtx_ || !loca_ || !glyf_)
            throw DataError("font missing required TrueType tables: " + path);
        upem_ = u16(head + 18);
        if (upem_ == 0) throw DataError("font has zero unitsPerEm: " + path);
        long_loca_ = i16(head + 50) != 0;
        ascent_ = i16(hhea + 4);
        descent_ = i16(hhea + 6);
        num_hmetrics_ = u16(hhea + 34);
        num_glyphs_ = u16(maxp + 4);
        parse_cmap(cmap);
    }

    void parse_cmap(std::size_t cmap) {
        const std::uint16_t n = u16(cmap + 2);
        std::size_t best = 0;
        int best_rank = -1;
        for (std::uint16_t i = 0; i < n; ++i) {
            const std::size_t rec = cmap + 4 + 8 * static_cast<std::size_t>(i);
            const std::uint16_t plat = u16(rec), enc = u16(rec + 2);
            const std::size_t sub = cmap + u32(rec + 4);
            const std::uint16_t format = u16(sub);
            int rank = -1;
            if (plat == 3 && enc == 10 && format == 12) rank = 3;
            else if (plat == 3 && enc == 1 && format == 4) rank = 2;
            else if (plat == 0 && (format == 4 || format == 12)) rank = 1;
            if (rank > best_rank) {
                best_rank = rank;
                best = sub;
            }
        }
        if (best_rank < 0) throw DataError("font has no usable cmap subtable: " + path_);
        cmap_sub_ = best;
        cmap_format_ = u16(best);
    }

    std::uint16_t glyph_index(char32_t cp) const {
        if (cmap_format_ == 12) {
            const std::uint32_t groups = u32(cmap_sub_ + 12);
            for (std::uint32_t g = 0; g < groups; ++g) {
                const std::size_t rec = cmap_sub_ + 16 + 12 * static_cast<std::size_t>(g);
                const std::uint32_t lo = u32(rec), hi = u32(rec + 4);
                if (cp >= lo && cp <= hi)
                    return static_cast<std::uint16_t>(u32(rec + 8) + (cp - lo));
            }
            return 0;
        }
        // format 4
        if (cp > 0xFFFF) return 0;
        const std::uint16_t seg_x2 = u16(cmap_sub_ + 6);
        const std::size_t ends = cmap_sub_ + 14;
        const std::size_t starts = ends + seg_x2 + 2;
        const std::size_t deltas = starts + seg_x2;
        const std::size_t ranges = deltas + seg_x2;
        for (std::uint16_t s = 0; s * 2 < seg_x2; ++s) {
            if (u16(ends + 2 * s) < cp) continue;
            const std::uint16_t start = u16(starts + 2 * s);
            if (start > cp) return 0;
            const std::uint16_t delta = u16(deltas + 2 * s);
            const std::uint16_t range_off = u16(ranges + 2 * s);
            if (range_off == 0)
                return static_cast<std::uint16_t>((cp + delta) & 0xFFFF);
            const std::size_t idx = ranges + 2 * s + range_off + 2 * (cp - start);
            const std::uint16_t g = u16(idx);
            return g ? static_cast<std::uint16_t>((g + delta) & 0xFFFF) : 0;
        }
        return 0;
    }

    double advance_units(std::uint16_t glyph) const {
        const std::uint16_t idx = std::min(glyph, static_cast<std::uint16_t>(num_hmetrics_ - 1));
        return u16(hmtx_ + 4 * static_cast<std::size_t>(idx));
    }

    bool glyph_range(std::uint16_t glyph, std::size_t& off, std::size_t& len) const {
        if (glyph >= num_glyphs_) return false;
        std::size_t a, b;
        if (long_loca_) {
            a = u32(loca_ + 4 * static_cast<std::size_t>(glyph));
            b = u32(loca_ + 4 * static_cast<std::size_t>(glyph) + 4);
        } else {
            a = 2 * static_cast<std::size_t>(u16(loca_ + 2 * static_cast<std::size_t>(glyph)));
            b = 2 * static_cast<std::size_t>(u16(loca_ + 2 * static_cast<std::size_t>(glyph) + 2));
        }
        if (b <= a) return false; // empty glyph (e.g. space)
        off = glyf_ + a;
        len = b - a;
        return true;
    }

    /// Decode a glyph outline into closed contours of straight segments
    /// (quadratics flattened with a fixed subdivision), offset by (dx, dy)
    /// font units. Composites recurse.
    void outline(std::uint16_t glyph, int depth, std::vector<Contour>& out,
                 double dx = 0, double dy = 0, double xx = 1, double xy = 0, double yx = 0,
                 double yy = 1) const {
        if (depth > 5) return;
        std::size_t off = 0, len = 0;
        if (!glyph_range(glyph, off, len)) return;
        const int ncont = i16(off);
        if (ncont >= 0) {
            decode_simple(off, static_cast<std::uint16_t>(ncont), out, dx, dy, xx, xy, yx, yy);
            return;
        }
        // composite glyph
        std::size_t p = off + 10;
        for (;;) {
            const std::uint16_t flags = u16(p);
            const std::uint16_t comp = u16(p + 2);
            p += 4;
            double adx = 0, ady = 0;
            if (flags & 0x0001) { // ARG_1_AND_2_ARE_WORDS
                adx = i16(p);
                ady = i16(p + 2);
                p += 4;
            } else {
                adx = static_cast<std::int8_t>(u8(p));
                ady = static_cast<std::int8_t>(u8(p + 1));
                p += 2;
            }
            double cxx = 1, cxy = 0, cyx = 0, cyy = 1;
            if (flags & 0x0008) { // WE_HAVE_A_SCALE
                cxx = cyy = i16(p) / 16384.0;
                p += 2;
            } else if (flags & 0x0040) { // X_AND_Y_SCALE
                cxx = i16(p) / 16384.0;
                cyy = i16(p + 2) / 16384.0;
                p += 4;
            } else if (flags & 0x0080) { // TWO_BY_TWO
                cxx = i16(p) / 16384.0;
                cxy = i16(p + 2) / 16384.0;
                cyx = i16(p + 4) / 16384.0;
                cyy = i16(p + 6) / 16384.0;
                p += 8;
            }
            if (flags & 0x0002) { // ARGS_ARE_XY_VALUES
                // compose child transform with parent
                outline(comp, depth + 1, out, dx + adx * xx + ady * yx, dy + adx * xy + ady * yy,
                        cxx * xx + cxy * yx, cxx * xy + cxy * yy, cyx * xx + cyy * yx,
                        cyx * xy + cyy * yy);
            }
            if (!(flags & 0x0020)) break; // MORE_COMPONENTS
        }
    }

    void decode_simple(std::size_t off, std::uint16_t ncont, std::vector<Contour>& out,
                       double dx, double dy, double xx, double xy, double yx, double yy) const {
        std::vector<std::uint16_t> ends(ncont);
        for (std::uint16_t c = 0; c < ncont; ++c) ends[c] = u16(off + 10 + 2 * c);
        const std::uint16_t npts = ncont ? ends.back() + 1 : 0;
        std::size_t p = off + 10 + 2 * static_cast<std::size_t>(ncont);
        const std::uint16_t instr_len = u16(p);
        p += 2 + instr_len;

        std::vector<std::uint8_t> flags;
        flags.reserve(npts);
        while (flags.size() < npts) {
            const std::uint8_t f = u8(p++);
            flags.push_back(f);
            if (f & 0x08) { // REPEAT
                std::uint8_t times = u8(p++);
                while (times-- && flags.size() < npts) flags.push_back(f);
            }
        }
        std::vector<double> px(npts), py(npts);
        double v = 0;
        for (std::uint16_t i = 0; i < npts; ++i) {
            const std::uint8_t f = flags[i];
            if (f & 0x02) {
                const std::uint8_t d = u8(p++);
                v += (f & 0x10) ? d : -static_cast<double>(d);
            } else if (!(f & 0x10)) {
                v += i16(p);
                p += 2;
            }
            px[i] = v;
        }
        v = 0;
        for (std::uint16_t i = 0; i < npts; ++i) {
            const std::uint8_t f = flags[i];
            if (f & 0x04) {
                const std::uint8_t d = u8(p++);
                v += (f & 0x20) ? d : -static_cast<double>(d);
            } else if (!(f & 0x20)) {
                v += i16(p);
                p += 2;
            }
            py[i] = v;
        }

        std::uint16_t start = 0;
        for (std::uint16_t c = 0; c < ncont; ++c) {
            const std::uint16_t end = ends[c];
            const std::uint16_t n = end - start + 1;
            if (n < 2) {
                start = end + 1;
                continue;
            }
            struct Raw {
                double x, y;
                bool on;
            };
            std::vector<Raw> ring;
            ring.reserve(n);
            for (std::uint16_t i = start; i <= end; ++i)
                ring.push_back({px[i], py[i], (flags[i] & 0x01) != 0});
            start = end + 1;

            // polyline in glyph space; quadratics flattened with a fixed
            // subdivision so output is deterministic
            std::vector<Pt> poly;
            auto emit_quad = [&poly](Pt a, Pt ctrl, Pt b) {
                constexpr int kSub = 8;
                for (int s = 1; s <= kSub; ++s) {
                    const double t = static_cast<double>(s) / kSub;
                    const double u = 1.0 - t;
                    poly.push_back({u * u * a.x + 2 * u * t * ctrl.x + t * t * b.x,
                                    u * u * a.y + 2 * u * t * ctrl.y + t * t * b.y});
                }
            };

            // start on-curve, synthesizing a midpoint when the contour has
            // no on-curve points; between consecutive off-curve points the
            // on-curve midpoint is implied
            int first_on = -1;
            for (std::size_t i = 0; i < ring.size(); ++i)
                if (ring[i].on) {
                    first_on = static_cast<int>(i);
                    break;
                }
            Pt first;
            if (first_on < 0) {
                first = {(ring[0].x + ring[1].x) / 2, (ring[0].y + ring[1].y) / 2};
            } else {
                std::rotate(ring.begin(), ring.begin() + first_on, ring.end());
                first = {ring[0].x, ring[0].y};
            }
            poly.push_back(first);
            Pt cur = first;
            Pt pending_ctrl{};
            bool have_ctrl = false;
            const std::size_t count = ring.size();
            // walk the remaining points; with no on-curve start the walk
            // wraps back around to ring[0]
            const std::size_t steps = first_on < 0 ? count : count - 1;
            for (std::size_t step = 1; step <= steps; ++step) {
                const Raw& r = ring[step % count];
                if (r.on) {
                    const Pt pt{r.x, r.y};
                    if (have_ctrl) {
                        emit_quad(cur, pending_ctrl, pt);
                        have_ctrl = false;
                    } else {
                        poly.push_back(pt);
                    }
                    cur = pt;
                } else {
                    const Pt ctrl{r.x, r.y};
                    if (have_ctrl) {
                        const Pt mid{(pending_ctrl.x + ctrl.x) / 2, (pending_ctrl.y + ctrl.y) / 2};
                        emit_quad(cur, pending_ctrl, mid);
                        cur = mid;
                    }
                    pending_ctrl = ctrl;
                    have_ctrl = true;
                }
            }
            if (have_ctrl) emit_quad(cur, pending_ctrl, first);

            Contour contour;
            contour.reserve(poly.size());
            for (const Pt& p : poly)
                contour.push_back({dx + p.x * xx + p.y * yx, dy + p.x * xy + p.y * yy});
            out.push_back(std::move(contour));
        }
    }

    std::vector<std::uint8_t> data_;
    std::string path_;
    double upem_ = 2048;
    double ascent_ = 0, descent_ = 0;
    bool long_loca_ = false;
    std::uint16_t num_glyphs_ = 0, num_hmetrics_ = 0;
    std::size_t hmtx_ = 0, loca_ = 0, glyf_ = 0, cmap_sub_ = 0;
    int cmap_format_ = 4;
};

/// Process-wide immutable font cache; fonts load once and are shared.
inline std::shared_ptr<const TrueTypeFont> load_font_shared(const std::string& path) {
    static std::mutex mu;
    static std::unordered_map<std::string, std::shared_ptr<const TrueTypeFont>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(path);
    if (it != cache.end()) return it->second;
    auto f = TrueTypeFont::load(path);
    cache.emplace(path, f);
    return f;
}

} // namespace vtcap::font
