#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>

#include "vtcap/corpus.hpp"
#include "vtcap/rng.hpp"
#include "vtcap/typeset.hpp"

using namespace vtcap;
using namespace vtcap::typeset;

namespace {

corpus::ShuffledDocument make_doc(const std::string& text, std::uint64_t seed = 0) {
    corpus::ShuffledDocument d;
    d.text = text;
    d.char_count = scalar_count(text);
    d.seed = seed;
    return d;
}

LayoutSpec mono_spec(int w_f, int h_f, int ls = 0, int cs = 0) {
    LayoutSpec s;
    s.font_size = h_f;
    s.line_spacing = ls;
    s.char_spacing = cs;
    s.mode = SyntheticMonospace{w_f, h_f};
    return s;
}

/// English-like filler with varied word lengths so wrapping is not
/// quantized to a single word width.
std::string filler_text(std::size_t target_chars, std::uint64_t seed) {
    Rng rng(seed);
    std::string s;
    while (s.size() < target_chars) {
        const std::size_t len = 1 + rng.below(11);
        if (!s.empty()) s.push_back(' ');
        for (std::size_t i = 0; i < len; ++i)
            s.push_back(static_cast<char>('a' + rng.below(26)));
    }
    s.resize(target_chars);
    if (s.back() == ' ') s.back() = 'x';
    return s;
}

std::string find_test_font() {
    if (const char* env = std::getenv("VTCAP_TEST_FONT"); env && *env) return env;
    for (const char* p : {"/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
                          "/usr/share/fonts/TTF/DejaVuSans.ttf"}) {
        if (std::filesystem::exists(p)) return p;
    }
    return {};
}

} // namespace

TEST(MeasureAdvance, MonospaceIdentity) {
    EXPECT_DOUBLE_EQ(measure_advance(mono_spec(10, 20), "whatever text"), 10.0);
}

TEST(MeasureAdvance, EmptyTextIsError) {
    EXPECT_THROW(measure_advance(mono_spec(10, 20), ""), ConfigError);
    EXPECT_THROW(measure_advance(mono_spec(10, 20), "\n\n"), ConfigError);
}

TEST(MeasureAdvance, ProportionalFontOrdersNarrowBelowWide) {
    const std::string font = find_test_font();
    if (font.empty()) GTEST_SKIP() << "no test font available";
    LayoutSpec s;
    s.font_size = 24;
    s.mode = MeasuredFont{font};
    const double narrow = measure_advance(s, "iiii");
    const double wide = measure_advance(s, "MMMM");
    EXPECT_GT(narrow, 0.0);
    EXPECT_LE(narrow, wide);
}

TEST(OptimizeLayout, SquareHeuristicLandsInRange) {
    auto doc = make_doc(filler_text(1000, 3));
    auto g = optimize_layout(doc, mono_spec(10, 20));
    EXPECT_FALSE(g.best_effort);
    const double ar = static_cast<double>(g.image_height) / g.image_width;
    EXPECT_GE(ar, 0.9);
    EXPECT_LE(ar, 1.1);
    // hand-run ballpark: W around 450, about 23 lines of height 20
    EXPECT_NEAR(g.wrap_width, 450.0, 60.0);
    EXPECT_NEAR(g.line_count, 23, 3);
    EXPECT_EQ(g.image_height, g.line_count * 20);
    EXPECT_DOUBLE_EQ(g.w_f_effective, 10.0);
}

TEST(OptimizeLayout, SingleCharIsBestEffort) {
    auto doc = make_doc("x");
    auto g = optimize_layout(doc, mono_spec(10, 20));
    EXPECT_TRUE(g.best_effort);
    EXPECT_EQ(g.line_count, 1);
}

TEST(OptimizeLayout, EmptyDocIsError) {
    EXPECT_THROW(optimize_layout(make_doc(""), mono_spec(10, 20)), DataError);
}

TEST(OptimizeLayout, InvalidSpecIsError) {
    auto doc = make_doc("hello world");
    LayoutSpec bad = mono_spec(10, 20);
    bad.char_spacing = -10; // w_f + c_s == 0
    EXPECT_THROW(optimize_layout(doc, bad), ConfigError);
    LayoutSpec bad2 = mono_spec(10, 20);
    bad2.font_size = 0;
    EXPECT_THROW(optimize_layout(doc, bad2), ConfigError);
}

TEST(OptimizeLayout, AcceptedLayoutsSatisfyArInvariant) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Rng rng(seed + 100);
        const std::size_t n = 300 + rng.below(5000);
        auto doc = make_doc(filler_text(n, seed));
        auto g = optimize_layout(doc, mono_spec(9, 18, 4, 1));
        if (!g.best_effort) {
            const double ar = static_cast<double>(g.image_height) / g.image_width;
            EXPECT_GE(ar, 0.9) << "seed " << seed;
            EXPECT_LE(ar, 1.1) << "seed " << seed;
        }
    }
}

TEST(Render, Deterministic) {
    auto doc = make_doc(filler_text(800, 9));
    auto spec = mono_spec(10, 20, 2, 1);
    auto g = optimize_layout(doc, spec);
    auto a = render(doc, spec, g);
    auto b = render(doc, spec, g);
    EXPECT_EQ(a.image, b.image);
    EXPECT_EQ(a.n_char, doc.char_count);
    EXPECT_EQ(a.ground_truth, doc.text);
}

TEST(Render, TwoBoxesSeparatedByCharSpacing) {
    auto doc = make_doc("ab");
    LayoutSpec spec = mono_spec(10, 20, 0, 3);
    LayoutGeometry g;
    g.wrap_width = 100;
    g.image_width = 26; // 2 * (10 + 3)
    g.image_height = 20;
    g.line_count = 1;
    auto s = render(doc, spec, g);
    // box one: x in [0, 10); gap [10, 13); box two: [13, 23)
    for (int x = 0; x < 10; ++x) EXPECT_EQ(s.image.at(x, 10), 0) << x;
    for (int x = 10; x < 13; ++x) EXPECT_EQ(s.image.at(x, 10), 255) << x;
    for (int x = 13; x < 23; ++x) EXPECT_EQ(s.image.at(x, 10), 0) << x;
}

TEST(Render, ParagraphGapIsOneLineHeight) {
    auto doc = make_doc("aa\n\nbb");
    LayoutSpec spec = mono_spec(10, 20, 0, 0);
    auto g = optimize_layout(doc, spec, 1);
    auto s = render(doc, spec, g);
    ASSERT_EQ(g.line_count, 3);
    // middle band is blank: row sums of the empty line are pure white
    for (int y = 20; y < 40; ++y) {
        long sum = 0;
        for (int x = 0; x < s.image.width; ++x) sum += s.image.at(x, y);
        EXPECT_EQ(sum, 255L * s.image.width) << "row " << y;
    }
    // the bands above and below carry ink
    long top = 0, bottom = 0;
    for (int x = 0; x < s.image.width; ++x) {
        top += s.image.at(x, 10);
        bottom += s.image.at(x, 50);
    }
    EXPECT_LT(top, 255L * s.image.width);
    EXPECT_LT(bottom, 255L * s.image.width);
}

TEST(Wrap, SoundnessAndCharAccounting) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::string text = filler_text(500 + seed * 37, seed);
        if (seed % 3 == 0) text[text.size() / 2] = '\n'; // inject a paragraph break
        const std::u32string u = decode_utf8(text);
        detail::Metrics met;
        met.w_f = 7;
        met.h_f = 14;
        const double W = 90;
        auto lines = detail::wrap_lines(u, met, 1, W);
        std::size_t chars = 0;
        std::size_t newlines = 0;
        for (char32_t c : u)
            if (c == U'\n') ++newlines;
        for (const auto& l : lines) {
            EXPECT_LE(l.extent, W + 1e-9);
            chars += l.char_count;
        }
        EXPECT_EQ(chars + newlines, u.size());
    }
}

TEST(Wrap, LongWordHardBreaks) {
    const std::u32string u = decode_utf8(std::string(50, 'q'));
    detail::Metrics met;
    met.w_f = 10;
    met.h_f = 20;
    auto lines = detail::wrap_lines(u, met, 0, 100);
    EXPECT_EQ(lines.size(), 5u);
    for (const auto& l : lines) EXPECT_LE(l.extent, 100.0);
}

TEST(PixelShift, VariantCountAndSize) {
    img::Image src(200, 180, 255);
    src.at(0, 0) = 0;
    auto v81 = pixel_shift_variants(src, 640, 16, 2);
    EXPECT_EQ(v81.size(), 81u);
    for (const auto& v : v81) {
        EXPECT_EQ(v.image.width, 640);
        EXPECT_EQ(v.image.height, 640);
    }
    auto v4 = pixel_shift_variants(src, 640, 16, 16);
    EXPECT_EQ(v4.size(), 4u);
    EXPECT_THROW(pixel_shift_variants(src, 640, 16, 0), ConfigError);
    EXPECT_THROW(pixel_shift_variants(src, 640, 16, 3), ConfigError);
    EXPECT_THROW(pixel_shift_variants(src, 16, 16, 2), ConfigError);
}

TEST(PixelShift, ZeroOffsetPreservesResizedTopLeft) {
    Rng rng(5);
    img::Image src(300, 300, 255);
    for (auto& p : src.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    const int R = 128, patch = 16, stride = 8;
    auto variants = pixel_shift_variants(src, R, patch, stride);
    const img::Image resized = img::resize_bilinear(src, R - patch, R - patch);
    const auto& v0 = variants.front();
    ASSERT_EQ(v0.dx, 0);
    ASSERT_EQ(v0.dy, 0);
    auto region = img::crop(v0.image, 0, 0, R - patch, R - patch);
    EXPECT_EQ(region, resized);
    // and the grid covers all offsets
    const auto& last = variants.back();
    EXPECT_EQ(last.dx, patch);
    EXPECT_EQ(last.dy, patch);
}

TEST(CanvasAlign, IdentityAndPadding) {
    img::Image exact(64, 64, 0);
    auto same = canvas_align(exact, 64);
    EXPECT_EQ(same, exact);

    Rng rng(6);
    img::Image small(30, 20, 255);
    for (auto& p : small.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    auto padded = canvas_align(small, 64);
    EXPECT_EQ(img::crop(padded, 0, 0, 30, 20), small);
    EXPECT_EQ(img::crop(padded, 0, 0, 30, 20).checksum(), small.checksum());
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if (x >= 30 || y >= 20) ASSERT_EQ(padded.at(x, y), 255);
}

TEST(CanvasAlign, OversizeErrorReportsRequiredSize) {
    img::Image big(400, 400, 255);
    try {
        canvas_align(big, 358);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("400"), std::string::npos);
    }
}

TEST(Png, RoundTripThroughBytesAndFile) {
    Rng rng(8);
    img::Image im(97, 41, 255);
    for (auto& p : im.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    auto back = img::decode_png(img::encode_png(im));
    EXPECT_EQ(back, im);

    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "vtcap_png_test.png";
    img::write_png(im, path.string());
    EXPECT_EQ(img::read_png(path.string()), im);
    fs::remove(path);
}

TEST(Jpeg, WritesJfifWithConfiguredDensity) {
    img::Image im(60, 60, 200);
    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "vtcap_jpeg_test.jpg";
    img::write_jpeg(im, path.string(), 95, 96);
    auto bytes = img::read_file_bytes(path.string());
    ASSERT_GT(bytes.size(), 20u);
    EXPECT_EQ(bytes[0], 0xFF);
    EXPECT_EQ(bytes[1], 0xD8); // SOI
    // JFIF APP0: density unit = dpi, X/Y density = 96
    EXPECT_EQ(bytes[13], 1);
    EXPECT_EQ((bytes[14] << 8) | bytes[15], 96);
    EXPECT_EQ((bytes[16] << 8) | bytes[17], 96);
    fs::remove(path);
}

TEST(MeasuredFontRender, ProducesInkDeterministically) {
    const std::string fontpath = find_test_font();
    if (fontpath.empty()) GTEST_SKIP() << "no test font available";
    auto doc = make_doc(filler_text(400, 21));
    LayoutSpec spec;
    spec.font_size = 22;
    spec.line_spacing = 4;
    spec.char_spacing = 0;
    spec.mode = MeasuredFont{fontpath};
    auto g = optimize_layout(doc, spec);
    auto a = render(doc, spec, g);
    auto b = render(doc, spec, g);
    EXPECT_EQ(a.image, b.image);
    std::size_t dark = 0;
    for (auto p : a.image.pixels)
        if (p < 128) ++dark;
    // a filled page of text has a meaningful share of dark pixels
    EXPECT_GT(dark, a.image.pixels.size() / 100);
    EXPECT_LT(dark, a.image.pixels.size() / 2);
}

TEST(MeasuredFontRender, MissingFontFileIsError) {
    auto doc = make_doc("hello");
    LayoutSpec spec;
    spec.font_size = 20;
    spec.mode = MeasuredFont{"/nonexistent/font.ttf"};
    EXPECT_THROW(optimize_layout(doc, spec), DataError);
}

TEST(Sidecar, RoundTrip) {
    auto doc = make_doc(filler_text(300, 2), 77);
    auto spec = mono_spec(8, 16, 2, -1);
    auto g = optimize_layout(doc, spec);
    SampleMeta m;
    m.sample_id = "sample-1";
    m.n_char = doc.char_count;
    m.width = g.image_width;
    m.height = g.image_height;
    m.k = g.aspect_ratio_k;
    m.layout = spec;
    m.geometry = g;
    m.seed = doc.seed;
    m.tag = layout_tag(spec);
    m.image_path = "sample-1.png";
    m.gt_path = "sample-1.gt.txt";

    namespace fs = std::filesystem;
    const auto path = fs::temp_directory_path() / "vtcap_sidecar_test.json";
    write_sidecar(m, path.string());
    auto r = read_sidecar(path.string());
    EXPECT_EQ(r.sample_id, m.sample_id);
    EXPECT_EQ(r.n_char, m.n_char);
    EXPECT_EQ(r.tag, "font=16,ls=2,cs=-1");
    EXPECT_EQ(r.layout.char_spacing, -1);
    ASSERT_TRUE(r.layout.synthetic());
    EXPECT_EQ(std::get<SyntheticMonospace>(r.layout.mode).w_f, 8);
    EXPECT_DOUBLE_EQ(r.geometry.wrap_width, g.wrap_width);
    EXPECT_EQ(r.geometry.line_count, g.line_count);
    fs::remove(path);
}
