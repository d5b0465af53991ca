#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "vtcap/corpus.hpp"
#include "vtcap/rng.hpp"

using namespace vtcap;
using namespace vtcap::corpus;

TEST(Sanitize, ParagraphDelimiterBoundaryCase) {
    EXPECT_EQ(sanitize("a  b"), "a\nb");
}

TEST(Sanitize, StripAndSingleSpacesPreserved) {
    EXPECT_EQ(sanitize(" hello world "), "hello world");
}

TEST(Sanitize, MultipleRuns) {
    EXPECT_EQ(sanitize("x   y  z"), "x\ny\nz");
}

TEST(Sanitize, TabsAndCrlf) {
    EXPECT_EQ(sanitize("a\tb"), "a b");
    EXPECT_EQ(sanitize("a\r\n\r\nb"), "a\nb");
    EXPECT_EQ(sanitize("a \r\n b"), "a\nb");
}

TEST(Sanitize, EmptyAndAllWhitespace) {
    EXPECT_EQ(sanitize(""), "");
    EXPECT_EQ(sanitize("   \t \n "), "");
}

TEST(Sanitize, UndecodableBytesNameOffset) {
    std::string bad = "abc";
    bad.push_back(static_cast<char>(0xFF));
    try {
        sanitize(bad);
        FAIL() << "expected DecodeError";
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.offset, 3u);
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
    }
}

TEST(Sanitize, IdempotentOnRandomInputs) {
    Rng rng(7);
    const std::string alphabet = "ab \t\r\nc  ";
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        const std::size_t len = rng.below(60);
        for (std::size_t i = 0; i < len; ++i)
            s.push_back(alphabet[rng.below(alphabet.size())]);
        const std::string once = sanitize(s);
        EXPECT_EQ(sanitize(once), once) << "input: [" << s << "]";
    }
}

TEST(Segment, TwoChaptersTimesFour) {
    std::string text = sanitize(
        "CHAPTER one fills this here chapter with text. "
        "CHAPTER two also fills this chapter with text.");
    auto blocks = segment(text, "CHAPTER", 4);
    EXPECT_EQ(blocks.size(), 8u);
}

TEST(Segment, EmptyTextYieldsNothing) {
    EXPECT_TRUE(segment("", "CHAPTER", 4).empty());
}

TEST(Segment, NoMarkerEqualPartition) {
    std::string text(400, 'x');
    auto blocks = segment(text, "CHAPTER", 4);
    ASSERT_EQ(blocks.size(), 4u);
    for (const auto& b : blocks) EXPECT_EQ(b.char_count, 100u);
}

TEST(Segment, PartitionReproducesSplit) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        const std::size_t len = 1 + rng.below(200);
        for (std::size_t i = 0; i < len; ++i)
            text.push_back(static_cast<char>('a' + rng.below(26)));
        const std::size_t n = 1 + rng.below(7);
        auto blocks = segment(text, "|", n);
        std::string joined;
        for (const auto& b : blocks) joined += b.text;
        EXPECT_EQ(joined, text);
        std::size_t mx = 0, mn = text.size();
        for (const auto& b : blocks) {
            mx = std::max(mx, b.char_count);
            mn = std::min(mn, b.char_count);
        }
        EXPECT_LE(mx - mn, 1u);
    }
}

TEST(Segment, CountsUnicodeScalars) {
    // four two-byte code points partition into two blocks of two scalars
    std::string text = "éééé";
    auto blocks = segment(text, "|", 2);
    ASSERT_EQ(blocks.size(), 2u);
    EXPECT_EQ(blocks[0].char_count, 2u);
    EXPECT_EQ(blocks[1].char_count, 2u);
}

TEST(SegmentHierarchical, UniformSplits) {
    std::string a(100, 'a'), b(100, 'b');
    std::string text = "#" + a + "#" + b;
    auto blocks = segment_hierarchical(text, "#", 6, 4);
    EXPECT_EQ(blocks.size(), 48u);
}

TEST(SegmentHierarchical, CeilUnitArithmetic) {
    std::string a(100, 'a'), b(250, 'b');
    std::string text = "#" + a + "#" + b;
    auto blocks = segment_hierarchical(text, "#", 6, 4);
    // first split 1 unit, second ceil(250/100)=3 units, 24 blocks per unit
    EXPECT_EQ(blocks.size(), 96u);
}

TEST(SegmentHierarchical, IdentityConfiguration) {
    std::string text = "single split body";
    auto blocks = segment_hierarchical(text, "#", 1, 1);
    ASSERT_EQ(blocks.size(), 1u);
    EXPECT_EQ(blocks[0].text, text);
}

TEST(SegmentHierarchical, EmptyFirstSplitIsConfigError) {
    EXPECT_THROW(segment_hierarchical("", "#", 6, 4), ConfigError);
    EXPECT_THROW(segment_hierarchical("###", "#", 6, 4), ConfigError);
}

namespace {

std::vector<TextBlock> make_blocks(std::size_t count, std::size_t chars_each) {
    std::vector<TextBlock> blocks;
    for (std::size_t i = 0; i < count; ++i) {
        TextBlock b;
        b.id = "b" + std::to_string(i);
        b.text = std::string(chars_each, static_cast<char>('a' + i % 26));
        b.char_count = chars_each;
        blocks.push_back(b);
    }
    return blocks;
}

} // namespace

TEST(ShuffleSample, FirstDrawSuffices) {
    auto blocks = make_blocks(10, 100);
    auto doc = shuffle_sample(blocks, 1, 42);
    EXPECT_EQ(doc.block_ids.size(), 1u);
    EXPECT_EQ(doc.char_count, 100u);
}

TEST(ShuffleSample, DeterministicUnderSeed) {
    auto blocks = make_blocks(10, 100);
    auto d1 = shuffle_sample(blocks, 450, 1234);
    auto d2 = shuffle_sample(blocks, 450, 1234);
    EXPECT_EQ(d1.text, d2.text);
    EXPECT_EQ(d1.block_ids, d2.block_ids);
    auto d3 = shuffle_sample(blocks, 450, 1235);
    EXPECT_NE(d1.text, d3.text); // overwhelmingly likely for 10 blocks
}

TEST(ShuffleSample, StopRuleArithmetic) {
    auto blocks = make_blocks(10, 100);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto doc = shuffle_sample(blocks, 450, seed);
        // block characters land in [450, 549]; joiners add n-1
        const std::size_t joiners = doc.block_ids.size() - 1;
        const std::size_t block_chars = doc.char_count - joiners;
        EXPECT_GE(block_chars, 450u);
        EXPECT_LT(block_chars, 550u);
        EXPECT_EQ(doc.char_count, scalar_count(doc.text));
    }
}

TEST(ShuffleSample, RefillsPoolWhenExhausted) {
    auto blocks = make_blocks(3, 10);
    auto doc = shuffle_sample(blocks, 100, 5);
    // needs at least 10 draws from a pool of 3
    EXPECT_GE(doc.block_ids.size(), 10u);
    std::size_t block_chars = doc.char_count - (doc.block_ids.size() - 1);
    EXPECT_GE(block_chars, 100u);
}

TEST(ShuffleSample, WithoutReplacementWithinOnePass) {
    auto blocks = make_blocks(10, 100);
    auto doc = shuffle_sample(blocks, 950, 99);
    // 10 draws needed at most; no id may repeat within the first pass
    std::set<std::string> seen(doc.block_ids.begin(), doc.block_ids.end());
    EXPECT_EQ(seen.size(), doc.block_ids.size());
}

TEST(ShuffleSample, EmptyListIsError) {
    EXPECT_THROW(shuffle_sample({}, 10, 0), DataError);
}

TEST(ManifestRoundTrip, BuildSaveLoad) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "vtcap_corpus_test";
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "novel.txt");
        f << "CHAPTER I. It is a truth universally acknowledged, that a single man "
             "in possession of a good fortune, must be in want of a wife.  However "
             "little known the feelings or views of such a man may be.\n"
             "CHAPTER II. Mr. Bennet was among the earliest of those who waited on "
             "Mr. Bingley. He had always intended to visit him.";
    }
    {
        std::ofstream f(dir / "manifest.json");
        f << R"({"schema":"vtcap.manifest.v1","sources":[
              {"path":"novel.txt","domain":"Novels","marker":"CHAPTER","mode":"flat","blocks_per_unit":4}]})";
    }
    auto manifest = load_manifest((dir / "manifest.json").string());
    auto blocks = build_blocks(manifest, dir.string());
    EXPECT_EQ(blocks.size(), 8u);
    for (const auto& b : blocks) {
        EXPECT_EQ(b.domain.kind, DomainKind::Novels);
        EXPECT_EQ(b.char_count, scalar_count(b.text));
    }
    save_blocks(blocks, (dir / "blocks.jsonl").string());
    auto loaded = load_blocks((dir / "blocks.jsonl").string());
    ASSERT_EQ(loaded.size(), blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        EXPECT_EQ(loaded[i].id, blocks[i].id);
        EXPECT_EQ(loaded[i].text, blocks[i].text);
    }
    fs::remove_all(dir);
}
