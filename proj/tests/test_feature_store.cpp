#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qcf/feature_store.hpp"
#include "test_util.hpp"

using namespace qcf;
using qcf::test::make_record;

TEST_CASE("qcfs header mirrors input") {
    FeatureSet set;
    set.dim = 4;
    set.records.push_back(make_record("a", Label::real, {1, 2, 3, 4}));
    set.records.push_back(make_record("b", Label::fake, {5, 6, 7, 8}));
    const auto bytes = encode_feature_set(set);
    // magic, version
    CHECK(bytes[0] == 'Q');
    CHECK(bytes[1] == 'C');
    CHECK(bytes[2] == 'F');
    CHECK(bytes[3] == 'S');
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    // dim = 4
    CHECK(bytes[6] == 4);
    CHECK(bytes[7] == 0);
    // count = 2
    CHECK(bytes[10] == 2);
    CHECK(bytes[11] == 0);
}

TEST_CASE("golden byte dump of a single-record set") {
    FeatureSet set;
    set.dim = 2;
    FeatureRecord r;
    r.id = "a";
    r.label = Label::fake;
    r.vector = {1.0f, 0.0f};
    set.records.push_back(r);

    // Hand-assembled: magic | version 1 | dim 2 | count 1 |
    // id "a" | label 1 | empty concept | empty source | 1.0f | 0.0f
    const std::vector<std::uint8_t> expected = {
        'Q', 'C', 'F', 'S',
        0x01, 0x00,
        0x02, 0x00, 0x00, 0x00,
        0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
        0x01, 0x00, 'a',
        0x01,
        0x00, 0x00,
        0x00, 0x00,
        0x00, 0x00, 0x80, 0x3f,
        0x00, 0x00, 0x00, 0x00,
    };
    CHECK(encode_feature_set(set) == expected);
}

TEST_CASE("round trip preserves structure and order") {
    Rng rng(7);
    FeatureSet set = qcf::test::random_set(1000, 8, rng);
    set.records[3].concept_tag = "église";  // unicode survives
    const std::string path = qcf::test::temp_dir("fs") + "/set.qcfs";
    write_feature_set(set, path);
    const FeatureSet back = read_feature_set(path);
    REQUIRE(back.size() == set.size());
    CHECK(back.dim == set.dim);
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(back.records[i].id == set.records[i].id);
        CHECK(back.records[i].label == set.records[i].label);
        CHECK(back.records[i].concept_tag == set.records[i].concept_tag);
        CHECK(back.records[i].source == set.records[i].source);
        CHECK(back.records[i].vector == set.records[i].vector);
    }
}

TEST_CASE("round trip property over random shapes") {
    Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        const std::uint32_t dim = 1 + static_cast<std::uint32_t>(rng.below(16));
        FeatureSet set = qcf::test::random_set(n, dim, rng);
        const auto bytes = encode_feature_set(set);
        const auto bytes2 = encode_feature_set(set);
        CHECK(bytes == bytes2);  // deterministic writer
        const FeatureSet back = decode_feature_set(bytes.data(), bytes.size());
        REQUIRE(back.size() == n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(back.records[i].vector == set.records[i].vector);
        }
    }
}

TEST_CASE("empty set is rejected with a distinct error") {
    FeatureSet set;
    set.dim = 4;
    CHECK_THROWS_AS(encode_feature_set(set), EmptySetError);
}

TEST_CASE("truncated file reports the offset") {
    FeatureSet set;
    set.dim = 2;
    set.records.push_back(make_record("abc", Label::real, {1, 2}));
    auto bytes = encode_feature_set(set);
    bytes.resize(bytes.size() - 3);
    try {
        decode_feature_set(bytes.data(), bytes.size());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() > 0);
        CHECK(e.offset() <= bytes.size());
    }
}

TEST_CASE("bad magic and bad version are distinct parse errors") {
    FeatureSet set;
    set.dim = 1;
    set.records.push_back(make_record("x", Label::real, {0.0f}));
    auto bytes = encode_feature_set(set);

    auto corrupted = bytes;
    corrupted[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_feature_set(corrupted.data(), corrupted.size()),
                         "bad magic, not a QCFS file", ParseError);

    corrupted = bytes;
    corrupted[4] = 9;
    CHECK_THROWS_AS(decode_feature_set(corrupted.data(), corrupted.size()),
                    ParseError);
}

TEST_CASE("dim mismatch in a record names the record index") {
    // Corrupt the declared dim after encoding a 2-record set so the second
    // record's floats run off the end.
    FeatureSet set;
    set.dim = 2;
    set.records.push_back(make_record("a", Label::real, {1, 2}));
    set.records.push_back(make_record("b", Label::real, {3, 4}));
    auto bytes = encode_feature_set(set);
    bytes[6] = 3;  // dim 2 -> 3
    try {
        decode_feature_set(bytes.data(), bytes.size());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() > 18);
    }
}

TEST_CASE("filter_records") {
    Rng rng(11);
    FeatureSet set = qcf::test::random_set(10, 3, rng);
    for (std::size_t i = 6; i < 10; ++i) set.records[i].label = Label::fake;

    const FeatureSet reals = filter_records(
        set, [](Label l, const std::string&, const std::string&) {
            return l == Label::real;
        });
    CHECK(reals.size() == 6);
    CHECK(reals.dim == 3);

    const FeatureSet none = filter_records(
        set, [](Label, const std::string& c, const std::string&) {
            return c == "human";
        });
    CHECK(none.empty());

    // Composed filters commute.
    auto pa = [](Label l, const std::string&, const std::string&) {
        return l == Label::fake;
    };
    auto pb = [](Label, const std::string&, const std::string& s) {
        return s == "s";
    };
    const FeatureSet ab = filter_records(filter_records(set, pa), pb);
    const FeatureSet ba = filter_records(filter_records(set, pb), pa);
    REQUIRE(ab.size() == ba.size());
    for (std::size_t i = 0; i < ab.size(); ++i) {
        CHECK(ab.records[i].id == ba.records[i].id);
    }
}

TEST_CASE("merge_sets") {
    Rng rng(13);
    FeatureSet a = qcf::test::random_set(3, 2, rng);
    FeatureSet b;
    b.dim = 2;
    b.records.push_back(make_record("x1", Label::fake, {1, 2}));
    b.records.push_back(make_record("x2", Label::fake, {3, 4}));

    const FeatureSet merged = merge_sets(a, b);
    CHECK(merged.size() == 5);
    CHECK(merged.records[0].id == a.records[0].id);
    CHECK(merged.records[4].id == "x2");

    FeatureSet empty;
    empty.dim = 2;
    const FeatureSet same = merge_sets(a, empty);
    CHECK(same.size() == a.size());

    FeatureSet dup;
    dup.dim = 2;
    dup.records.push_back(make_record("r0", Label::fake, {0, 0}));
    CHECK_THROWS_WITH_AS(merge_sets(a, dup), "duplicate id across sets: r0",
                         std::invalid_argument);

    FeatureSet wrong;
    wrong.dim = 3;
    CHECK_THROWS_AS(merge_sets(a, wrong), std::invalid_argument);
}

TEST_CASE("manifest json round trip") {
    DatasetManifest m;
    m.name = "toy";
    m.concept_tag = "church";
    m.source = "camera";
    m.image_root = "/tmp/imgs";
    m.entries = {{"a.png", Label::real}, {"b.png", Label::fake}};
    const std::string path = qcf::test::temp_dir("manifest") + "/m.json";
    write_manifest(m, path);
    const DatasetManifest back = read_manifest(path);
    CHECK(back.name == m.name);
    CHECK(back.concept_tag == m.concept_tag);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].label == Label::fake);
}
