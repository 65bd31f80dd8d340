#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcf {

enum class Label : std::uint8_t { real = 0, fake = 1 };

const char* to_string(Label label);
Label label_from_string(const std::string& s);

struct FeatureRecord {
    std::string id;
    Label label = Label::real;
    std::string concept_tag;
    std::string source;
    std::vector<float> vector;
};

// Ordered, id-unique collection of feature vectors of a common dimension.
struct FeatureSet {
    std::uint32_t dim = 0;
    std::vector<FeatureRecord> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

struct ManifestEntry {
    std::string path;  // relative to image_root
    Label label = Label::real;
};

struct DatasetManifest {
    std::string name;
    std::string concept_tag;
    std::string source;
    std::string image_root;
    std::vector<ManifestEntry> entries;
};

// Attempt to serialize a FeatureSet with no records.
class EmptySetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed QCFS input; offset is the byte position of the failure.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_ = 0;
};

// QCFS binary format, little-endian throughout:
//   "QCFS" | version u16 | dim u32 | count u64 | records...
// Each record: id_len u16 + id | label u8 | concept_len u16 + concept |
//   source_len u16 + source | dim x f32.
void write_feature_set(const FeatureSet& set, const std::string& path);
std::vector<std::uint8_t> encode_feature_set(const FeatureSet& set);

FeatureSet read_feature_set(const std::string& path);
FeatureSet decode_feature_set(const std::uint8_t* data, std::size_t size);

// Every record's vector is finite, lengths match dim, ids unique and
// non-empty. Throws std::invalid_argument naming the offending record.
void validate_feature_set(const FeatureSet& set);

using RecordPredicate =
    std::function<bool(Label, const std::string& concept_tag,
                       const std::string& source)>;

FeatureSet filter_records(const FeatureSet& set, const RecordPredicate& pred);

// Concatenation a then b; dims must agree and ids must be disjoint.
FeatureSet merge_sets(const FeatureSet& a, const FeatureSet& b);

void write_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

}  // namespace qcf
