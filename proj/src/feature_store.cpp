#include "qcf/feature_store.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace qcf {

namespace {

constexpr char kMagic[4] = {'Q', 'C', 'F', 'S'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    if (s.size() > UINT16_MAX) {
        throw std::invalid_argument("string field longer than 65535 bytes");
    }
    put_u16(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size)
        : data_(data), size_(size) {}

    std::size_t offset() const { return pos_; }

    void need(std::size_t n, const char* what) const {
        if (pos_ + n > size_) {
            throw ParseError(std::string("truncated file: expected ") + what,
                             pos_);
        }
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(
            data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    std::uint8_t u8(const char* what) {
        need(1, what);
        return data_[pos_++];
    }

    float f32(const char* what) {
        std::uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::string str(const char* what) {
        std::uint16_t len = u16(what);
        need(len, what);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
        pos_ += len;
        return s;
    }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(Label label) {
    return label == Label::real ? "real" : "fake";
}

Label label_from_string(const std::string& s) {
    if (s == "real") return Label::real;
    if (s == "fake") return Label::fake;
    throw std::invalid_argument("unknown label: " + s);
}

void validate_feature_set(const FeatureSet& set) {
    std::unordered_set<std::string> seen;
    seen.reserve(set.records.size());
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        const FeatureRecord& r = set.records[i];
        if (r.id.empty()) {
            throw std::invalid_argument("record " + std::to_string(i) +
                                        " has empty id");
        }
        if (!seen.insert(r.id).second) {
            throw std::invalid_argument("duplicate id: " + r.id);
        }
        if (r.vector.size() != set.dim) {
            throw std::invalid_argument(
                "record " + std::to_string(i) + " (id " + r.id +
                ") has dim " + std::to_string(r.vector.size()) +
                ", set dim is " + std::to_string(set.dim));
        }
        for (float v : r.vector) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("record " + std::to_string(i) +
                                            " contains a non-finite value");
            }
        }
    }
}

std::vector<std::uint8_t> encode_feature_set(const FeatureSet& set) {
    if (set.records.empty()) {
        throw EmptySetError("refusing to write an empty feature set");
    }
    validate_feature_set(set);

    std::vector<std::uint8_t> out;
    out.reserve(24 + set.records.size() * (32 + 4 * set.dim));
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, kVersion);
    put_u32(out, set.dim);
    put_u64(out, set.records.size());
    for (const FeatureRecord& r : set.records) {
        put_string(out, r.id);
        out.push_back(static_cast<std::uint8_t>(r.label));
        put_string(out, r.concept_tag);
        put_string(out, r.source);
        for (float v : r.vector) put_f32(out, v);
    }
    return out;
}

void write_feature_set(const FeatureSet& set, const std::string& path) {
    const std::vector<std::uint8_t> bytes = encode_feature_set(set);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

FeatureSet decode_feature_set(const std::uint8_t* data, std::size_t size) {
    Reader rd(data, size);
    rd.need(4, "magic");
    if (std::memcmp(data, kMagic, 4) != 0) {
        throw ParseError("bad magic, not a QCFS file", 0);
    }
    Reader body(data, size);
    body.u32("magic");  // skip
    std::uint16_t version = body.u16("version");
    if (version != kVersion) {
        throw ParseError("unsupported version " + std::to_string(version), 4);
    }
    FeatureSet set;
    set.dim = body.u32("dim");
    std::uint64_t count = body.u64("count");
    set.records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      try {
        FeatureRecord r;
        r.id = body.str("record id");
        std::uint8_t lab = body.u8("label");
        if (lab > 1) {
            throw ParseError("record " + std::to_string(i) +
                                 " has invalid label byte",
                             body.offset() - 1);
        }
        r.label = static_cast<Label>(lab);
        r.concept_tag = body.str("concept");
        r.source = body.str("source");
        r.vector.resize(set.dim);
        for (std::uint32_t j = 0; j < set.dim; ++j) {
            r.vector[j] = body.f32("vector element");
        }
        set.records.push_back(std::move(r));
      } catch (const ParseError& e) {
        throw ParseError("record " + std::to_string(i) + ": " + e.what(),
                         e.offset());
      }
    }
    if (body.offset() != size) {
        throw ParseError("trailing bytes after last record", body.offset());
    }
    try {
        validate_feature_set(set);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), body.offset());
    }
    return set;
}

FeatureSet read_feature_set(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return decode_feature_set(bytes.data(), bytes.size());
}

FeatureSet filter_records(const FeatureSet& set, const RecordPredicate& pred) {
    FeatureSet out;
    out.dim = set.dim;
    for (const FeatureRecord& r : set.records) {
        if (pred(r.label, r.concept_tag, r.source)) {
            out.records.push_back(r);
        }
    }
    return out;
}

FeatureSet merge_sets(const FeatureSet& a, const FeatureSet& b) {
    if (a.dim != b.dim) {
        throw std::invalid_argument("dim mismatch: " + std::to_string(a.dim) +
                                    " vs " + std::to_string(b.dim));
    }
    std::unordered_set<std::string> ids;
    for (const FeatureRecord& r : a.records) ids.insert(r.id);
    for (const FeatureRecord& r : b.records) {
        if (ids.count(r.id)) {
            throw std::invalid_argument("duplicate id across sets: " + r.id);
        }
    }
    FeatureSet out = a;
    out.records.insert(out.records.end(), b.records.begin(), b.records.end());
    return out;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    nlohmann::json j;
    j["name"] = m.name;
    j["concept"] = m.concept_tag;
    j["source"] = m.source;
    j["image_root"] = m.image_root;
    j["entries"] = nlohmann::json::array();
    for (const ManifestEntry& e : m.entries) {
        j["entries"].push_back({{"path", e.path}, {"label", to_string(e.label)}});
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j = nlohmann::json::parse(f);
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.concept_tag = j.at("concept").get<std::string>();
    m.source = j.at("source").get<std::string>();
    m.image_root = j.at("image_root").get<std::string>();
    // Relative roots are resolved against the manifest's own directory so a
    // manifest can travel with its images.
    const std::filesystem::path root(m.image_root);
    if (root.is_relative()) {
        const std::filesystem::path parent =
            std::filesystem::path(path).parent_path();
        if (!parent.empty()) m.image_root = (parent / root).string();
    }
    std::unordered_set<std::string> paths;
    for (const auto& e : j.at("entries")) {
        ManifestEntry ent;
        ent.path = e.at("path").get<std::string>();
        ent.label = label_from_string(e.at("label").get<std::string>());
        if (!paths.insert(ent.path).second) {
            throw std::invalid_argument("duplicate manifest path: " + ent.path);
        }
        m.entries.push_back(std::move(ent));
    }
    return m;
}

}  // namespace qcf
