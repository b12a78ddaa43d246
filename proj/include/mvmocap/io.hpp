#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvmocap/errors.hpp"
#include "mvmocap/geometry.hpp"
#include "mvmocap/skeleton.hpp"

namespace mvmocap {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Number formatting: shortest decimal form that round-trips exactly.

inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw SchemaError("bad number: '" + std::string(s) + "'");
    return v;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path.string());
    out << text;
}

// ---------------------------------------------------------------------------
// Rig file: JSON document listing the calibrated views.

namespace detail {

inline const Json& require_field(const Json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
    return *it;
}

inline Mat3 parse_mat3(const Json& j, const char* key, const std::string& where) {
    const Json& arr = require_field(j, key, where);
    if (!arr.is_array() || arr.size() != 9)
        throw SchemaError(where + ": field '" + key + "' must be a 9-element row-major array");
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = arr[3 * r + c].get<double>();
    return m;
}

inline Json dump_mat3(const Mat3& m) {
    Json arr = Json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) arr.push_back(m(r, c));
    return arr;
}

}  // namespace detail

inline constexpr int kRigSchemaVersion = 1;

inline std::vector<CameraParams> parse_rig(const Json& doc) {
    if (detail::require_field(doc, "schema_version", "rig").get<int>() != kRigSchemaVersion)
        throw SchemaError("rig: unsupported schema_version");
    const Json& views = detail::require_field(doc, "views", "rig");
    if (!views.is_array() || views.empty()) throw SchemaError("rig: field 'views' must be a non-empty array");
    std::vector<CameraParams> cams;
    for (const Json& v : views) {
        CameraParams cam;
        const std::string where = "rig view " + std::to_string(cams.size());
        cam.id = detail::require_field(v, "id", where).get<int>();
        cam.intrinsics = detail::parse_mat3(v, "intrinsics", where);
        cam.rotation = detail::parse_mat3(v, "rotation", where);
        const Json& t = detail::require_field(v, "translation", where);
        if (!t.is_array() || t.size() != 3) throw SchemaError(where + ": field 'translation' must have 3 elements");
        cam.translation = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
        const Json& sz = detail::require_field(v, "image_size", where);
        if (!sz.is_array() || sz.size() != 2) throw SchemaError(where + ": field 'image_size' must be [width, height]");
        cam.width = sz[0].get<int>();
        cam.height = sz[1].get<int>();
        cam.heatmap_downscale = detail::require_field(v, "heatmap_downscale", where).get<double>();
        cam.validate();
        for (const auto& prev : cams)
            if (prev.id == cam.id) throw SchemaError(where + ": duplicate view id " + std::to_string(cam.id));
        cams.push_back(cam);
    }
    return cams;
}

inline std::vector<CameraParams> load_rig(const std::filesystem::path& path) {
    Json doc;
    try {
        doc = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("rig " + path.string() + ": " + e.what());
    }
    return parse_rig(doc);
}

inline Json rig_to_json(std::span<const CameraParams> cams) {
    Json doc;
    doc["schema_version"] = kRigSchemaVersion;
    Json views = Json::array();
    for (const auto& cam : cams) {
        Json v;
        v["id"] = cam.id;
        v["intrinsics"] = detail::dump_mat3(cam.intrinsics);
        v["rotation"] = detail::dump_mat3(cam.rotation);
        v["translation"] = Json::array({cam.translation.x(), cam.translation.y(), cam.translation.z()});
        v["image_size"] = Json::array({cam.width, cam.height});
        v["heatmap_downscale"] = cam.heatmap_downscale;
        views.push_back(std::move(v));
    }
    doc["views"] = std::move(views);
    return doc;
}

inline void save_rig(const std::filesystem::path& path, std::span<const CameraParams> cams) {
    write_text_file(path, rig_to_json(cams).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Skeleton sequence: line-based text format, one frame per record.
//
//   skeleton-sequence v1
//   joints 15
//   fps 30            (optional)
//   subject walker    (optional)
//   motion walk       (optional)
//   frame 0
//   person 3 ok x y z c x y z c ...   (joints * 4 numbers)
//   end
//
// Numbers are written in shortest round-trip form, so a parse-write cycle
// is lossless at the bit level.

struct SkeletonFrame {
    int index = 0;
    std::vector<Skeleton3D> people;
};

struct SkeletonSequence {
    int joints = joints::kCount;
    double fps = 0.0;       // 0 = unspecified
    std::string subject;
    std::string motion;
    std::vector<SkeletonFrame> frames;
};

inline std::string write_skeleton_sequence(const SkeletonSequence& seq) {
    std::string out;
    out += "skeleton-sequence v1\n";
    out += "joints " + std::to_string(seq.joints) + "\n";
    if (seq.fps > 0.0) out += "fps " + format_double(seq.fps) + "\n";
    if (!seq.subject.empty()) out += "subject " + seq.subject + "\n";
    if (!seq.motion.empty()) out += "motion " + seq.motion + "\n";
    for (const auto& frame : seq.frames) {
        out += "frame " + std::to_string(frame.index) + "\n";
        for (const auto& person : frame.people) {
            out += "person " + std::to_string(person.person_id) + " " + person.status;
            const int j_count = std::min<int>(seq.joints, joints::kCount);
            for (int j = 0; j < j_count; ++j) {
                const Vec3& p = person.position[j];
                out += " " + format_double(p.x()) + " " + format_double(p.y()) + " " +
                       format_double(p.z()) + " " + format_double(person.confidence[j]);
            }
            out += "\n";
        }
        out += "end\n";
    }
    return out;
}

inline SkeletonSequence parse_skeleton_sequence(const std::string& text) {
    SkeletonSequence seq;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "skeleton-sequence v1")
        throw SchemaError("skeleton sequence: bad or missing header");
    bool in_frame = false;
    SkeletonFrame frame;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        auto fail = [&](const std::string& msg) {
            throw SchemaError("skeleton sequence line " + std::to_string(line_no) + ": " + msg);
        };
        if (tag == "joints") {
            ls >> seq.joints;
            if (seq.joints <= 0 || seq.joints > joints::kCount) fail("unsupported joint count");
        } else if (tag == "fps") {
            std::string v;
            ls >> v;
            seq.fps = parse_double(v);
        } else if (tag == "subject") {
            ls >> seq.subject;
        } else if (tag == "motion") {
            ls >> seq.motion;
        } else if (tag == "frame") {
            if (in_frame) fail("nested frame");
            ls >> frame.index;
            frame.people.clear();
            in_frame = true;
        } else if (tag == "person") {
            if (!in_frame) fail("person outside frame");
            Skeleton3D person;
            ls >> person.person_id >> person.status;
            for (int j = 0; j < seq.joints; ++j) {
                std::string xs, ys, zs, cs;
                if (!(ls >> xs >> ys >> zs >> cs)) fail("truncated person record");
                person.position[j] = Vec3(parse_double(xs), parse_double(ys), parse_double(zs));
                person.confidence[j] = parse_double(cs);
            }
            std::string extra;
            if (ls >> extra) fail("trailing tokens in person record");
            frame.people.push_back(std::move(person));
        } else if (tag == "end") {
            if (!in_frame) fail("stray end");
            seq.frames.push_back(frame);
            in_frame = false;
        } else {
            fail("unknown tag '" + tag + "'");
        }
    }
    if (in_frame) throw SchemaError("skeleton sequence: unterminated frame");
    return seq;
}

inline SkeletonSequence load_skeleton_sequence(const std::filesystem::path& path) {
    try {
        return parse_skeleton_sequence(read_text_file(path));
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

inline void save_skeleton_sequence(const std::filesystem::path& path, const SkeletonSequence& seq) {
    write_text_file(path, write_skeleton_sequence(seq));
}

// ---------------------------------------------------------------------------
// Heatmap grids: little-endian float32 binary with a fixed header.

inline constexpr char kHeatmapMagic[4] = {'M', 'V', 'H', 'M'};
inline constexpr std::uint32_t kHeatmapVersion = 1;

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));  // little-endian host assumed (checked below)
    out.append(bytes, sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t& off, const std::string& where) {
    if (off + sizeof(T) > in.size()) throw SchemaError(where + ": truncated");
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

static_assert(std::endian::native == std::endian::little, "serialization assumes a little-endian host");

}  // namespace detail

inline void save_view_heatmaps(const std::filesystem::path& path, const ViewHeatmaps& view) {
    std::string out;
    out.append(kHeatmapMagic, 4);
    detail::put_le<std::uint32_t>(out, kHeatmapVersion);
    detail::put_le<std::int32_t>(out, view.view_id);
    detail::put_le<std::int32_t>(out, view.joints);
    detail::put_le<std::int32_t>(out, view.height);
    detail::put_le<std::int32_t>(out, view.width);
    out.reserve(out.size() + view.values.size() * sizeof(float));
    for (float v : view.values) detail::put_le<float>(out, v);
    write_text_file(path, out);
}

inline ViewHeatmaps load_view_heatmaps(const std::filesystem::path& path) {
    const std::string in = read_text_file(path);
    const std::string where = "heatmap file " + path.string();
    std::size_t off = 0;
    if (in.size() < 4 || std::memcmp(in.data(), kHeatmapMagic, 4) != 0)
        throw SchemaError(where + ": bad magic");
    off = 4;
    if (detail::get_le<std::uint32_t>(in, off, where) != kHeatmapVersion)
        throw SchemaError(where + ": unsupported version");
    ViewHeatmaps view;
    view.view_id = detail::get_le<std::int32_t>(in, off, where);
    view.joints = detail::get_le<std::int32_t>(in, off, where);
    view.height = detail::get_le<std::int32_t>(in, off, where);
    view.width = detail::get_le<std::int32_t>(in, off, where);
    if (view.joints <= 0 || view.height <= 0 || view.width <= 0)
        throw SchemaError(where + ": non-positive dimensions");
    const std::size_t count =
        static_cast<std::size_t>(view.joints) * view.height * view.width;
    if (in.size() - off != count * sizeof(float)) throw SchemaError(where + ": payload size mismatch");
    view.values.resize(count);
    std::memcpy(view.values.data(), in.data() + off, count * sizeof(float));
    return view;
}

// ---------------------------------------------------------------------------
// Debug volume dump: header (J, W, H, D, kind, person id) plus raw floats.

inline void save_volume_dump(const std::filesystem::path& path, int j, int w, int h, int d,
                             const std::string& kind, int person_id,
                             std::span<const float> values) {
    std::string out;
    out.append("MVVL", 4);
    detail::put_le<std::uint32_t>(out, 1);
    detail::put_le<std::int32_t>(out, j);
    detail::put_le<std::int32_t>(out, w);
    detail::put_le<std::int32_t>(out, h);
    detail::put_le<std::int32_t>(out, d);
    char kind_tag[8] = {};
    std::strncpy(kind_tag, kind.c_str(), sizeof(kind_tag) - 1);
    out.append(kind_tag, sizeof(kind_tag));
    detail::put_le<std::int32_t>(out, person_id);
    for (float v : values) detail::put_le<float>(out, v);
    write_text_file(path, out);
}

}  // namespace mvmocap
