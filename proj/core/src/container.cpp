#include "grfkit/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "container blobs are little-endian; big-endian hosts need swaps");

namespace grfkit {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

void write_blob(const std::filesystem::path& file, const void* data, size_t bytes) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + file.string());
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!os) throw IoError("short write: " + file.string());
}

std::vector<char> read_blob(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary | std::ios::ate);
    if (!is) throw IoError("cannot open: " + file.string());
    const auto bytes = static_cast<size_t>(is.tellg());
    std::vector<char> buf(bytes);
    is.seekg(0);
    is.read(buf.data(), static_cast<std::streamsize>(bytes));
    if (!is) throw IoError("short read: " + file.string());
    return buf;
}

json series_entry(const char* file, std::vector<int64_t> shape, float rate_hz,
                  const char* dtype, const char* units) {
    json e;
    e["file"] = file;
    e["shape"] = shape;
    e["rate_hz"] = rate_hz;
    e["dtype"] = dtype;
    if (units) e["units"] = units;
    return e;
}

int64_t shape_elems(const json& entry) {
    int64_t n = 1;
    for (const auto& d : entry.at("shape")) n *= d.get<int64_t>();
    return n;
}

std::vector<float> load_f32_series(const std::filesystem::path& dir, const json& entry) {
    const auto buf = read_blob(dir / entry.at("file").get<std::string>());
    const int64_t want = shape_elems(entry);
    if (buf.size() != static_cast<size_t>(want) * 4)
        throw ValidationError("blob size mismatch for " + entry.at("file").get<std::string>() +
                              ": expected " + std::to_string(want * 4) + " bytes, found " +
                              std::to_string(buf.size()));
    std::vector<float> v(static_cast<size_t>(want));
    std::memcpy(v.data(), buf.data(), buf.size());
    for (float x : v)
        if (!std::isfinite(x))
            throw ValidationError("non-finite payload in " + entry.at("file").get<std::string>());
    return v;
}

std::vector<std::uint8_t> load_u8_series(const std::filesystem::path& dir, const json& entry) {
    const auto buf = read_blob(dir / entry.at("file").get<std::string>());
    const int64_t want = shape_elems(entry);
    if (buf.size() != static_cast<size_t>(want))
        throw ValidationError("blob size mismatch for " + entry.at("file").get<std::string>());
    std::vector<std::uint8_t> v(buf.begin(), buf.end());
    return v;
}

const char* group_name(CellGroup g) {
    switch (g) {
        case CellGroup::heel: return "heel";
        case CellGroup::toe: return "toe";
        default: return "gray";
    }
}

CellGroup group_from(const std::string& s) {
    if (s == "heel") return CellGroup::heel;
    if (s == "toe") return CellGroup::toe;
    if (s == "gray") return CellGroup::gray;
    throw ValidationError("unknown cell group: " + s);
}

}  // namespace

void write_f32(const std::filesystem::path& file, const std::vector<float>& data) {
    write_blob(file, data.data(), data.size() * 4);
}

std::vector<float> read_f32(const std::filesystem::path& file) {
    const auto buf = read_blob(file);
    if (buf.size() % 4 != 0) throw ValidationError("f32 blob size not a multiple of 4");
    std::vector<float> v(buf.size() / 4);
    std::memcpy(v.data(), buf.data(), buf.size());
    return v;
}

void save_take(const Take& take, const std::filesystem::path& dir) {
    const auto report = validate_take(take);
    if (!report.empty()) {
        std::string joined = "invalid take:";
        for (const auto& r : report) joined += "\n  - " + r;
        throw ValidationError(joined);
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir.string());

    const int64_t t = take.poses.frames();
    const int j = take.poses.joints;

    json meta;
    meta["format_version"] = kFormatVersion;
    meta["synchronized"] = take.synchronized;
    meta["subject"] = {{"id", take.meta.id},
                       {"weight_kg", take.meta.weight_kg},
                       {"height_m", take.meta.height_m}};

    json skel;
    skel["parents"] = take.skeleton.parent;
    skel["names"] = take.skeleton.names;
    json offs = json::array();
    for (const auto& o : take.skeleton.offset) offs.push_back({o[0], o[1], o[2]});
    skel["offsets_m"] = offs;
    skel["foot_joints"] = {take.skeleton.foot_joints.left_ankle, take.skeleton.foot_joints.left_toe,
                           take.skeleton.foot_joints.right_ankle,
                           take.skeleton.foot_joints.right_toe};
    meta["skeleton"] = skel;

    json cells = json::array();
    for (const auto& c : take.layout.cells)
        cells.push_back({{"area_cm2", c.area_cm2},
                         {"position_m", {c.position_m[0], c.position_m[1]}},
                         {"group", group_name(c.group)}});
    meta["insole_layout"] = {{"cells", cells}};

    json series;
    series["poses"] = series_entry("poses.f32", {t, j, 3}, take.poses.rate_hz, "f32", "m");
    write_f32(dir / "poses.f32", take.poses.positions);

    if (take.local_motion) {
        const auto& m = *take.local_motion;
        series["local_rotations"] =
            series_entry("local_rotations.f32", {m.frames(), m.joints, 4}, m.rate_hz, "f32",
                         "quaternion_wxyz");
        series["root_translation"] =
            series_entry("root_translation.f32", {m.frames(), 3}, m.rate_hz, "f32", "m");
        write_f32(dir / "local_rotations.f32", m.rotations);
        write_f32(dir / "root_translation.f32", m.root_translation);
    }
    if (take.pressure) {
        auto e = series_entry("pressure.f32", {take.pressure->frames(), 2, kCellsPerFoot},
                              take.pressure->rate_hz, "f32", "N/cm^2");
        e["raw_quantized"] = take.pressure->raw_quantized;
        series["pressure"] = e;
        write_f32(dir / "pressure.f32", take.pressure->values);
    }
    if (take.vgrf) {
        series["vgrf"] = series_entry("vgrf.f32", {take.vgrf->frames(), 2, kCellsPerFoot},
                                      take.vgrf->rate_hz, "f32", "bodyweight");
        write_f32(dir / "vgrf.f32", take.vgrf->values);
    }
    if (take.contacts) {
        series["contacts"] = series_entry("contacts.u8", {take.contacts->frames(), 2, 2},
                                          take.contacts->rate_hz, "u8", nullptr);
        write_blob(dir / "contacts.u8", take.contacts->labels.data(),
                   take.contacts->labels.size());
    }
    if (take.imu_accel) {
        series["imu_accel"] = series_entry("imu_accel.f32", {take.imu_accel->frames(), 2, 3},
                                           take.imu_accel->rate_hz, "f32", "m/s^2");
        write_f32(dir / "imu_accel.f32", take.imu_accel->values);
    }
    meta["series"] = series;

    std::ofstream os(dir / "meta.json", std::ios::trunc);
    if (!os) throw IoError("cannot write meta.json in " + dir.string());
    os << meta.dump(2) << "\n";
    if (!os) throw IoError("short write: meta.json");
}

Take load_take(const std::filesystem::path& dir) {
    const auto meta_path = dir / "meta.json";
    if (!std::filesystem::exists(meta_path))
        throw IoError("missing meta.json in " + dir.string());
    std::ifstream is(meta_path);
    json meta;
    try {
        is >> meta;
    } catch (const json::exception& e) {
        throw ValidationError("malformed meta.json: " + std::string(e.what()));
    }

    Take take;
    try {
        if (meta.at("format_version").get<int>() != kFormatVersion)
            throw ValidationError("unsupported container format_version");
        take.synchronized = meta.at("synchronized").get<bool>();
        const auto& subj = meta.at("subject");
        take.meta.id = subj.at("id").get<std::string>();
        take.meta.weight_kg = subj.at("weight_kg").get<float>();
        take.meta.height_m = subj.at("height_m").get<float>();

        const auto& skel = meta.at("skeleton");
        take.skeleton.parent = skel.at("parents").get<std::vector<int>>();
        take.skeleton.names = skel.at("names").get<std::vector<std::string>>();
        for (const auto& o : skel.at("offsets_m"))
            take.skeleton.offset.push_back({o.at(0).get<float>(), o.at(1).get<float>(),
                                            o.at(2).get<float>()});
        const auto& fj = skel.at("foot_joints");
        take.skeleton.foot_joints = {fj.at(0).get<int>(), fj.at(1).get<int>(),
                                     fj.at(2).get<int>(), fj.at(3).get<int>()};

        const auto& cells = meta.at("insole_layout").at("cells");
        if (cells.size() != kCellsPerFoot)
            throw ValidationError("insole_layout must list exactly 16 cells");
        for (int c = 0; c < kCellsPerFoot; ++c) {
            const auto& e = cells.at(c);
            take.layout.cells[c] = InsoleCell{
                e.at("area_cm2").get<float>(),
                {e.at("position_m").at(0).get<float>(), e.at("position_m").at(1).get<float>()},
                group_from(e.at("group").get<std::string>())};
        }

        const auto& series = meta.at("series");
        {
            const auto& e = series.at("poses");
            take.poses.joints = static_cast<int>(e.at("shape").at(1).get<int64_t>());
            take.poses.rate_hz = e.at("rate_hz").get<float>();
            take.poses.positions = load_f32_series(dir, e);
        }
        if (series.contains("local_rotations")) {
            LocalMotion m;
            const auto& e = series.at("local_rotations");
            m.joints = static_cast<int>(e.at("shape").at(1).get<int64_t>());
            m.rate_hz = e.at("rate_hz").get<float>();
            m.rotations = load_f32_series(dir, e);
            m.root_translation = load_f32_series(dir, series.at("root_translation"));
            take.local_motion = std::move(m);
        }
        if (series.contains("pressure")) {
            PressureSequence p;
            const auto& e = series.at("pressure");
            p.rate_hz = e.at("rate_hz").get<float>();
            p.raw_quantized = e.value("raw_quantized", false);
            p.values = load_f32_series(dir, e);
            take.pressure = std::move(p);
        }
        if (series.contains("vgrf")) {
            VgrfSequence v;
            const auto& e = series.at("vgrf");
            v.rate_hz = e.at("rate_hz").get<float>();
            v.values = load_f32_series(dir, e);
            take.vgrf = std::move(v);
        }
        if (series.contains("contacts")) {
            ContactSequence c;
            const auto& e = series.at("contacts");
            c.rate_hz = e.at("rate_hz").get<float>();
            c.labels = load_u8_series(dir, e);
            take.contacts = std::move(c);
        }
        if (series.contains("imu_accel")) {
            ImuSequence a;
            const auto& e = series.at("imu_accel");
            a.rate_hz = e.at("rate_hz").get<float>();
            a.values = load_f32_series(dir, e);
            take.imu_accel = std::move(a);
        }
    } catch (const json::exception& e) {
        throw ValidationError("meta.json schema violation: " + std::string(e.what()));
    }

    const auto report = validate_take(take);
    if (!report.empty()) {
        std::string joined = "loaded take violates invariants:";
        for (const auto& r : report) joined += "\n  - " + r;
        throw ValidationError(joined);
    }
    return take;
}

Take import_native_take(const std::filesystem::path&) {
    throw IoError(
        "native database import is not implemented; convert recordings to the "
        "container format described in the README");
}

}  // namespace grfkit
