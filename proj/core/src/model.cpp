#include "grfkit/model.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "grfkit/kinematics.hpp"

namespace grfkit::nn {

using nlohmann::json;

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::vgrf: return "vgrf";
        case Variant::contact: return "contact";
        case Variant::dual: return "dual";
        case Variant::mlp3: return "mlp3";
        case Variant::linear: return "linear";
        case Variant::linear_feet: return "linear-feet";
    }
    return "vgrf";
}

Variant variant_from(const std::string& name) {
    if (name == "vgrf") return Variant::vgrf;
    if (name == "contact") return Variant::contact;
    if (name == "dual") return Variant::dual;
    if (name == "mlp3") return Variant::mlp3;
    if (name == "linear") return Variant::linear;
    if (name == "linear-feet") return Variant::linear_feet;
    throw ValidationError("unknown model variant: " + name);
}

bool variant_outputs_vgrf(Variant v) { return v == Variant::vgrf || v == Variant::dual; }

bool variant_outputs_contacts(Variant v) { return v != Variant::vgrf; }

int ModelConfig::scaled(int width) const {
    return std::max(1, static_cast<int>(std::lround(width * width_scale)));
}

int ModelConfig::input_features() const {
    switch (variant) {
        case Variant::vgrf:
        case Variant::contact:
        case Variant::dual:
            return joints * 3;
        case Variant::linear:
            return joints * 6;  // positions + velocities
        case Variant::mlp3:
        case Variant::linear_feet:
            return 4 * 6;  // the four foot joints
    }
    return joints * 3;
}

void ModelConfig::validate() const {
    if (!(width_scale > 0.0)) throw ValidationError("model config: width_scale must be positive");
    if (kernel < 1 || kernel % 2 == 0) throw ValidationError("model config: kernel must be odd");
    if (conv_channels.empty()) throw ValidationError("model config: conv_channels empty");
    for (int c : conv_channels)
        if (c < 1) throw ValidationError("model config: conv channels must be positive");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw ValidationError("model config: dropout_p must be in [0, 1)");
    if (joints < 1) throw ValidationError("model config: joints must be positive");
}

int64_t Model::parameter_count() const {
    int64_t n = 0;
    for (const auto& p : params) n += p.value.size();
    return n;
}

namespace {

constexpr int kVgrfOutputs = 32;    // 2 feet x 16 cells
constexpr int kContactOutputs = 4;  // 2 feet x 2 locations

TensorData<float> init_weight(int64_t fan_in, int64_t fan_out, RngStream& rng) {
    TensorData<float> w({fan_in, fan_out});
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& e : w.v) e = static_cast<float>(rng.uniform(-bound, bound));
    return w;
}

void add_linear(Model& m, const std::string& name, int64_t in, int64_t out, RngStream& rng) {
    m.params.push_back({name + ".w", init_weight(in, out, rng)});
    m.params.push_back({name + ".b", TensorData<float>({out}, 0.f)});
}

void add_conv(Model& m, const std::string& name, int kernel, int64_t in, int64_t out,
              RngStream& rng) {
    m.params.push_back({name + ".w", init_weight(int64_t(kernel) * in, out, rng)});
    m.params.push_back({name + ".b", TensorData<float>({out}, 0.f)});
}

}  // namespace

Model build_model(const ModelConfig& cfg, RngStream& rng) {
    cfg.validate();
    Model m;
    m.config = cfg;
    const int in_features = cfg.input_features();

    switch (cfg.variant) {
        case Variant::vgrf:
        case Variant::contact: {
            int prev = in_features;
            for (size_t i = 0; i < cfg.conv_channels.size(); ++i) {
                const int ch = cfg.scaled(cfg.conv_channels[i]);
                add_conv(m, "conv" + std::to_string(i + 1), cfg.kernel, prev, ch, rng);
                prev = ch;
            }
            const int fc = cfg.scaled(cfg.fc_width);
            add_linear(m, "fc1", prev, fc, rng);
            add_linear(m, "fc2", fc, fc, rng);
            add_linear(m, "head", fc,
                       cfg.variant == Variant::vgrf ? kVgrfOutputs : kContactOutputs, rng);
            break;
        }
        case Variant::dual: {
            int prev = in_features;
            for (size_t i = 0; i < cfg.conv_channels.size(); ++i) {
                const int ch = cfg.scaled(cfg.conv_channels[i]);
                add_conv(m, "conv" + std::to_string(i + 1), cfg.kernel, prev, ch, rng);
                prev = ch;
            }
            const int fc = cfg.scaled(cfg.fc_width);
            add_linear(m, "fc1_vgrf", prev, fc, rng);
            add_linear(m, "fc2_vgrf", fc, fc, rng);
            add_linear(m, "head_vgrf", fc, kVgrfOutputs, rng);
            add_linear(m, "fc1_contact", prev, fc, rng);
            add_linear(m, "fc2_contact", fc, fc, rng);
            add_linear(m, "head_contact", fc, kContactOutputs, rng);
            break;
        }
        case Variant::mlp3: {
            const int w = cfg.scaled(cfg.mlp_width);
            add_linear(m, "l1", in_features, w, rng);
            add_linear(m, "l2", w, w, rng);
            add_linear(m, "l3", w, w, rng);
            add_linear(m, "head", w, kContactOutputs, rng);
            break;
        }
        case Variant::linear:
        case Variant::linear_feet:
            add_linear(m, "head", in_features, kContactOutputs, rng);
            break;
    }
    return m;
}

TensorData<float> assemble_features(const ModelConfig& cfg, const PoseSequence& poses,
                                    const FootJoints& foot_joints) {
    if (poses.joints != cfg.joints)
        throw ValidationError("forward: pose joint count " + std::to_string(poses.joints) +
                              " does not match model config " + std::to_string(cfg.joints));
    const int64_t frames = poses.frames();
    const int features = cfg.input_features();
    TensorData<float> out({frames, features});

    switch (cfg.variant) {
        case Variant::vgrf:
        case Variant::contact:
        case Variant::dual:
            out.v = poses.positions;
            break;
        case Variant::linear: {
            // Velocities need 3 frames; short inputs fall back to zeros.
            const std::vector<float> vel =
                frames >= 3 ? kin::joint_velocities(poses)
                            : std::vector<float>(poses.positions.size(), 0.f);
            const int width = cfg.joints * 3;
            for (int64_t t = 0; t < frames; ++t) {
                std::memcpy(&out.v[t * features], &poses.positions[t * width],
                            sizeof(float) * width);
                std::memcpy(&out.v[t * features + width], &vel[t * width], sizeof(float) * width);
            }
            break;
        }
        case Variant::mlp3:
        case Variant::linear_feet: {
            const std::vector<float> vel =
                frames >= 3 ? kin::joint_velocities(poses)
                            : std::vector<float>(poses.positions.size(), 0.f);
            const auto feet = foot_joints.all();
            for (int64_t t = 0; t < frames; ++t) {
                for (int k = 0; k < 4; ++k) {
                    const int j = feet[k];
                    for (int d = 0; d < 3; ++d) {
                        out.v[t * features + k * 3 + d] = poses.at(t, j)[d];
                        out.v[t * features + 12 + k * 3 + d] = vel[(t * poses.joints + j) * 3 + d];
                    }
                }
            }
            break;
        }
    }
    return out;
}

template <class S>
ForwardIds<S> build_forward(Tape<S>& tape, const ModelConfig& cfg,
                            const std::vector<int>& param_ids, int input, bool training,
                            RngStream* dropout_rng) {
    if (training && cfg.dropout_p > 0.0 && dropout_rng == nullptr)
        throw ValidationError("forward: training mode requires a dropout stream");
    size_t next = 0;
    auto take2 = [&]() {
        if (next + 1 >= param_ids.size() + 1) throw ValidationError("forward: parameter underrun");
        const int w = param_ids[next], b = param_ids[next + 1];
        next += 2;
        return std::pair<int, int>(w, b);
    };
    auto drop = [&](int x) {
        return training && cfg.dropout_p > 0.0 ? dropout(tape, x, cfg.dropout_p, *dropout_rng) : x;
    };

    ForwardIds<S> out;
    switch (cfg.variant) {
        case Variant::vgrf:
        case Variant::contact: {
            int h = input;
            for (size_t i = 0; i < cfg.conv_channels.size(); ++i) {
                auto [w, b] = take2();
                h = elu(tape, conv1d(tape, h, w, b, cfg.kernel));
            }
            {
                auto [w, b] = take2();
                h = elu(tape, linear(tape, drop(h), w, b));
            }
            {
                auto [w, b] = take2();
                h = elu(tape, linear(tape, drop(h), w, b));
            }
            auto [w, b] = take2();
            const int head = linear(tape, drop(h), w, b);
            if (cfg.variant == Variant::vgrf)
                out.vgrf = softplus(tape, head);
            else
                out.contact_logits = head;
            break;
        }
        case Variant::dual: {
            int trunk = input;
            for (size_t i = 0; i < cfg.conv_channels.size(); ++i) {
                auto [w, b] = take2();
                trunk = elu(tape, conv1d(tape, trunk, w, b, cfg.kernel));
            }
            for (int head_kind = 0; head_kind < 2; ++head_kind) {
                int h = trunk;
                {
                    auto [w, b] = take2();
                    h = elu(tape, linear(tape, drop(h), w, b));
                }
                {
                    auto [w, b] = take2();
                    h = elu(tape, linear(tape, drop(h), w, b));
                }
                auto [w, b] = take2();
                const int head = linear(tape, drop(h), w, b);
                if (head_kind == 0)
                    out.vgrf = softplus(tape, head);
                else
                    out.contact_logits = head;
            }
            break;
        }
        case Variant::mlp3: {
            int h = input;
            for (int i = 0; i < 3; ++i) {
                auto [w, b] = take2();
                h = relu(tape, linear(tape, h, w, b));
            }
            auto [w, b] = take2();
            out.contact_logits = linear(tape, h, w, b);
            break;
        }
        case Variant::linear:
        case Variant::linear_feet: {
            auto [w, b] = take2();
            out.contact_logits = linear(tape, input, w, b);
            break;
        }
    }
    if (next != param_ids.size()) throw ValidationError("forward: parameter count mismatch");
    return out;
}

template ForwardIds<float> build_forward<float>(Tape<float>&, const ModelConfig&,
                                                const std::vector<int>&, int, bool, RngStream*);
template ForwardIds<double> build_forward<double>(Tape<double>&, const ModelConfig&,
                                                  const std::vector<int>&, int, bool, RngStream*);

ContactSequence ModelOutput::contacts_from_logits(float rate_hz) const {
    ContactSequence out;
    out.rate_hz = rate_hz;
    out.labels.resize(contact_logits.size());
    for (size_t i = 0; i < contact_logits.size(); ++i)
        out.labels[i] = contact_logits[i] > 0.f ? 1 : 0;
    return out;
}

ModelOutput forward(const Model& model, const PoseSequence& poses,
                    const FootJoints& foot_joints) {
    Tape<float> tape;
    std::vector<int> param_ids;
    param_ids.reserve(model.params.size());
    for (const auto& p : model.params) param_ids.push_back(tape.constant(p.value));
    const int input = tape.constant(assemble_features(model.config, poses, foot_joints));
    const auto ids = build_forward(tape, model.config, param_ids, input);

    ModelOutput out;
    if (ids.vgrf >= 0) {
        VgrfSequence v;
        v.rate_hz = poses.rate_hz;
        v.values = tape.val(ids.vgrf).v;
        out.vgrf = std::move(v);
    }
    if (ids.contact_logits >= 0) out.contact_logits = tape.val(ids.contact_logits).v;
    return out;
}

VgrfSequence estimate_vgrf(const Model& model, const PoseSequence& poses,
                           const FootJoints& foot_joints, int64_t chunk_frames) {
    if (!variant_outputs_vgrf(model.config.variant))
        throw ValidationError("estimate_vgrf: model variant has no vGRF head");
    const int64_t frames = poses.frames();
    // Halo = total receptive radius of the conv trunk.
    const int64_t halo =
        static_cast<int64_t>(model.config.conv_channels.size()) * (model.config.kernel / 2);
    if (frames <= chunk_frames + 2 * halo) return *forward(model, poses, foot_joints).vgrf;

    VgrfSequence out;
    out.rate_hz = poses.rate_hz;
    out.values.resize(static_cast<size_t>(frames) * 2 * kCellsPerFoot);
    for (int64_t begin = 0; begin < frames; begin += chunk_frames) {
        const int64_t end = std::min(frames, begin + chunk_frames);
        const int64_t ext_begin = std::max<int64_t>(0, begin - halo);
        const int64_t ext_end = std::min(frames, end + halo);
        PoseSequence chunk;
        chunk.joints = poses.joints;
        chunk.rate_hz = poses.rate_hz;
        chunk.positions.assign(poses.positions.begin() + ext_begin * poses.joints * 3,
                               poses.positions.begin() + ext_end * poses.joints * 3);
        // Replicate padding at chunk seams would differ from the true
        // neighborhood, so only interior frames are kept.
        const auto est = forward(model, chunk, foot_joints).vgrf;
        const int64_t offset = begin - ext_begin;
        std::memcpy(&out.values[begin * 2 * kCellsPerFoot],
                    &est->values[offset * 2 * kCellsPerFoot],
                    sizeof(float) * (end - begin) * 2 * kCellsPerFoot);
    }
    return out;
}

ContactSequence derive_contacts(const VgrfSequence& estimate, const InsoleLayout& layout,
                                const grf::ContactParams& params) {
    return grf::contact_labels(estimate, layout, params);
}

namespace {

json config_to_json(const ModelConfig& cfg) {
    json j;
    j["variant"] = variant_name(cfg.variant);
    j["conv_channels"] = cfg.conv_channels;
    j["kernel"] = cfg.kernel;
    j["fc_width"] = cfg.fc_width;
    j["mlp_width"] = cfg.mlp_width;
    j["dropout_p"] = cfg.dropout_p;
    j["joints"] = cfg.joints;
    j["width_scale"] = cfg.width_scale;
    return j;
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.variant = variant_from(j.at("variant").get<std::string>());
    cfg.conv_channels = j.at("conv_channels").get<std::vector<int>>();
    cfg.kernel = j.at("kernel").get<int>();
    cfg.fc_width = j.at("fc_width").get<int>();
    cfg.mlp_width = j.at("mlp_width").get<int>();
    cfg.dropout_p = j.at("dropout_p").get<double>();
    cfg.joints = j.at("joints").get<int>();
    cfg.width_scale = j.at("width_scale").get<double>();
    return cfg;
}

constexpr char kModelMagic[4] = {'G', 'R', 'F', 'M'};

}  // namespace

void save_model(const Model& model, const std::filesystem::path& file) {
    json header;
    header["format_version"] = 1;
    header["config"] = config_to_json(model.config);
    json manifest = json::array();
    for (const auto& p : model.params)
        manifest.push_back({{"name", p.name}, {"shape", p.value.shape}});
    header["params"] = manifest;
    const std::string htext = header.dump();

    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + file.string());
    os.write(kModelMagic, 4);
    const std::uint32_t hlen = static_cast<std::uint32_t>(htext.size());
    os.write(reinterpret_cast<const char*>(&hlen), 4);
    os.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& p : model.params)
        os.write(reinterpret_cast<const char*>(p.value.v.data()),
                 static_cast<std::streamsize>(p.value.v.size() * 4));
    if (!os) throw IoError("short write: " + file.string());
}

Model load_model(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("cannot open: " + file.string());
    char magic[4];
    std::uint32_t hlen = 0;
    is.read(magic, 4);
    is.read(reinterpret_cast<char*>(&hlen), 4);
    if (!is || std::memcmp(magic, kModelMagic, 4) != 0)
        throw ValidationError("not a model file: " + file.string());
    std::string htext(hlen, '\0');
    is.read(htext.data(), hlen);
    if (!is) throw ValidationError("truncated model header: " + file.string());

    json header;
    try {
        header = json::parse(htext);
    } catch (const json::exception& e) {
        throw ValidationError("malformed model header: " + std::string(e.what()));
    }

    Model model;
    model.config = config_from_json(header.at("config"));
    for (const auto& entry : header.at("params")) {
        ParamEntry p;
        p.name = entry.at("name").get<std::string>();
        p.value.shape = entry.at("shape").get<std::vector<int64_t>>();
        p.value.v.resize(static_cast<size_t>(TensorData<float>(p.value.shape).size()));
        is.read(reinterpret_cast<char*>(p.value.v.data()),
                static_cast<std::streamsize>(p.value.v.size() * 4));
        if (!is) throw ValidationError("model blob shorter than manifest: " + file.string());
        model.params.push_back(std::move(p));
    }
    is.peek();
    if (!is.eof()) throw ValidationError("model blob longer than manifest: " + file.string());

    // Validate manifest shapes against a freshly built reference.
    RngStream rng(0);
    const Model reference = build_model(model.config, rng);
    if (reference.params.size() != model.params.size())
        throw ValidationError("model manifest does not match config (parameter count)");
    for (size_t i = 0; i < model.params.size(); ++i) {
        if (model.params[i].name != reference.params[i].name ||
            model.params[i].value.shape != reference.params[i].value.shape)
            throw ValidationError("model manifest does not match config at parameter '" +
                                  model.params[i].name + "'");
    }
    return model;
}

double msle_value(const std::vector<float>& estimate, const std::vector<float>& target) {
    if (estimate.size() != target.size()) throw ValidationError("msle_value: shape mismatch");
    if (estimate.empty()) throw ValidationError("msle_value: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < estimate.size(); ++i) {
        if (estimate[i] < 0.f || target[i] < 0.f)
            throw ValidationError("msle_value: negative input");
        const double d = std::log1p(double(estimate[i])) - std::log1p(double(target[i]));
        acc += d * d;
    }
    return acc / double(estimate.size());
}

double bce_logits_value(const std::vector<float>& logits, const std::vector<float>& labels) {
    if (logits.size() != labels.size()) throw ValidationError("bce_logits_value: shape mismatch");
    if (logits.empty()) throw ValidationError("bce_logits_value: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        const double z = logits[i], c = labels[i];
        acc += std::max(z, 0.0) - z * c + std::log1p(std::exp(-std::abs(z)));
    }
    return acc / double(logits.size());
}

}  // namespace grfkit::nn
