#pragma once

#include <filesystem>
#include <string>

#include "grfkit/autodiff.hpp"
#include "grfkit/grf.hpp"
#include "grfkit/types.hpp"

namespace grfkit::nn {

enum class Variant {
    vgrf,         // temporal conv trunk, softplus vGRF head ("Ours")
    contact,      // same trunk, contact-logit head ("Ours-C")
    dual,         // shared trunk, duplicated FC stacks for both heads ("Ours-C&F")
    mlp3,         // per-frame 3x128 MLP with ReLU on foot-joint features
    linear,       // per-frame affine map on all-joint positions+velocities
    linear_feet,  // per-frame affine map on foot-joint positions+velocities
};

std::string variant_name(Variant v);
Variant variant_from(const std::string& name);
bool variant_outputs_vgrf(Variant v);
bool variant_outputs_contacts(Variant v);

struct ModelConfig {
    Variant variant = Variant::vgrf;
    std::vector<int> conv_channels{128, 128, 256, 256};
    int kernel = 7;
    int fc_width = 256;
    int mlp_width = 128;
    double dropout_p = 0.2;
    int joints = kDefaultJoints;
    double width_scale = 1.0;

    int scaled(int width) const;
    int input_features() const;  // per-frame feature count for this variant
    void validate() const;
};

struct ParamEntry {
    std::string name;
    TensorData<float> value;
};

struct Model {
    ModelConfig config;
    std::vector<ParamEntry> params;

    int64_t parameter_count() const;
};

// Layer stack per config; scaled-uniform fan-in init (bound sqrt(6/fan_in)),
// zero biases.
Model build_model(const ModelConfig& cfg, RngStream& rng);

// Per-frame input features: conv variants take flattened positions [T, 3J];
// the learned baselines take positions plus central-difference velocities of
// either all joints or the four foot joints.
TensorData<float> assemble_features(const ModelConfig& cfg, const PoseSequence& poses,
                                    const FootJoints& foot_joints);

template <class S>
struct ForwardIds {
    int vgrf = -1;            // [T, 32], softplus-activated
    int contact_logits = -1;  // [T, 4]
};

// Builds the forward graph on the given tape. param_ids must follow
// Model::params order. training enables dropout (rng required).
template <class S>
ForwardIds<S> build_forward(Tape<S>& tape, const ModelConfig& cfg,
                            const std::vector<int>& param_ids, int input,
                            bool training = false, RngStream* dropout_rng = nullptr);

extern template ForwardIds<float> build_forward<float>(Tape<float>&, const ModelConfig&,
                                                       const std::vector<int>&, int, bool,
                                                       RngStream*);
extern template ForwardIds<double> build_forward<double>(Tape<double>&, const ModelConfig&,
                                                         const std::vector<int>&, int, bool,
                                                         RngStream*);

struct ModelOutput {
    std::optional<VgrfSequence> vgrf;
    std::vector<float> contact_logits;  // T*4 when present
    ContactSequence contacts_from_logits(float rate_hz) const;
};

// Deterministic eval-mode forward (parameters as constants, no dropout).
ModelOutput forward(const Model& model, const PoseSequence& poses,
                    const FootJoints& foot_joints);

// Eval-mode vGRF estimation with bounded memory: long sequences are processed
// in chunks with a receptive-field halo, which is exact because the trunk is
// local in time. vGRF variants only.
VgrfSequence estimate_vgrf(const Model& model, const PoseSequence& poses,
                           const FootJoints& foot_joints, int64_t chunk_frames = 4096);

// Contact labels from a vGRF estimate via the contact function.
ContactSequence derive_contacts(const VgrfSequence& estimate, const InsoleLayout& layout,
                                const grf::ContactParams& params);

// Single-file model format: magic "GRFM", little-endian u32 header length,
// JSON header (config + parameter manifest with shapes), then the raw
// little-endian float32 parameter blob in manifest order. Bit-exact round
// trips; the loader validates manifest shapes against the config.
void save_model(const Model& model, const std::filesystem::path& file);
Model load_model(const std::filesystem::path& file);

// Reference (host-side, f64) loss evaluations for reports and tests.
double msle_value(const std::vector<float>& estimate, const std::vector<float>& target);
double bce_logits_value(const std::vector<float>& logits, const std::vector<float>& labels);

}  // namespace grfkit::nn
