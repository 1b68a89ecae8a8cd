// grfkit command-line tool: synthetic data, synchronization, contact
// labeling, baseline fitting, training, estimation, evaluation, perturbation,
// and footskate cleanup, all exchanging take containers and .upm model files.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error. Logs go to stderr;
// data goes to files only. Partial outputs are deleted on failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "grfkit/augment.hpp"
#include "grfkit/baselines.hpp"
#include "grfkit/cleanup.hpp"
#include "grfkit/container.hpp"
#include "grfkit/grf.hpp"
#include "grfkit/kinematics.hpp"
#include "grfkit/metrics.hpp"
#include "grfkit/model.hpp"
#include "grfkit/perturb.hpp"
#include "grfkit/sync.hpp"
#include "grfkit/synth.hpp"
#include "grfkit/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace grfkit;

namespace {

// Tracks paths created by a command so failures leave no partial outputs.
class OutputGuard {
public:
    void track(const fs::path& p) { paths_.push_back(p); }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove_all(p, ec);
        }
    }

private:
    std::vector<fs::path> paths_;
    bool committed_ = false;
};

std::vector<Take> load_takes(const std::vector<std::string>& dirs) {
    std::vector<Take> takes;
    takes.reserve(dirs.size());
    for (const auto& d : dirs) takes.push_back(load_take(d));
    return takes;
}

std::vector<const Take*> pointers(const std::vector<Take>& takes) {
    std::vector<const Take*> out;
    out.reserve(takes.size());
    for (const auto& t : takes) out.push_back(&t);
    return out;
}

ContactSequence contacts_for_eval(const std::string& path, const Take& reference) {
    if (fs::is_directory(path)) {
        const Take take = load_take(path);
        if (!take.contacts) throw ValidationError("take has no contacts: " + path);
        return *take.contacts;
    }
    // Raw .u8 blob shaped against the reference take.
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) throw IoError("cannot open: " + path);
    const auto bytes = static_cast<size_t>(is.tellg());
    if (bytes != static_cast<size_t>(reference.poses.frames()) * 4)
        throw ValidationError("contacts blob size does not match the truth take");
    ContactSequence c;
    c.rate_hz = reference.poses.rate_hz;
    c.labels.resize(bytes);
    is.seekg(0);
    is.read(reinterpret_cast<char*>(c.labels.data()), bytes);
    return c;
}

VgrfSequence vgrf_for_eval(const std::string& path, const Take& reference) {
    if (fs::is_directory(path)) {
        const Take take = load_take(path);
        if (!take.vgrf) throw ValidationError("take has no vGRF: " + path);
        return *take.vgrf;
    }
    VgrfSequence v;
    v.rate_hz = reference.poses.rate_hz;
    v.values = read_f32(path);
    if (v.frames() != reference.poses.frames())
        throw ValidationError("vGRF blob frame count does not match the truth take");
    return v;
}

void write_csv(const fs::path& file, const std::vector<std::array<std::string, 3>>& rows) {
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw IoError("cannot write report: " + file.string());
    os << "metric,channel,value\n";
    for (const auto& r : rows) os << r[0] << "," << r[1] << "," << r[2] << "\n";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// ---------------------------------------------------------------------------

int cmd_synth(double minutes, double rate, std::uint64_t seed, bool jump_markers,
              const std::string& out) {
    synth::GaitConfig cfg = synth::randomized_config(minutes * 60.0, seed, jump_markers);
    cfg.rate_hz = rate;
    OutputGuard guard;
    guard.track(out);
    save_take(synth::generate_gait(cfg), out);
    guard.commit();
    std::cerr << "wrote synthetic take (" << cfg.duration_s << " s at " << rate << " Hz) to "
              << out << "\n";
    return 0;
}

int cmd_sync(const std::string& take_dir, double max_lag_s, const std::string& out) {
    const Take take = load_take(take_dir);
    double insole_rate = take.poses.rate_hz;
    if (take.pressure) insole_rate = take.pressure->rate_hz;
    else if (take.vgrf) insole_rate = take.vgrf->rate_hz;
    else if (take.imu_accel) insole_rate = take.imu_accel->rate_hz;

    PoseSequence poses = take.poses;
    if (poses.rate_hz != insole_rate) poses = kin::resample_poses(poses, insole_rate);
    const auto mocap = sync::mocap_vertical_accel(poses, take.skeleton);

    std::vector<double> insole;
    if (take.imu_accel) {
        insole = sync::insole_accel_signal(*take.imu_accel);
    } else if (take.vgrf) {
        const auto totals = grf::total_vgrf(*take.vgrf);
        insole.resize(take.vgrf->frames());
        for (int64_t t = 0; t < take.vgrf->frames(); ++t)
            insole[t] = totals[t * 2] + totals[t * 2 + 1];
    } else {
        throw ValidationError("sync: take has neither insole IMU nor vGRF data");
    }

    const auto offset = sync::estimate_offset(mocap, insole, insole_rate, max_lag_s);
    const auto windows = sync::detect_jump_windows(insole, insole_rate);
    std::cerr << "offset " << offset.offset << " samples (correlation "
              << offset.peak_correlation << (offset.confident ? "" : ", LOW CONFIDENCE")
              << "); trimming [" << windows.first.begin_s << ", " << windows.first.end_s
              << "] and [" << windows.second.begin_s << ", " << windows.second.end_s << "]\n";

    OutputGuard guard;
    guard.track(out);
    save_take(sync::align_and_trim(take, offset.offset, windows), out);
    guard.commit();
    return 0;
}

int cmd_label(const std::string& take_dir, const std::string& vgrf_file,
              const grf::ContactParams& params, const std::string& out) {
    Take take = load_take(take_dir);
    VgrfSequence source;
    if (!vgrf_file.empty()) {
        source = vgrf_for_eval(vgrf_file, take);
    } else if (take.vgrf) {
        source = *take.vgrf;
    } else if (take.pressure) {
        source = grf::pressure_to_vgrf(*take.pressure, take.layout, take.meta);
        take.vgrf = source;
    } else {
        throw ValidationError("label: take has neither vGRF nor pressure data");
    }
    take.contacts = grf::contact_labels(source, take.layout, params);
    OutputGuard guard;
    guard.track(out);
    save_take(take, out);
    guard.commit();
    return 0;
}

int cmd_ot_fit(const std::vector<std::string>& data, const std::string& out) {
    const auto takes = load_takes(data);
    const auto fit = ot::fit_ot(pointers(takes));
    if (fit.degenerate) std::cerr << "warning: no positive labels; degenerate thresholds\n";
    json j;
    j["height_m"] = fit.thresholds.height_m;
    j["speed_mps"] = fit.thresholds.speed_mps;
    j["train_f1"] = fit.f1;
    j["f1_per_level"] = fit.f1_per_level;
    OutputGuard guard;
    guard.track(out);
    std::ofstream os(out, std::ios::trunc);
    if (!os) throw IoError("cannot write thresholds: " + out);
    os << j.dump(2) << "\n";
    guard.commit();
    std::cerr << "fitted thresholds: height " << fit.thresholds.height_m << " m, speed "
              << fit.thresholds.speed_mps << " m/s (train F1 " << fit.f1 << ")\n";
    return 0;
}

int cmd_ot_apply(const std::string& take_dir, const std::string& thresholds_file,
                 const std::string& out) {
    Take take = load_take(take_dir);
    std::ifstream is(thresholds_file);
    if (!is) throw IoError("cannot open thresholds: " + thresholds_file);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed thresholds file: " + std::string(e.what()));
    }
    ot::OtThresholds thr;
    thr.height_m = j.at("height_m").get<double>();
    thr.speed_mps = j.at("speed_mps").get<double>();
    thr.ground_y = ot::estimate_ground_y(take.poses, take.skeleton);
    take.contacts = ot::apply_ot(take.poses, take.skeleton, thr);
    OutputGuard guard;
    guard.track(out);
    save_take(take, out);
    guard.commit();
    return 0;
}

struct TrainFlags {
    std::vector<std::string> data;
    std::string variant = "vgrf";
    double width_scale = 1.0;
    int epochs = 50;
    std::uint64_t seed = 0;
    double val_split = 0.1;
    std::string out;
    std::string history;
    double lr = 3e-5;
    int batch = 64;
    int window = 240;
    int stride = 60;
    int patience = 10;
    std::int64_t max_steps = -1;
    bool verbose = false;
};

int cmd_train(const TrainFlags& flags) {
    const auto takes = load_takes(flags.data);
    auto all = pointers(takes);

    // Hold out validation takes (never windows) deterministically by seed.
    std::vector<const Take*> train_set = all, val_set;
    if (flags.val_split > 0.0 && all.size() >= 2) {
        const size_t val_count = std::max<size_t>(
            1, static_cast<size_t>(std::floor(flags.val_split * all.size())));
        RngStream rng = RngStream::keyed(flags.seed, 0x5713, 1);
        for (size_t i = train_set.size(); i > 1; --i)
            std::swap(train_set[i - 1], train_set[rng.below(i)]);
        val_set.assign(train_set.end() - val_count, train_set.end());
        train_set.resize(train_set.size() - val_count);
    }

    augment::AugmentConfig acfg;
    acfg.window_frames = flags.window;
    acfg.window_stride = flags.stride;
    acfg.seed = flags.seed;
    const augment::WindowDataset train_data(train_set, acfg, true);
    std::optional<augment::WindowDataset> val_data;
    if (!val_set.empty()) val_data.emplace(val_set, acfg, false);
    if (train_data.skipped_takes() > 0)
        std::cerr << "warning: " << train_data.skipped_takes()
                  << " take(s) shorter than one window were skipped\n";

    nn::ModelConfig mcfg;
    mcfg.variant = nn::variant_from(flags.variant);
    mcfg.width_scale = flags.width_scale;
    RngStream init_rng = RngStream::keyed(flags.seed, 0x1417);
    nn::Model model = nn::build_model(mcfg, init_rng);
    std::cerr << "training " << flags.variant << " model (" << model.parameter_count()
              << " parameters) on " << train_data.size() << " windows\n";

    nn::OptimizerConfig opt;
    opt.learning_rate = flags.lr;
    opt.batch_size = flags.batch;
    nn::TrainConfig tcfg;
    tcfg.epochs = flags.epochs;
    tcfg.patience = flags.patience;
    tcfg.seed = flags.seed;
    tcfg.max_steps = flags.max_steps;
    tcfg.verbose = flags.verbose;

    nn::TrainHistory history;
    if (flags.epochs > 0)
        history = nn::train(model, train_data, val_data ? &*val_data : nullptr, opt, tcfg);

    OutputGuard guard;
    guard.track(flags.out);
    nn::save_model(model, flags.out);
    const std::string history_file =
        flags.history.empty() ? flags.out + ".history.csv" : flags.history;
    guard.track(history_file);
    nn::write_history_csv(history, history_file);
    guard.commit();
    std::cerr << "saved model to " << flags.out << " (best epoch " << history.best_epoch
              << ")\n";
    return 0;
}

int cmd_estimate(const std::string& model_file, const std::string& take_dir,
                 const std::string& out) {
    const nn::Model model = nn::load_model(model_file);
    const Take take = load_take(take_dir);
    const auto estimate = nn::estimate_vgrf(model, take.poses, take.skeleton.foot_joints);
    OutputGuard guard;
    guard.track(out);
    write_f32(out, estimate.values);
    guard.commit();
    return 0;
}

int cmd_eval_contacts(const std::string& pred, const std::string& truth, int tolerance_max,
                      int bins, const std::string& out) {
    const Take truth_take = load_take(truth);
    if (!truth_take.contacts) throw ValidationError("truth take has no contacts");
    const ContactSequence p = contacts_for_eval(pred, truth_take);
    const ContactSequence& t = *truth_take.contacts;

    const auto score = metrics::f1(p, t);
    std::vector<std::array<std::string, 3>> rows;
    rows.push_back({"f1", "all", fmt(score.f1)});
    rows.push_back({"precision", "all", fmt(score.precision)});
    rows.push_back({"recall", "all", fmt(score.recall)});
    if (tolerance_max > 0) {
        const auto curve = metrics::f1_tolerance_curve(p, t, tolerance_max);
        for (size_t k = 0; k < curve.size(); ++k)
            rows.push_back({"f1_tolerance", "k=" + std::to_string(k), fmt(curve[k])});
    }
    if (bins > 0) {
        const auto profile = metrics::offcontact_fp_profile(p, t, bins);
        for (size_t b = 0; b < profile.size(); ++b)
            rows.push_back({"offcontact_fp", "bin=" + std::to_string(b), fmt(profile[b])});
    }
    OutputGuard guard;
    guard.track(out);
    write_csv(out, rows);
    guard.commit();
    std::cerr << "F1 " << score.f1 << " precision " << score.precision << " recall "
              << score.recall << "\n";
    return 0;
}

int cmd_eval_vgrf(const std::string& pred, const std::string& truth, const std::string& out) {
    const Take truth_take = load_take(truth);
    if (!truth_take.vgrf) throw ValidationError("truth take has no vGRF");
    const VgrfSequence p = vgrf_for_eval(pred, truth_take);
    const auto rmse = metrics::vgrf_rmse(p, *truth_take.vgrf);
    OutputGuard guard;
    guard.track(out);
    write_csv(out, {{"vgrf_rmse_bw", "left", fmt(rmse[0])},
                    {"vgrf_rmse_bw", "right", fmt(rmse[1])}});
    guard.commit();
    std::cerr << "vGRF RMSE [BW]: left " << rmse[0] << " right " << rmse[1] << "\n";
    return 0;
}

int cmd_eval_cop(const std::string& pred, const std::string& truth, double gate_bw,
                 const std::string& out) {
    const Take truth_take = load_take(truth);
    if (!truth_take.vgrf) throw ValidationError("truth take has no vGRF");
    const VgrfSequence p = vgrf_for_eval(pred, truth_take);
    const auto mad = metrics::cop_mad(p, *truth_take.vgrf, truth_take.layout, gate_bw);
    OutputGuard guard;
    guard.track(out);
    write_csv(out, {{"cop_mad_mm", "left", fmt(mad[0])}, {"cop_mad_mm", "right", fmt(mad[1])}});
    guard.commit();
    std::cerr << "CoP MAD [mm]: left " << mad[0] << " right " << mad[1] << "\n";
    return 0;
}

int cmd_eval_footskate(const std::string& take_dir, const std::string& contacts_path,
                       const std::string& out) {
    const Take take = load_take(take_dir);
    ContactSequence contacts;
    if (!contacts_path.empty())
        contacts = contacts_for_eval(contacts_path, take);
    else if (take.contacts)
        contacts = *take.contacts;
    else
        throw ValidationError("footskate: no contacts given and take has none");
    const double skate = metrics::footskate(take.poses, contacts, take.skeleton);
    OutputGuard guard;
    guard.track(out);
    write_csv(out, {{"footskate_mps", "all", fmt(skate)}});
    guard.commit();
    std::cerr << "footskate " << skate << " m/s\n";
    return 0;
}

int cmd_perturb_noise(const std::string& take_dir, double sigma_m, std::uint64_t seed,
                      const std::string& out) {
    Take take = load_take(take_dir);
    RngStream rng = RngStream::keyed(seed, 0x401C);
    take.poses = perturb::add_noise(take.poses, sigma_m, rng);
    take.local_motion.reset();  // joint angles no longer match the poses
    OutputGuard guard;
    guard.track(out);
    save_take(take, out);
    guard.commit();
    return 0;
}

int cmd_perturb_blend(const std::vector<std::string>& data, int window, int count,
                      const std::string& out) {
    const auto takes = load_takes(data);
    auto pairs = perturb::mine_blend_pairs(pointers(takes), window);
    // Cross-take pairs first; they carry the footskate of interest.
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        return (a.take_a != a.take_b) > (b.take_a != b.take_b);
    });
    if (pairs.empty()) throw ValidationError("perturb blend: no matching window pairs found");

    OutputGuard guard;
    guard.track(out);
    fs::create_directories(out);
    const int n = std::min<int>(count, static_cast<int>(pairs.size()));
    for (int i = 0; i < n; ++i) {
        const auto& p = pairs[i];
        const Take& ta = takes[p.take_a];
        const Take& tb = takes[p.take_b];
        const auto wa = perturb::reroot_horizontal(
            augment::slice_motion(*ta.local_motion, p.start_a, window));
        const auto wb = perturb::reroot_horizontal(
            augment::slice_motion(*tb.local_motion, p.start_b, window));
        const auto mixed = perturb::blend(wa, wb, perturb::smoothstep_weights(window));

        Take blend_take;
        blend_take.skeleton = ta.skeleton;
        blend_take.meta = ta.meta;
        blend_take.layout = ta.layout;
        blend_take.local_motion = mixed;
        blend_take.poses = kin::forward_kinematics(ta.skeleton, mixed);
        blend_take.poses.rate_hz = ta.poses.rate_hz;
        // The matched foot's pattern is preserved by construction and serves
        // as ground truth; the other foot stays unlabeled.
        ContactSequence pattern;
        pattern.rate_hz = ta.poses.rate_hz;
        pattern.labels.assign(static_cast<size_t>(window) * 4, 0);
        for (int64_t t = 0; t < window; ++t)
            for (int loc = 0; loc < 2; ++loc)
                pattern.at(t, p.foot, loc) = ta.contacts->at(p.start_a + t, p.foot, loc);
        blend_take.contacts = pattern;
        blend_take.synchronized = true;

        char name[32];
        std::snprintf(name, sizeof name, "blend_%04d", i);
        save_take(blend_take, fs::path(out) / name);
    }
    guard.commit();
    std::cerr << "wrote " << n << " blended takes to " << out << "\n";
    return 0;
}

int cmd_cleanup(const std::string& model_file, const std::string& take_dir,
                const cleanup::IkWeights& weights, const std::string& out) {
    const nn::Model model = nn::load_model(model_file);
    Take take = load_take(take_dir);
    if (!take.local_motion) throw ValidationError("cleanup: take has no joint-angle motion");

    const auto result =
        cleanup::cleanup_pipeline(take, model, take.layout, grf::ContactParams{}, weights);

    Take fixed = take;
    fixed.local_motion = result.motion;
    fixed.poses = kin::forward_kinematics(take.skeleton, result.motion);
    fixed.poses.rate_hz = take.poses.rate_hz;

    OutputGuard guard;
    guard.track(out);
    save_take(fixed, out);
    json report;
    report["footskate_before_mps"] = result.report.footskate_before;
    report["footskate_after_mps"] = result.report.footskate_after;
    report["mean_joint_deviation_m"] = result.report.mean_joint_deviation_m;
    report["constraints"] = result.report.constraints;
    report["ik_iterations"] = result.report.ik.iterations;
    report["ik_initial_energy"] = result.report.ik.initial_energy;
    report["ik_final_energy"] = result.report.ik.final_energy;
    std::ofstream os(fs::path(out) / "cleanup_report.json", std::ios::trunc);
    if (!os) throw IoError("cannot write cleanup report");
    os << report.dump(2) << "\n";
    guard.commit();
    std::cerr << "footskate " << result.report.footskate_before << " -> "
              << result.report.footskate_after << " m/s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vertical ground reaction force and foot-contact toolkit"};
    app.require_subcommand(1);

    // synth
    double minutes = 1.0, rate = 100.0;
    std::uint64_t seed = 0;
    bool jump_markers = false;
    std::string out_dir, take_dir;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic gait take");
    synth_cmd->add_option("--minutes", minutes, "duration in minutes");
    synth_cmd->add_option("--rate", rate, "sample rate, Hz");
    synth_cmd->add_option("--seed", seed, "style seed");
    synth_cmd->add_flag("--jump-markers", jump_markers, "add sync jumps at both ends");
    synth_cmd->add_option("--out", out_dir, "output take directory")->required();

    // sync
    double max_lag_s = 3.0;
    auto* sync_cmd = app.add_subcommand("sync", "align insole data with motion capture");
    sync_cmd->add_option("--take", take_dir, "input take directory")->required();
    sync_cmd->add_option("--max-lag-s", max_lag_s, "maximum lag to search, seconds");
    sync_cmd->add_option("--out", out_dir, "output take directory")->required();

    // label
    grf::ContactParams params;
    std::string vgrf_file;
    auto* label_cmd = app.add_subcommand("label", "derive contact labels from vGRF");
    label_cmd->add_option("--take", take_dir, "input take directory")->required();
    label_cmd->add_option("--vgrf", vgrf_file, "optional vGRF .f32 blob overriding the take's");
    label_cmd->add_option("--sigma-s", params.smooth_sigma_s, "Gaussian smoothing std, s");
    label_cmd->add_option("--raw-bw", params.raw_threshold_bw, "per-location threshold, BW");
    label_cmd->add_option("--gate-bw", params.gate_threshold_bw, "per-foot total gate, BW");
    label_cmd->add_option("--min-phase-s", params.min_phase_s, "minimum contact phase, s");
    label_cmd->add_option("--out", out_dir, "output take directory")->required();

    // ot fit|apply
    std::vector<std::string> data_dirs;
    std::string thresholds_file, out_file;
    auto* ot_cmd = app.add_subcommand("ot", "height/velocity threshold baseline");
    ot_cmd->require_subcommand(1);
    auto* ot_fit = ot_cmd->add_subcommand("fit", "fit thresholds by recursive grid search");
    ot_fit->add_option("--data", data_dirs, "training take directories")->required();
    ot_fit->add_option("--out", out_file, "output thresholds.json")->required();
    auto* ot_apply = ot_cmd->add_subcommand("apply", "apply fitted thresholds");
    ot_apply->add_option("--take", take_dir, "input take directory")->required();
    ot_apply->add_option("--thresholds", thresholds_file, "thresholds.json")->required();
    ot_apply->add_option("--out", out_dir, "output take directory")->required();

    // train
    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "train an estimator variant");
    train_cmd->add_option("--data", train_flags.data, "training take directories")->required();
    train_cmd->add_option("--variant", train_flags.variant,
                          "vgrf|contact|dual|mlp3|linear|linear-feet");
    train_cmd->add_option("--width-scale", train_flags.width_scale, "uniform width multiplier");
    train_cmd->add_option("--epochs", train_flags.epochs, "maximum epochs");
    train_cmd->add_option("--seed", train_flags.seed, "training seed");
    train_cmd->add_option("--val-split", train_flags.val_split, "validation fraction, by take");
    train_cmd->add_option("--out", train_flags.out, "output model .upm")->required();
    train_cmd->add_option("--history", train_flags.history, "history CSV path");
    train_cmd->add_option("--lr", train_flags.lr, "Adam learning rate");
    train_cmd->add_option("--batch", train_flags.batch, "batch size");
    train_cmd->add_option("--window", train_flags.window, "window length, frames");
    train_cmd->add_option("--stride", train_flags.stride, "window stride, frames");
    train_cmd->add_option("--patience", train_flags.patience, "early-stopping patience");
    train_cmd->add_option("--max-steps", train_flags.max_steps, "hard cap on optimizer steps");
    train_cmd->add_flag("--verbose", train_flags.verbose, "per-epoch log line");

    // estimate
    std::string model_file;
    auto* estimate_cmd = app.add_subcommand("estimate", "estimate vGRF for a take");
    estimate_cmd->add_option("--model", model_file, "model .upm")->required();
    estimate_cmd->add_option("--take", take_dir, "input take directory")->required();
    estimate_cmd->add_option("--out", out_file, "output vgrf_hat.f32")->required();

    // eval
    std::string pred_path, truth_path;
    int tolerance_max = 0, bins = 0;
    double gate_bw = 0.10;
    std::string contacts_path;
    auto* eval_cmd = app.add_subcommand("eval", "evaluation metrics");
    eval_cmd->require_subcommand(1);
    auto* eval_contacts = eval_cmd->add_subcommand("contacts", "F1 and temporal variants");
    eval_contacts->add_option("--pred", pred_path, "take dir or contacts.u8")->required();
    eval_contacts->add_option("--truth", truth_path, "ground-truth take dir")->required();
    eval_contacts->add_option("--tolerance-max", tolerance_max,
                              "max temporal tolerance, frames");
    eval_contacts->add_option("--bins", bins, "off-contact profile bins");
    eval_contacts->add_option("--out", out_file, "report CSV")->required();
    auto* eval_vgrf = eval_cmd->add_subcommand("vgrf", "per-foot total RMSE");
    eval_vgrf->add_option("--pred", pred_path, "take dir or vgrf .f32")->required();
    eval_vgrf->add_option("--truth", truth_path, "ground-truth take dir")->required();
    eval_vgrf->add_option("--out", out_file, "report CSV")->required();
    auto* eval_cop = eval_cmd->add_subcommand("cop", "center-of-pressure MAD");
    eval_cop->add_option("--pred", pred_path, "take dir or vgrf .f32")->required();
    eval_cop->add_option("--truth", truth_path, "ground-truth take dir")->required();
    eval_cop->add_option("--gate-bw", gate_bw, "CoP validity gate, BW");
    eval_cop->add_option("--out", out_file, "report CSV")->required();
    auto* eval_footskate = eval_cmd->add_subcommand("footskate", "mean contact-phase slide");
    eval_footskate->add_option("--take", take_dir, "take directory")->required();
    eval_footskate->add_option("--contacts", contacts_path, "contacts override (dir or .u8)");
    eval_footskate->add_option("--out", out_file, "report CSV")->required();

    // perturb
    double sigma_m = 0.0;
    int window = 80, count = 50;
    auto* perturb_cmd = app.add_subcommand("perturb", "robustness experiment inputs");
    perturb_cmd->require_subcommand(1);
    auto* perturb_noise = perturb_cmd->add_subcommand("noise", "Gaussian joint-position noise");
    perturb_noise->add_option("--take", take_dir, "input take directory")->required();
    perturb_noise->add_option("--sigma-m", sigma_m, "noise std, meters")->required();
    perturb_noise->add_option("--seed", seed, "noise seed");
    perturb_noise->add_option("--out", out_dir, "output take directory")->required();
    auto* perturb_blend = perturb_cmd->add_subcommand("blend", "contact-preserving blends");
    perturb_blend->add_option("--data", data_dirs, "take directories to mine")->required();
    perturb_blend->add_option("--window", window, "window length, frames");
    perturb_blend->add_option("--count", count, "number of blends to write");
    perturb_blend->add_option("--out", out_dir, "output directory of blend takes")->required();

    // cleanup
    cleanup::IkWeights weights;
    auto* cleanup_cmd = app.add_subcommand("cleanup", "GRF-consistent footskate removal");
    cleanup_cmd->add_option("--model", model_file, "vGRF model .upm")->required();
    cleanup_cmd->add_option("--take", take_dir, "input take directory")->required();
    cleanup_cmd->add_option("--w-constraint", weights.w_constraint, "constraint weight");
    cleanup_cmd->add_option("--w-pose", weights.w_pose, "pose preservation weight");
    cleanup_cmd->add_option("--w-smooth", weights.w_smooth, "smoothness weight");
    cleanup_cmd->add_option("--iters", weights.iterations, "IK iteration budget");
    cleanup_cmd->add_option("--step", weights.step_size, "IK step size");
    cleanup_cmd->add_option("--out", out_dir, "output take directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return cmd_synth(minutes, rate, seed, jump_markers, out_dir);
        if (sync_cmd->parsed()) return cmd_sync(take_dir, max_lag_s, out_dir);
        if (label_cmd->parsed()) return cmd_label(take_dir, vgrf_file, params, out_dir);
        if (ot_fit->parsed()) return cmd_ot_fit(data_dirs, out_file);
        if (ot_apply->parsed()) return cmd_ot_apply(take_dir, thresholds_file, out_dir);
        if (train_cmd->parsed()) return cmd_train(train_flags);
        if (estimate_cmd->parsed()) return cmd_estimate(model_file, take_dir, out_file);
        if (eval_contacts->parsed())
            return cmd_eval_contacts(pred_path, truth_path, tolerance_max, bins, out_file);
        if (eval_vgrf->parsed()) return cmd_eval_vgrf(pred_path, truth_path, out_file);
        if (eval_cop->parsed()) return cmd_eval_cop(pred_path, truth_path, gate_bw, out_file);
        if (eval_footskate->parsed())
            return cmd_eval_footskate(take_dir, contacts_path, out_file);
        if (perturb_noise->parsed()) return cmd_perturb_noise(take_dir, sigma_m, seed, out_dir);
        if (perturb_blend->parsed()) return cmd_perturb_blend(data_dirs, window, count, out_dir);
        if (cleanup_cmd->parsed()) return cmd_cleanup(model_file, take_dir, weights, out_dir);
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const nn::TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
