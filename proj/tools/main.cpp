// Command-line workbench: dataset generation, training, attacks, defenses,
// metric evaluation and quality sweeps, with a reproducibility manifest per
// run. Exit codes: 0 success, 2 usage/parameter error, 1 runtime failure.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "semjpeg/attacks/attacks.hpp"
#include "semjpeg/defense.hpp"
#include "semjpeg/eval/dataset.hpp"
#include "semjpeg/eval/harness.hpp"
#include "semjpeg/eval/metrics.hpp"
#include "semjpeg/image.hpp"
#include "semjpeg/jpeg/codec.hpp"
#include "semjpeg/nn/model.hpp"
#include "semjpeg/saliency.hpp"
#include "semjpeg/util/errors.hpp"
#include "semjpeg/util/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semjpeg;

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot write " + path);
    out << content;
}

void write_stream(const std::string& path, const jpeg::JpegBitstream& stream) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(stream.bytes.data()),
              static_cast<std::streamsize>(stream.bytes.size()));
}

jpeg::JpegBitstream read_stream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open " + path);
    jpeg::JpegBitstream stream;
    stream.bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return stream;
}

// Stable digest of a dataset directory: hash of the per-file hashes in
// labels.csv order.
std::string dataset_digest(const std::string& dir) {
    std::string acc = sha256_file_hex((fs::path(dir) / "labels.csv").string());
    std::ifstream labels(fs::path(dir) / "labels.csv");
    std::string line;
    std::getline(labels, line);
    while (std::getline(labels, line)) {
        if (line.empty()) continue;
        const size_t c1 = line.find(',');
        const size_t c2 = line.find(',', c1 + 1);
        acc += sha256_file_hex((fs::path(dir) / "images" / line.substr(0, c1)).string());
        acc += sha256_file_hex((fs::path(dir) / "masks" / line.substr(c1 + 1, c2 - c1 - 1)).string());
    }
    return sha256_hex(reinterpret_cast<const std::uint8_t*>(acc.data()), acc.size());
}

// Manifest: the merged run configuration plus content hashes of every
// artifact the command produced. Worker count is execution detail, not
// configuration, so it is deliberately absent.
void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    const json& outputs) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["outputs"] = outputs;
    fs::create_directories(dir);
    write_text((fs::path(dir) / (command + ".manifest.json")).string(), manifest.dump(2) + "\n");
}

std::vector<int> parse_quality_grid(const std::string& spec) {
    // "5..100:5" or "10,30,50"
    std::vector<int> out;
    if (spec.find("..") != std::string::npos) {
        const size_t dots = spec.find("..");
        const size_t colon = spec.find(':', dots);
        const int lo = std::stoi(spec.substr(0, dots));
        const int hi = std::stoi(spec.substr(dots + 2, colon - dots - 2));
        const int step = colon == std::string::npos ? 1 : std::stoi(spec.substr(colon + 1));
        if (step <= 0 || lo > hi) throw ParameterError("bad quality grid: " + spec);
        for (int q = lo; q <= hi; q += step) out.push_back(q);
    } else {
        size_t pos = 0;
        while (pos < spec.size()) {
            const size_t comma = spec.find(',', pos);
            out.push_back(std::stoi(spec.substr(pos, comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (out.empty()) throw ParameterError("empty quality grid: " + spec);
    for (int q : out)
        if (q < 1 || q > 100) throw ParameterError("quality grid value outside [1,100]");
    return out;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        const size_t comma = s.find(',', pos);
        out.push_back(s.substr(pos, comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

struct CommonOptions {
    int workers = 0;
    std::string out_dir = "out";
};

void apply_workers(int workers) {
    if (workers > 0) omp_set_num_threads(workers);
}

json attack_result_to_json(const attacks::AttackResult& r) {
    json j;
    j["original_class"] = r.original_class;
    j["adversarial_class"] = r.adversarial_class;
    if (r.target_class >= 0) j["target_class"] = r.target_class;
    j["success"] = r.success;
    j["iterations"] = r.iterations;
    j["linf"] = r.linf;
    j["l2"] = r.l2;
    j["rmse"] = r.rmse;
    return j;
}

int run_gen_data(int train_n, int val_n, int test_n, std::uint64_t seed,
                 const std::string& out_dir) {
    Rng master(seed);
    const std::uint64_t train_seed = master.fork_seed();
    const std::uint64_t val_seed = master.fork_seed();
    const std::uint64_t test_seed = master.fork_seed();

    json outputs;
    auto emit = [&](const char* name, int count, std::uint64_t split_seed) {
        if (count <= 0) return;
        const std::string dir = (fs::path(out_dir) / name).string();
        eval::save_dataset(eval::generate_dataset(count, split_seed), dir);
        outputs[name] = dataset_digest(dir);
        std::cout << "wrote " << count << " images to " << dir << "\n";
    };
    emit("train", train_n, train_seed);
    emit("val", val_n, val_seed);
    emit("test", test_n, test_seed);

    json config{{"seed", seed}, {"train", train_n}, {"val", val_n}, {"test", test_n}};
    write_manifest(out_dir, "gen-data", config, outputs);
    return 0;
}

int run_train(const std::string& data_dir, const std::string& model_path, int epochs, int batch,
              double lr, double momentum, std::uint64_t seed, const std::string& out_dir) {
    const eval::SyntheticDataset train_set =
        eval::load_dataset((fs::path(data_dir) / "train").string());
    nn::ClassifierModel model = nn::ClassifierModel::create(eval::kDatasetClasses, seed);

    nn::TrainOptions options;
    options.epochs = epochs;
    options.batch_size = batch;
    options.learning_rate = lr;
    options.momentum = momentum;
    options.seed = seed;
    const nn::TrainStats stats = nn::train(model, train_set.images, train_set.labels, options);

    // calibrate the saliency threshold on clean validation images
    double val_accuracy = -1.0;
    const std::string val_dir = (fs::path(data_dir) / "val").string();
    if (fs::exists(fs::path(val_dir) / "labels.csv")) {
        const eval::SyntheticDataset val_set = eval::load_dataset(val_dir);
        model.saliency_threshold = saliency::calibrate_threshold(model, val_set.images);
        int correct = 0;
        for (size_t i = 0; i < val_set.size(); ++i)
            if (nn::predict_top1(model, val_set.images[i]) == val_set.labels[i]) ++correct;
        val_accuracy = 100.0 * correct / static_cast<double>(val_set.size());
    }

    fs::create_directories(fs::path(model_path).parent_path().empty()
                               ? "."
                               : fs::path(model_path).parent_path().string());
    nn::save_checkpoint(model, model_path);

    std::cout << "train accuracy " << stats.final_train_accuracy << "%";
    if (val_accuracy >= 0) std::cout << ", val accuracy " << val_accuracy << "%";
    std::cout << ", threshold " << model.saliency_threshold << "\n";

    json config{{"seed", seed},       {"epochs", epochs},     {"batch", batch},
                {"lr", lr},           {"momentum", momentum}, {"data", data_dir},
                {"model", model_path}};
    json outputs;
    outputs["model"] = sha256_file_hex(model_path);
    write_manifest(out_dir, "train", config, outputs);
    return 0;
}

int run_attack_cmd(const std::string& model_path, const std::string& in_path,
                   const std::string& attack_name, double eps, double alpha, int iters,
                   int target, double rmse_target, std::uint64_t seed,
                   const std::string& out_path, const std::string& meta_path,
                   const std::string& out_dir) {
    const nn::ClassifierModel model = nn::load_checkpoint(model_path);
    const ImageTensor x = read_pnm(in_path);
    const attacks::AttackKind kind = attacks::attack_kind_from_name(attack_name);

    attacks::AttackConfig cfg;
    cfg.epsilon = eps;
    cfg.alpha = alpha;
    cfg.max_iterations = iters;
    cfg.seed = seed;

    attacks::AttackResult result;
    if (target >= 0) {
        if (kind == attacks::AttackKind::Jsma) result = attacks::jsma(model, x, target, cfg);
        else if (kind == attacks::AttackKind::Lbfgs)
            result = attacks::lbfgs_attack(model, x, target, cfg);
        else
            throw ParameterError("targeted mode is only available for jsma and lbfgs");
    } else {
        if (rmse_target > 0.0)
            cfg = attacks::calibrate_to_rmse(kind, model, x, rmse_target, cfg);
        result = attacks::run_attack(kind, model, x, cfg);
    }

    write_pnm(result.adversarial, out_path);
    json meta = attack_result_to_json(result);
    meta["attack"] = attack_name;
    meta["epsilon"] = cfg.epsilon;
    meta["alpha"] = cfg.alpha;
    meta["iterations_budget"] = cfg.max_iterations;
    meta["seed"] = seed;
    if (rmse_target > 0.0) meta["rmse_target"] = rmse_target;
    if (!meta_path.empty()) write_text(meta_path, meta.dump(2) + "\n");

    std::cout << attack_name << ": " << result.original_class << " -> "
              << result.adversarial_class << (result.success ? " (success)" : " (failed)")
              << ", rmse " << result.rmse << "\n";

    json config{{"attack", attack_name}, {"model", model_path}, {"in", in_path},
                {"eps", eps},            {"alpha", alpha},      {"iters", iters},
                {"target", target},      {"rmse", rmse_target}, {"seed", seed}};
    json outputs;
    outputs["adversarial"] = sha256_file_hex(out_path);
    if (!meta_path.empty()) outputs["meta"] = sha256_file_hex(meta_path);
    write_manifest(out_dir, "attack", config, outputs);
    return 0;
}

int run_defend_cmd(const std::string& method_name, const std::string& model_path,
                   const std::string& in_path, const std::string& out_path,
                   const std::string& map_path, int quality, int q_min, int q_max, int passes,
                   double input_amp, double act_amp, double threshold, std::uint64_t seed,
                   const std::string& out_dir) {
    const defense::Method method = defense::method_from_name(method_name);
    const ImageTensor x = read_pnm(in_path);

    defense::DefenseConfig config;
    config.method = method;
    config.quality = quality;
    config.q_min = q_min;
    config.q_max = q_max;
    config.aug.passes = passes;
    config.aug.input_amp = input_amp;
    config.aug.act_amp = act_amp;
    config.aug.seed = seed;

    nn::ClassifierModel model;
    if (method != defense::Method::PlainJpeg) {
        if (model_path.empty())
            throw ParameterError("defend: --model is required for saliency-guided methods");
        model = nn::load_checkpoint(model_path);
        config.aug.threshold = threshold >= 0.0 ? threshold : model.saliency_threshold;
    }

    const defense::DefenseOutcome outcome = defense::defend(model, x, config);
    write_stream(out_path, outcome.stream);
    if (!map_path.empty() && method != defense::Method::PlainJpeg)
        saliency::write_pgm(outcome.map, map_path);

    std::cout << method_name << ": wrote " << outcome.stream.bytes.size() << " bytes to "
              << out_path << "\n";

    json config_json{{"method", method_name}, {"in", in_path},   {"quality", quality},
                     {"qmin", q_min},         {"qmax", q_max},   {"passes", passes},
                     {"input_amp", input_amp}, {"act_amp", act_amp},
                     {"threshold", threshold}, {"seed", seed},   {"model", model_path}};
    json outputs;
    outputs["jpeg"] = sha256_file_hex(out_path);
    if (!map_path.empty() && method != defense::Method::PlainJpeg)
        outputs["map"] = sha256_file_hex(map_path);
    write_manifest(out_dir, "defend", config_json, outputs);
    return 0;
}

int run_encode(const std::string& in_path, const std::string& out_path, int quality,
               const std::string& map_path, int q_min, int q_max, const std::string& out_dir) {
    const ImageTensor img = read_pnm(in_path);
    jpeg::JpegBitstream stream;
    if (map_path.empty()) {
        stream = jpeg::encode_baseline(img, quality);
    } else {
        // external heat map drives per-block quality
        const saliency::SaliencyMap map = saliency::read_pgm(map_path);
        if (map.h != img.h || map.w != img.w)
            throw ParameterError("encode: map dimensions do not match the image");
        const jpeg::BlockQualityGrid grid = saliency::map_to_block_qualities(map, q_min, q_max);
        stream = jpeg::adaptive_requantize(img, grid, quality);
    }
    write_stream(out_path, stream);
    std::cout << "wrote " << stream.bytes.size() << " bytes to " << out_path << "\n";

    json config{{"in", in_path},  {"quality", quality}, {"map", map_path},
                {"qmin", q_min},  {"qmax", q_max}};
    json outputs{{"jpeg", sha256_file_hex(out_path)}};
    write_manifest(out_dir, "encode", config, outputs);
    return 0;
}

int run_decode(const std::string& in_path, const std::string& out_path,
               const std::string& out_dir) {
    const ImageTensor img = jpeg::decode_baseline(read_stream(in_path));
    write_pnm(img, out_path);
    std::cout << "decoded " << img.w << "x" << img.h << "x" << img.c << " to " << out_path << "\n";
    json config{{"in", in_path}};
    json outputs{{"image", sha256_file_hex(out_path)}};
    write_manifest(out_dir, "decode", config, outputs);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial-attack workbench around an adaptive JPEG encoder"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a config file");

    CommonOptions common;
    app.add_option("--workers", common.workers, "OpenMP worker count (0 = library default)")
        ->capture_default_str();

    const char* env_out = std::getenv("SEMJPEG_OUT_DIR");
    if (env_out != nullptr) common.out_dir = env_out;

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate the synthetic shapes dataset");
    int gen_train = 2000, gen_val = 300, gen_test = 300;
    std::uint64_t gen_seed = 42;
    std::string gen_out = common.out_dir + "/data";
    gen->add_option("--train", gen_train, "training image count")->capture_default_str();
    gen->add_option("--val", gen_val, "validation image count")->capture_default_str();
    gen->add_option("--test", gen_test, "test image count")->capture_default_str();
    gen->add_option("--seed", gen_seed, "generation seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output dataset directory")->capture_default_str();

    // train
    auto* tr = app.add_subcommand("train", "train the toy classifier");
    std::string tr_data = common.out_dir + "/data", tr_model = common.out_dir + "/model.sjc";
    int tr_epochs = 12, tr_batch = 16;
    double tr_lr = 0.08, tr_momentum = 0.9;
    std::uint64_t tr_seed = 42;
    tr->add_option("--data", tr_data, "dataset directory (expects train/ and val/)")
        ->capture_default_str();
    tr->add_option("--out", tr_model, "checkpoint output path")->capture_default_str();
    tr->add_option("--epochs", tr_epochs)->capture_default_str();
    tr->add_option("--batch", tr_batch)->capture_default_str();
    tr->add_option("--lr", tr_lr)->capture_default_str();
    tr->add_option("--momentum", tr_momentum)->capture_default_str();
    tr->add_option("--seed", tr_seed)->capture_default_str();

    // attack
    auto* at = app.add_subcommand("attack", "craft an adversarial image");
    std::string at_model = common.out_dir + "/model.sjc", at_in, at_attack = "igsm";
    std::string at_out = common.out_dir + "/adv.ppm", at_meta;
    double at_eps = 0.02, at_alpha = 0.0025, at_rmse = 0.0;
    int at_iters = 20, at_target = -1;
    std::uint64_t at_seed = 0;
    at->add_option("--model", at_model)->capture_default_str();
    at->add_option("--in", at_in, "input PPM/PGM image")->required();
    at->add_option("--attack", at_attack, "fgsm|igsm|ga|deepfool|jsma|lbfgs")
        ->capture_default_str();
    at->add_option("--eps", at_eps)->capture_default_str();
    at->add_option("--alpha", at_alpha)->capture_default_str();
    at->add_option("--iters", at_iters)->capture_default_str();
    at->add_option("--target", at_target, "target class (jsma/lbfgs only)")
        ->capture_default_str();
    at->add_option("--rmse", at_rmse, "calibrate perturbation to this RMSE")
        ->capture_default_str();
    at->add_option("--seed", at_seed)->capture_default_str();
    at->add_option("--out", at_out, "adversarial image output")->capture_default_str();
    at->add_option("--meta", at_meta, "attack metadata JSON output");

    // defend
    auto* de = app.add_subcommand("defend", "re-encode an image through a defense pipeline");
    std::string de_method = "aug-msroi", de_model, de_in, de_out = common.out_dir + "/defended.jpg";
    std::string de_map;
    int de_quality = 90, de_qmin = 20, de_qmax = 90, de_passes = 5;
    double de_input_amp = 0.02, de_act_amp = 0.05, de_threshold = -1.0;
    std::uint64_t de_seed = 0;
    de->add_option("--method", de_method, "jpeg|msroi|aug-msroi")->capture_default_str();
    de->add_option("--model", de_model, "classifier checkpoint (saliency methods)");
    de->add_option("--quality", de_quality, "uniform / global requantization quality")
        ->capture_default_str();
    de->add_option("--qmin", de_qmin)->capture_default_str();
    de->add_option("--qmax", de_qmax)->capture_default_str();
    de->add_option("--passes", de_passes, "jittered passes (aug-msroi)")->capture_default_str();
    de->add_option("--input-amp", de_input_amp)->capture_default_str();
    de->add_option("--act-amp", de_act_amp)->capture_default_str();
    de->add_option("--threshold", de_threshold, "saliency threshold (-1: use checkpoint)")
        ->capture_default_str();
    de->add_option("--seed", de_seed)->capture_default_str();
    de->add_option("--in", de_in, "input PPM/PGM image")->required();
    de->add_option("--out", de_out, "output JPEG path")->capture_default_str();
    de->add_option("--map", de_map, "write the saliency map as PGM");

    // encode / decode
    auto* en = app.add_subcommand("encode", "baseline or map-driven adaptive JPEG encode");
    std::string en_in, en_out = common.out_dir + "/out.jpg", en_map;
    int en_quality = 85, en_qmin = 20, en_qmax = 85;
    en->add_option("--in", en_in)->required();
    en->add_option("--quality", en_quality)->capture_default_str();
    en->add_option("--map", en_map, "PGM heat map driving per-block quality");
    en->add_option("--qmin", en_qmin)->capture_default_str();
    en->add_option("--qmax", en_qmax)->capture_default_str();
    en->add_option("--out", en_out)->capture_default_str();

    auto* dec = app.add_subcommand("decode", "decode a baseline JPEG to PPM/PGM");
    std::string dec_in, dec_out = common.out_dir + "/out.ppm";
    dec->add_option("--in", dec_in)->required();
    dec->add_option("--out", dec_out)->capture_default_str();

    // eval
    auto* ev = app.add_subcommand("eval", "attack + defend + score a dataset");
    std::string ev_model = common.out_dir + "/model.sjc", ev_data = common.out_dir + "/data/test";
    std::string ev_attacks = "igsm", ev_methods = "jpeg,msroi,aug-msroi";
    std::string ev_out = common.out_dir + "/eval";
    double ev_rmse = 0.02;
    int ev_quality = 90, ev_qmin = 20, ev_qmax = 90, ev_jpeg_quality = 0, ev_limit = 0;
    std::uint64_t ev_seed = 0;
    ev->add_option("--model", ev_model)->capture_default_str();
    ev->add_option("--data", ev_data, "test dataset directory")->capture_default_str();
    ev->add_option("--attacks", ev_attacks, "comma list of attacks")->capture_default_str();
    ev->add_option("--methods", ev_methods, "comma list of defenses")->capture_default_str();
    ev->add_option("--rmse", ev_rmse, "per-image attack calibration target (0 = off)")
        ->capture_default_str();
    ev->add_option("--quality", ev_quality, "global quality for adaptive methods")
        ->capture_default_str();
    ev->add_option("--jpeg-quality", ev_jpeg_quality,
                   "uniform quality for the plain JPEG method (0 = same as --quality)")
        ->capture_default_str();
    ev->add_option("--qmin", ev_qmin)->capture_default_str();
    ev->add_option("--qmax", ev_qmax)->capture_default_str();
    ev->add_option("--limit", ev_limit, "evaluate only the first N images (0 = all)")
        ->capture_default_str();
    ev->add_option("--seed", ev_seed)->capture_default_str();
    ev->add_option("--out", ev_out, "output directory")->capture_default_str();

    // sweep
    auto* sw = app.add_subcommand("sweep", "accuracy-vs-quality curve");
    std::string sw_model = common.out_dir + "/model.sjc", sw_data = common.out_dir + "/data/test";
    std::string sw_attack = "igsm", sw_method = "jpeg", sw_grid = "5..100:5";
    std::string sw_out = common.out_dir + "/sweep";
    double sw_rmse = 0.02;
    int sw_limit = 0, sw_qmin = 20;
    std::uint64_t sw_seed = 0;
    sw->add_option("--model", sw_model)->capture_default_str();
    sw->add_option("--data", sw_data)->capture_default_str();
    sw->add_option("--attack", sw_attack)->capture_default_str();
    sw->add_option("--method", sw_method)->capture_default_str();
    sw->add_option("--q", sw_grid, "quality grid, lo..hi:step or comma list")
        ->capture_default_str();
    sw->add_option("--rmse", sw_rmse)->capture_default_str();
    sw->add_option("--qmin", sw_qmin)->capture_default_str();
    sw->add_option("--limit", sw_limit)->capture_default_str();
    sw->add_option("--seed", sw_seed)->capture_default_str();
    sw->add_option("--out", sw_out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_workers(common.workers);

        if (gen->parsed())
            return run_gen_data(gen_train, gen_val, gen_test, gen_seed, gen_out);
        if (tr->parsed())
            return run_train(tr_data, tr_model, tr_epochs, tr_batch, tr_lr, tr_momentum, tr_seed,
                             common.out_dir);
        if (at->parsed())
            return run_attack_cmd(at_model, at_in, at_attack, at_eps, at_alpha, at_iters,
                                  at_target, at_rmse, at_seed, at_out, at_meta, common.out_dir);
        if (de->parsed())
            return run_defend_cmd(de_method, de_model, de_in, de_out, de_map, de_quality, de_qmin,
                                  de_qmax, de_passes, de_input_amp, de_act_amp, de_threshold,
                                  de_seed, common.out_dir);
        if (en->parsed())
            return run_encode(en_in, en_out, en_quality, en_map, en_qmin, en_qmax, common.out_dir);
        if (dec->parsed()) return run_decode(dec_in, dec_out, common.out_dir);

        if (ev->parsed()) {
            const nn::ClassifierModel model = nn::load_checkpoint(ev_model);
            eval::SyntheticDataset dataset = eval::load_dataset(ev_data);
            if (ev_limit > 0 && static_cast<size_t>(ev_limit) < dataset.size()) {
                dataset.images.resize(static_cast<size_t>(ev_limit));
                dataset.labels.resize(static_cast<size_t>(ev_limit));
                dataset.masks.resize(static_cast<size_t>(ev_limit));
            }

            std::vector<eval::EvalAggregate> table;
            json outputs;
            fs::create_directories(ev_out);
            for (const std::string& attack_str : split_csv(ev_attacks)) {
                const attacks::AttackKind kind = attacks::attack_kind_from_name(attack_str);
                attacks::AttackConfig base;
                base.seed = ev_seed;
                const auto attacked = eval::attack_dataset(model, dataset, kind, ev_rmse, base);
                for (const std::string& method_str : split_csv(ev_methods)) {
                    defense::DefenseConfig config;
                    config.method = defense::method_from_name(method_str);
                    config.quality = config.method == defense::Method::PlainJpeg &&
                                             ev_jpeg_quality > 0
                                         ? ev_jpeg_quality
                                         : ev_quality;
                    config.q_min = ev_qmin;
                    config.q_max = ev_qmax;
                    config.aug.seed = ev_seed;
                    config.aug.threshold = model.saliency_threshold;
                    const auto records = eval::evaluate_method(model, dataset, attacked, config);
                    table.push_back(eval::aggregate(records, attack_str, method_str));
                    const std::string csv_name = "records_" + attack_str + "_" + method_str + ".csv";
                    write_text((fs::path(ev_out) / csv_name).string(),
                               eval::records_to_csv(records));
                    outputs[csv_name] = sha256_file_hex((fs::path(ev_out) / csv_name).string());
                    std::cout << attack_str << " + " << method_str << ": accuracy "
                              << table.back().accuracy << "%, recovery "
                              << table.back().recovery_rate << "%\n";
                }
            }
            write_text((fs::path(ev_out) / "summary.json").string(),
                       eval::aggregates_to_json(table));
            outputs["summary.json"] = sha256_file_hex((fs::path(ev_out) / "summary.json").string());

            json config{{"model", ev_model},     {"data", ev_data},   {"attacks", ev_attacks},
                        {"methods", ev_methods}, {"rmse", ev_rmse},   {"quality", ev_quality},
                        {"jpeg_quality", ev_jpeg_quality},            {"qmin", ev_qmin},
                        {"qmax", ev_qmax},       {"limit", ev_limit}, {"seed", ev_seed}};
            write_manifest(ev_out, "eval", config, outputs);
            return 0;
        }

        if (sw->parsed()) {
            const nn::ClassifierModel model = nn::load_checkpoint(sw_model);
            eval::SyntheticDataset dataset = eval::load_dataset(sw_data);
            if (sw_limit > 0 && static_cast<size_t>(sw_limit) < dataset.size()) {
                dataset.images.resize(static_cast<size_t>(sw_limit));
                dataset.labels.resize(static_cast<size_t>(sw_limit));
                dataset.masks.resize(static_cast<size_t>(sw_limit));
            }
            const attacks::AttackKind kind = attacks::attack_kind_from_name(sw_attack);
            attacks::AttackConfig base;
            base.seed = sw_seed;
            const auto attacked = eval::attack_dataset(model, dataset, kind, sw_rmse, base);

            defense::DefenseConfig config;
            config.method = defense::method_from_name(sw_method);
            config.q_min = sw_qmin;
            config.aug.seed = sw_seed;
            config.aug.threshold = model.saliency_threshold;
            const std::vector<int> grid = parse_quality_grid(sw_grid);
            const auto curve = eval::accuracy_sweep(model, dataset, attacked, config, grid);

            fs::create_directories(sw_out);
            write_text((fs::path(sw_out) / "curve.csv").string(), eval::sweep_to_csv(curve));
            for (const auto& p : curve)
                std::cout << "Q=" << p.quality << " accuracy " << p.accuracy << "%\n";

            json config_json{{"model", sw_model},   {"data", sw_data}, {"attack", sw_attack},
                             {"method", sw_method}, {"q", sw_grid},    {"rmse", sw_rmse},
                             {"qmin", sw_qmin},     {"limit", sw_limit}, {"seed", sw_seed}};
            json outputs{{"curve.csv",
                          sha256_file_hex((fs::path(sw_out) / "curve.csv").string())}};
            write_manifest(sw_out, "sweep", config_json, outputs);
            return 0;
        }
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
