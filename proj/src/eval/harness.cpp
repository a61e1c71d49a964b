#include "semjpeg/eval/harness.hpp"

#include <cmath>
#include <cstdio>

#include "semjpeg/eval/metrics.hpp"
#include "semjpeg/util/errors.hpp"

namespace semjpeg::eval {

std::vector<attacks::AttackResult> attack_dataset(const nn::ClassifierModel& model,
                                                  const SyntheticDataset& dataset,
                                                  attacks::AttackKind kind, double rmse_target,
                                                  const attacks::AttackConfig& base) {
    if (dataset.size() == 0) throw ParameterError("attack_dataset: empty dataset");
    std::vector<attacks::AttackResult> results(dataset.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(dataset.size()); ++i) {
        const ImageTensor& x = dataset.images[static_cast<size_t>(i)];
        attacks::AttackConfig cfg = base;
        if (rmse_target > 0.0) {
            try {
                cfg = attacks::calibrate_to_rmse(kind, model, x, rmse_target, base);
            } catch (const CalibrationError&) {
                // keep the base config; the attack result records whatever happens
            }
        }
        results[static_cast<size_t>(i)] = attacks::run_attack(kind, model, x, cfg);
    }
    return results;
}

std::vector<EvalRecord> evaluate_method(const nn::ClassifierModel& model,
                                        const SyntheticDataset& dataset,
                                        const std::vector<attacks::AttackResult>& attacked,
                                        const defense::DefenseConfig& config) {
    if (dataset.size() != attacked.size())
        throw ParameterError("evaluate_method: dataset/attack size mismatch");
    std::vector<EvalRecord> records(dataset.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(dataset.size()); ++i) {
        const size_t idx = static_cast<size_t>(i);
        const ImageTensor& clean = dataset.images[idx];
        const attacks::AttackResult& attack = attacked[idx];

        EvalRecord rec;
        rec.index = i;
        rec.label = dataset.labels[idx];
        rec.clean_class = attack.original_class;
        rec.adversarial_class = attack.adversarial_class;
        rec.attack_success = attack.success;
        rec.attack_rmse = attack.rmse;

        const defense::DefenseOutcome outcome = defense::defend(model, attack.adversarial, config);
        rec.defended_class = nn::predict_top1(model, outcome.defended);
        rec.recovered = rec.defended_class == rec.clean_class;
        rec.mse = mse(outcome.defended, clean);
        rec.rmse = std::sqrt(rec.mse);
        rec.psnr = psnr(outcome.defended, clean);
        rec.ssim = ssim(outcome.defended, clean);
        rec.stream_bytes = outcome.stream.bytes.size();
        records[idx] = rec;
    }
    return records;
}

EvalAggregate aggregate(const std::vector<EvalRecord>& records, const std::string& attack,
                        const std::string& method) {
    EvalAggregate agg;
    agg.attack = attack;
    agg.method = method;
    agg.count = static_cast<int>(records.size());
    if (records.empty()) return agg;
    for (const EvalRecord& r : records) {
        agg.accuracy += (r.defended_class == r.label) ? 1.0 : 0.0;
        agg.recovery_rate += r.recovered ? 1.0 : 0.0;
        agg.attack_success_rate += r.attack_success ? 1.0 : 0.0;
        agg.mean_mse += r.mse;
        agg.mean_psnr += r.psnr;
        agg.mean_ssim += r.ssim;
        agg.mean_stream_bytes += static_cast<double>(r.stream_bytes);
    }
    const double n = static_cast<double>(records.size());
    agg.accuracy *= 100.0 / n;
    agg.recovery_rate *= 100.0 / n;
    agg.attack_success_rate *= 100.0 / n;
    agg.mean_mse /= n;
    agg.mean_psnr /= n;
    agg.mean_ssim /= n;
    agg.mean_stream_bytes /= n;
    return agg;
}

std::vector<SweepPoint> accuracy_sweep(const nn::ClassifierModel& model,
                                       const SyntheticDataset& dataset,
                                       const std::vector<attacks::AttackResult>& attacked,
                                       defense::DefenseConfig config,
                                       const std::vector<int>& qualities) {
    if (dataset.size() == 0) throw ParameterError("accuracy_sweep: empty dataset");
    std::vector<SweepPoint> curve;
    curve.reserve(qualities.size());
    for (int q : qualities) {
        defense::DefenseConfig point_config = config;
        point_config.quality = q;
        if (point_config.q_max > q) point_config.q_max = q;
        if (point_config.q_min > point_config.q_max) point_config.q_min = point_config.q_max;
        const std::vector<EvalRecord> records =
            evaluate_method(model, dataset, attacked, point_config);
        const EvalAggregate agg = aggregate(records, "", "");
        curve.push_back({q, agg.accuracy, agg.recovery_rate});
    }
    return curve;
}

std::vector<EvalAggregate> run_table(const nn::ClassifierModel& model,
                                     const SyntheticDataset& dataset,
                                     const std::vector<attacks::AttackKind>& kinds,
                                     double rmse_target,
                                     const std::vector<defense::DefenseConfig>& methods) {
    std::vector<EvalAggregate> table;
    for (attacks::AttackKind kind : kinds) {
        const std::vector<attacks::AttackResult> attacked =
            attack_dataset(model, dataset, kind, rmse_target);
        for (const defense::DefenseConfig& config : methods) {
            const std::vector<EvalRecord> records =
                evaluate_method(model, dataset, attacked, config);
            table.push_back(aggregate(records, attacks::attack_name(kind),
                                      defense::method_name(config.method)));
        }
    }
    return table;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string records_to_csv(const std::vector<EvalRecord>& records) {
    std::string out =
        "index,label,clean_class,adversarial_class,defended_class,attack_success,"
        "recovered,attack_rmse,mse,rmse,psnr,ssim,stream_bytes\n";
    for (const EvalRecord& r : records) {
        out += std::to_string(r.index) + "," + std::to_string(r.label) + "," +
               std::to_string(r.clean_class) + "," + std::to_string(r.adversarial_class) + "," +
               std::to_string(r.defended_class) + "," + (r.attack_success ? "1" : "0") + "," +
               (r.recovered ? "1" : "0") + "," + format_double(r.attack_rmse) + "," +
               format_double(r.mse) + "," + format_double(r.rmse) + "," + format_double(r.psnr) +
               "," + format_double(r.ssim) + "," + std::to_string(r.stream_bytes) + "\n";
    }
    return out;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
    std::string out = "quality,accuracy,recovery_rate\n";
    for (const SweepPoint& p : points)
        out += std::to_string(p.quality) + "," + format_double(p.accuracy) + "," +
               format_double(p.recovery_rate) + "\n";
    return out;
}

std::string aggregates_to_json(const std::vector<EvalAggregate>& aggregates) {
    // pixel units are [0,1]; psnr in dB
    std::string out = "{\n  \"units\": \"pixel values in [0,1], psnr dB\",\n  \"results\": [\n";
    for (size_t i = 0; i < aggregates.size(); ++i) {
        const EvalAggregate& a = aggregates[i];
        out += "    {\"attack\": \"" + a.attack + "\", \"method\": \"" + a.method +
               "\", \"count\": " + std::to_string(a.count) +
               ", \"accuracy\": " + format_double(a.accuracy) +
               ", \"recovery_rate\": " + format_double(a.recovery_rate) +
               ", \"attack_success_rate\": " + format_double(a.attack_success_rate) +
               ", \"mean_mse\": " + format_double(a.mean_mse) +
               ", \"mean_psnr\": " + format_double(a.mean_psnr) +
               ", \"mean_ssim\": " + format_double(a.mean_ssim) +
               ", \"mean_stream_bytes\": " + format_double(a.mean_stream_bytes) + "}";
        out += (i + 1 < aggregates.size()) ? ",\n" : "\n";
    }
    out += "  ]\n}\n";
    return out;
}

} // namespace semjpeg::eval
