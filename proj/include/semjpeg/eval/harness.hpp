#pragma once

#include <string>
#include <vector>

#include "semjpeg/attacks/attacks.hpp"
#include "semjpeg/defense.hpp"
#include "semjpeg/eval/dataset.hpp"
#include "semjpeg/nn/model.hpp"

namespace semjpeg::eval {

struct EvalRecord {
    int index = 0;
    int label = -1;            // ground-truth class
    int clean_class = -1;      // model's prediction on the clean image
    int adversarial_class = -1;
    int defended_class = -1;
    bool attack_success = false;  // adversarial prediction != clean prediction
    bool recovered = false;       // defended prediction == clean prediction
    double mse = 0.0, rmse = 0.0, psnr = 0.0, ssim = 0.0;  // defended vs clean image
    double attack_rmse = 0.0;
    size_t stream_bytes = 0;
};

struct EvalAggregate {
    std::string attack;
    std::string method;
    double accuracy = 0.0;          // % defended predictions matching the true label
    double recovery_rate = 0.0;     // % matching the clean prediction
    double attack_success_rate = 0.0;
    double mean_mse = 0.0, mean_psnr = 0.0, mean_ssim = 0.0;
    double mean_stream_bytes = 0.0;
    int count = 0;
};

// Attack every image once (calibrated per image when rmse_target > 0), then
// defend and classify. Parallel across images; records are indexed, so the
// aggregation order is fixed.
std::vector<EvalRecord> evaluate_method(const nn::ClassifierModel& model,
                                        const SyntheticDataset& dataset,
                                        const std::vector<attacks::AttackResult>& attacked,
                                        const defense::DefenseConfig& config);

// Run one attack per image with per-image RMSE calibration. rmse_target <= 0
// runs the attack with `base` as-is.
std::vector<attacks::AttackResult> attack_dataset(const nn::ClassifierModel& model,
                                                  const SyntheticDataset& dataset,
                                                  attacks::AttackKind kind, double rmse_target,
                                                  const attacks::AttackConfig& base = {});

EvalAggregate aggregate(const std::vector<EvalRecord>& records, const std::string& attack,
                        const std::string& method);

struct SweepPoint {
    int quality = 0;
    double accuracy = 0.0;       // vs ground truth
    double recovery_rate = 0.0;  // vs clean prediction
};

// Accuracy-vs-quality curve for one attack/defense pair over a quality grid.
std::vector<SweepPoint> accuracy_sweep(const nn::ClassifierModel& model,
                                       const SyntheticDataset& dataset,
                                       const std::vector<attacks::AttackResult>& attacked,
                                       defense::DefenseConfig config,
                                       const std::vector<int>& qualities);

// Cross product of attacks and defense methods at matched settings.
std::vector<EvalAggregate> run_table(const nn::ClassifierModel& model,
                                     const SyntheticDataset& dataset,
                                     const std::vector<attacks::AttackKind>& kinds,
                                     double rmse_target,
                                     const std::vector<defense::DefenseConfig>& methods);

// Deterministic text emission (fixed float formatting).
std::string records_to_csv(const std::vector<EvalRecord>& records);
std::string sweep_to_csv(const std::vector<SweepPoint>& points);
std::string aggregates_to_json(const std::vector<EvalAggregate>& aggregates);

} // namespace semjpeg::eval
