#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semjpeg/image.hpp"
#include "semjpeg/nn/model.hpp"

namespace semjpeg::attacks {

enum class AttackKind { Fgsm, Igsm, GradientAttack, DeepFool, Jsma, Lbfgs };

AttackKind attack_kind_from_name(const std::string& name);
std::string attack_name(AttackKind kind);

struct AttackConfig {
    double epsilon = 0.02;        // L_inf budget (fgsm/igsm), L2 length (ga), pixel step (jsma)
    double alpha = 0.001;         // igsm per-iteration step, <= epsilon
    int max_iterations = 40;      // iteration budget (igsm/deepfool/jsma)
    double overshoot = 0.02;      // deepfool boundary overshoot
    double deepfool_scale = 1.0;  // extra multiplier on the accumulated deepfool step
    int lbfgs_memory = 10;
    int lbfgs_iterations = 60;
    double rmse_target = 0.02;
    std::uint64_t seed = 0;
};

struct AttackResult {
    ImageTensor adversarial;     // x', clipped to [0,1]
    ImageTensor delta;           // x' - x
    int original_class = -1;     // c
    int adversarial_class = -1;  // c'
    int target_class = -1;       // -1 when untargeted
    bool success = false;
    int iterations = 0;
    double linf = 0.0;
    double l2 = 0.0;
    double rmse = 0.0;
};

// One sign-of-gradient step of size epsilon in L_inf.
AttackResult fgsm(const nn::ClassifierModel& model, const ImageTensor& x, const AttackConfig& cfg);

// Iterated alpha-sized sign steps, every iterate clipped to the epsilon ball
// around x and to [0,1]; stops early on success.
AttackResult igsm(const nn::ClassifierModel& model, const ImageTensor& x, const AttackConfig& cfg);

// Single step of length epsilon along the unit-normalized exact gradient.
AttackResult gradient_attack(const nn::ClassifierModel& model, const ImageTensor& x,
                             const AttackConfig& cfg);

// Iterative nearest-boundary projection under a local linearization (L2).
AttackResult deepfool(const nn::ClassifierModel& model, const ImageTensor& x,
                      const AttackConfig& cfg);

// Multi-output function with per-output input gradients; lets the deepfool
// core run against any differentiable classifier (tests use affine models).
struct DifferentiableVectorFn {
    int outputs = 0;
    std::function<std::vector<double>(const ImageTensor&)> eval;
    std::function<std::vector<ImageTensor>(const ImageTensor&)> gradients;
};

AttackResult deepfool_generic(const DifferentiableVectorFn& fn, const ImageTensor& x,
                              const AttackConfig& cfg);

// Greedy single-pixel saliency attack toward target_class; only increases
// pixels, skipping saturated ones. The generic form takes the classifier's
// output probabilities and their input gradients (Jacobian rows).
AttackResult jsma(const nn::ClassifierModel& model, const ImageTensor& x, int target_class,
                  const AttackConfig& cfg);
AttackResult jsma_generic(const DifferentiableVectorFn& fn, const ImageTensor& x,
                          int target_class, const AttackConfig& cfg);
AttackResult jsma_untargeted(const nn::ClassifierModel& model, const ImageTensor& x,
                             const AttackConfig& cfg);

// Box-constrained penalized optimization min_z a*|x-z|^2 + L(F(z), target)
// over a geometric grid of trade-off constants; keeps the successful result
// of smallest L2.
AttackResult lbfgs_attack(const nn::ClassifierModel& model, const ImageTensor& x,
                          int target_class, const AttackConfig& cfg);
AttackResult lbfgs_attack_untargeted(const nn::ClassifierModel& model, const ImageTensor& x,
                                     const AttackConfig& cfg);
// Single trade-off constant; the grid driver and the tests build on this.
AttackResult lbfgs_attack_single(const nn::ClassifierModel& model, const ImageTensor& x,
                                 int target_class, double tradeoff, const AttackConfig& cfg);

// Untargeted dispatch used by the CLI and the evaluation harness.
AttackResult run_attack(AttackKind kind, const nn::ClassifierModel& model, const ImageTensor& x,
                        const AttackConfig& cfg);

// Bisection on the attack's strength parameter until the produced
// perturbation's RMSE is within 10% of rmse_target (at most 30 attack
// evaluations). Throws CalibrationError when the attack cannot perturb.
AttackConfig calibrate_to_rmse(AttackKind kind, const nn::ClassifierModel& model,
                               const ImageTensor& x, double rmse_target,
                               const AttackConfig& base = {});

} // namespace semjpeg::attacks
