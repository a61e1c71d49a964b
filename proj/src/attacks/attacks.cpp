#include "semjpeg/attacks/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "semjpeg/attacks/lbfgs.hpp"
#include "semjpeg/util/errors.hpp"

namespace semjpeg::attacks {

using nn::ClassifierModel;

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

void fill_distances(AttackResult& r) {
    double linf = 0.0, sq = 0.0;
    for (double d : r.delta.data) {
        linf = std::max(linf, std::fabs(d));
        sq += d * d;
    }
    r.linf = linf;
    r.l2 = std::sqrt(sq);
    r.rmse = std::sqrt(sq / static_cast<double>(r.delta.data.size()));
}

AttackResult make_result(const ImageTensor& x, ImageTensor adversarial, int original,
                         int adversarial_class, int target) {
    AttackResult r;
    r.delta = adversarial;
    for (size_t i = 0; i < x.data.size(); ++i) r.delta.data[i] -= x.data[i];
    r.adversarial = std::move(adversarial);
    r.original_class = original;
    r.adversarial_class = adversarial_class;
    r.target_class = target;
    r.success = target < 0 ? adversarial_class != original : adversarial_class == target;
    fill_distances(r);
    return r;
}

void validate_config(const AttackConfig& cfg) {
    if (cfg.epsilon < 0.0) throw ParameterError("attack: epsilon must be >= 0");
    if (cfg.alpha < 0.0) throw ParameterError("attack: alpha must be >= 0");
    if (cfg.max_iterations < 1) throw ParameterError("attack: need at least one iteration");
}

} // namespace

AttackKind attack_kind_from_name(const std::string& name) {
    if (name == "fgsm") return AttackKind::Fgsm;
    if (name == "igsm") return AttackKind::Igsm;
    if (name == "ga") return AttackKind::GradientAttack;
    if (name == "deepfool") return AttackKind::DeepFool;
    if (name == "jsma") return AttackKind::Jsma;
    if (name == "lbfgs") return AttackKind::Lbfgs;
    throw ParameterError("unknown attack: " + name);
}

std::string attack_name(AttackKind kind) {
    switch (kind) {
        case AttackKind::Fgsm: return "fgsm";
        case AttackKind::Igsm: return "igsm";
        case AttackKind::GradientAttack: return "ga";
        case AttackKind::DeepFool: return "deepfool";
        case AttackKind::Jsma: return "jsma";
        case AttackKind::Lbfgs: return "lbfgs";
    }
    return "?";
}

AttackResult fgsm(const ClassifierModel& model, const ImageTensor& x, const AttackConfig& cfg) {
    validate_config(cfg);
    const int c = nn::predict_top1(model, x);
    const ImageTensor grad = nn::input_gradient(model, x, c);

    ImageTensor adv = x;
    for (size_t i = 0; i < adv.data.size(); ++i)
        adv.data[i] += cfg.epsilon * sign_of(grad.data[i]);
    clamp01(adv);

    AttackResult r = make_result(x, std::move(adv), c, -1, -1);
    r.adversarial_class = nn::predict_top1(model, r.adversarial);
    r.success = r.adversarial_class != c;
    r.iterations = 1;
    return r;
}

AttackResult igsm(const ClassifierModel& model, const ImageTensor& x, const AttackConfig& cfg) {
    validate_config(cfg);
    if (cfg.alpha > cfg.epsilon) throw ParameterError("igsm: alpha must not exceed epsilon");
    const int c = nn::predict_top1(model, x);

    ImageTensor adv = x;
    int used = 0;
    int current = c;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const ImageTensor grad = nn::input_gradient(model, adv, c);
        bool moved = false;
        for (size_t i = 0; i < adv.data.size(); ++i) {
            const double step = cfg.alpha * sign_of(grad.data[i]);
            if (step != 0.0) moved = true;
            double v = adv.data[i] + step;
            // stay inside the L_inf ball around x and inside [0,1]
            v = std::min(v, std::min(x.data[i] + cfg.epsilon, 1.0));
            v = std::max(v, std::max(x.data[i] - cfg.epsilon, 0.0));
            adv.data[i] = v;
        }
        ++used;
        current = nn::predict_top1(model, adv);
        if (current != c) break;
        if (!moved) break;  // zero gradient: nothing further can happen
    }

    AttackResult r = make_result(x, std::move(adv), c, current, -1);
    r.iterations = used;
    return r;
}

AttackResult gradient_attack(const ClassifierModel& model, const ImageTensor& x,
                             const AttackConfig& cfg) {
    validate_config(cfg);
    const int c = nn::predict_top1(model, x);
    const ImageTensor grad = nn::input_gradient(model, x, c);
    double norm_sq = 0.0;
    for (double g : grad.data) norm_sq += g * g;

    ImageTensor adv = x;
    if (norm_sq > 0.0) {
        const double scale = cfg.epsilon / std::sqrt(norm_sq);
        for (size_t i = 0; i < adv.data.size(); ++i) adv.data[i] += scale * grad.data[i];
        clamp01(adv);
    }

    AttackResult r = make_result(x, std::move(adv), c, -1, -1);
    r.adversarial_class = nn::predict_top1(model, r.adversarial);
    r.success = r.adversarial_class != c;
    r.iterations = 1;
    return r;
}

AttackResult deepfool_generic(const DifferentiableVectorFn& fn, const ImageTensor& x,
                              const AttackConfig& cfg) {
    validate_config(cfg);
    const double scale = (1.0 + cfg.overshoot) * cfg.deepfool_scale;

    std::vector<double> base_logits = fn.eval(x);
    const int c = nn::argmax_lowest(base_logits);

    ImageTensor r_total(x.h, x.w, x.c, 0.0);
    auto apply = [&](const ImageTensor& rt) {
        ImageTensor out = x;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += scale * rt.data[i];
        clamp01(out);
        return out;
    };

    int used = 0;
    int current = c;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        ImageTensor probe = apply(r_total);
        std::vector<double> logits = fn.eval(probe);
        current = nn::argmax_lowest(logits);
        if (current != c) break;

        const std::vector<ImageTensor> grads = fn.gradients(probe);

        // nearest boundary under the linearization
        int best_k = -1;
        double best_ratio = 0.0;
        double best_fdiff = 0.0;
        double best_wnorm_sq = 0.0;
        for (int k = 0; k < fn.outputs; ++k) {
            if (k == c) continue;
            double wnorm_sq = 0.0;
            for (size_t i = 0; i < x.data.size(); ++i) {
                const double w = grads[static_cast<size_t>(k)].data[i] -
                                 grads[static_cast<size_t>(c)].data[i];
                wnorm_sq += w * w;
            }
            if (wnorm_sq <= 1e-30) continue;
            const double fdiff = std::fabs(logits[static_cast<size_t>(k)] -
                                           logits[static_cast<size_t>(c)]);
            const double ratio = fdiff / std::sqrt(wnorm_sq);
            if (best_k < 0 || ratio < best_ratio) {
                best_k = k;
                best_ratio = ratio;
                best_fdiff = fdiff;
                best_wnorm_sq = wnorm_sq;
            }
        }
        if (best_k < 0) break;  // all boundary normals vanish

        const double step = (best_fdiff + 1e-9) / best_wnorm_sq;
        for (size_t i = 0; i < x.data.size(); ++i) {
            const double w = grads[static_cast<size_t>(best_k)].data[i] -
                             grads[static_cast<size_t>(c)].data[i];
            r_total.data[i] += step * w;
        }
        ++used;
    }

    ImageTensor adv = apply(r_total);
    AttackResult result = make_result(x, std::move(adv), c, current, -1);
    result.adversarial_class = current;
    result.success = current != c;
    result.iterations = used;
    return result;
}

AttackResult deepfool(const ClassifierModel& model, const ImageTensor& x,
                      const AttackConfig& cfg) {
    DifferentiableVectorFn fn;
    fn.outputs = model.classes;
    fn.eval = [&model](const ImageTensor& z) { return nn::forward(model, z).logits; };
    fn.gradients = [&model](const ImageTensor& z) {
        const nn::ActivationStack stack = nn::forward(model, z);
        std::vector<ImageTensor> grads;
        grads.reserve(static_cast<size_t>(model.classes));
        for (int k = 0; k < model.classes; ++k)
            grads.push_back(nn::logit_input_gradient(model, stack, k));
        return grads;
    };
    return deepfool_generic(fn, x, cfg);
}

AttackResult jsma_generic(const DifferentiableVectorFn& fn, const ImageTensor& x,
                          int target_class, const AttackConfig& cfg) {
    validate_config(cfg);
    if (target_class < 0 || target_class >= fn.outputs)
        throw ParameterError("jsma: target class out of range");
    const int c = nn::argmax_lowest(fn.eval(x));

    ImageTensor adv = x;
    int used = 0;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (nn::argmax_lowest(fn.eval(adv)) == target_class) break;
        const std::vector<ImageTensor> jac = fn.gradients(adv);

        // adversarial saliency scores; saturated pixels are out of play
        size_t best_index = 0;
        double best_score = 0.0;
        for (size_t j = 0; j < adv.data.size(); ++j) {
            if (adv.data[j] >= 1.0) continue;
            const double target_grad = jac[static_cast<size_t>(target_class)].data[j];
            double others = 0.0;
            for (int k = 0; k < fn.outputs; ++k)
                if (k != target_class) others += jac[static_cast<size_t>(k)].data[j];
            double score = 0.0;
            if (!(target_grad < 0.0 || others > 0.0)) score = target_grad * std::fabs(others);
            if (score > best_score) {
                best_score = score;
                best_index = j;
            }
        }
        if (best_score <= 0.0) break;  // no pixel helps the target

        adv.data[best_index] = std::min(1.0, adv.data[best_index] + cfg.epsilon);
        ++used;
    }

    const int current = nn::argmax_lowest(fn.eval(adv));
    AttackResult r = make_result(x, std::move(adv), c, current, target_class);
    r.iterations = used;
    return r;
}

AttackResult jsma(const ClassifierModel& model, const ImageTensor& x, int target_class,
                  const AttackConfig& cfg) {
    DifferentiableVectorFn fn;
    fn.outputs = model.classes;
    fn.eval = [&model](const ImageTensor& z) { return nn::forward(model, z).probs; };
    fn.gradients = [&model](const ImageTensor& z) {
        const nn::ActivationStack stack = nn::forward(model, z);
        std::vector<ImageTensor> jac;
        jac.reserve(static_cast<size_t>(model.classes));
        for (int k = 0; k < model.classes; ++k)
            jac.push_back(nn::prob_input_gradient(model, stack, k));
        return jac;
    };
    return jsma_generic(fn, x, target_class, cfg);
}

namespace {

// Untargeted wrapper shared by jsma and lbfgs: iterate the targeted attack
// over every class and keep the smallest-L2 success (lowest class on ties).
template <typename TargetedFn>
AttackResult smallest_successful_target(const ClassifierModel& model, const ImageTensor& x,
                                        TargetedFn&& targeted) {
    const int c = nn::predict_top1(model, x);
    AttackResult best;
    bool have_best = false;
    AttackResult last_failure;
    for (int target = 0; target < model.classes; ++target) {
        if (target == c) continue;
        AttackResult r = targeted(target);
        if (r.success && (!have_best || r.l2 < best.l2)) {
            best = std::move(r);
            have_best = true;
        } else if (!have_best) {
            last_failure = std::move(r);
        }
    }
    if (have_best) {
        best.success = best.adversarial_class != c;
        return best;
    }
    return last_failure;
}

} // namespace

AttackResult jsma_untargeted(const ClassifierModel& model, const ImageTensor& x,
                             const AttackConfig& cfg) {
    return smallest_successful_target(model, x,
                                      [&](int target) { return jsma(model, x, target, cfg); });
}

AttackResult lbfgs_attack_single(const ClassifierModel& model, const ImageTensor& x,
                                 int target_class, double tradeoff, const AttackConfig& cfg) {
    if (target_class < 0 || target_class >= model.classes)
        throw ParameterError("lbfgs_attack: target class out of range");
    const size_t n = x.data.size();

    Objective objective = [&](const std::vector<double>& z, std::vector<double>& grad) {
        ImageTensor img(x.h, x.w, x.c);
        img.data = z;
        const nn::ActivationStack stack = nn::forward(model, img);
        std::vector<double> dlogits = stack.probs;
        dlogits[static_cast<size_t>(target_class)] -= 1.0;
        const ImageTensor dinput = nn::backward(model, stack, dlogits, nullptr);
        double dist_sq = 0.0;
        grad.resize(n);
        for (size_t i = 0; i < n; ++i) {
            const double diff = z[i] - x.data[i];
            dist_sq += diff * diff;
            grad[i] = 2.0 * tradeoff * diff + dinput.data[i];
        }
        return tradeoff * dist_sq + nn::loss(stack.probs, target_class);
    };

    LbfgsOptions options;
    options.memory = cfg.lbfgs_memory;
    options.max_iterations = cfg.lbfgs_iterations;
    const std::vector<double> lower(n, 0.0), upper(n, 1.0);
    LbfgsResult res = minimize_box(objective, x.data, lower, upper, options);

    ImageTensor adv(x.h, x.w, x.c);
    adv.data = std::move(res.x);
    const int c = nn::predict_top1(model, x);
    AttackResult r = make_result(x, std::move(adv), c, -1, target_class);
    r.adversarial_class = nn::predict_top1(model, r.adversarial);
    r.success = r.adversarial_class == target_class;
    r.iterations = res.iterations;
    return r;
}

AttackResult lbfgs_attack(const ClassifierModel& model, const ImageTensor& x, int target_class,
                          const AttackConfig& cfg) {
    validate_config(cfg);
    // 10 geometric points per decade across [1e-3, 1e3]
    AttackResult best;
    bool have_success = false;
    double best_prob = -1.0;
    for (int k = 0; k <= 60; ++k) {
        const double tradeoff = std::pow(10.0, -3.0 + k / 10.0);
        AttackResult r = lbfgs_attack_single(model, x, target_class, tradeoff, cfg);
        if (r.success) {
            if (!have_success || r.l2 < best.l2) {
                best = std::move(r);
                have_success = true;
            }
        } else if (!have_success) {
            const double p =
                nn::forward(model, r.adversarial).probs[static_cast<size_t>(target_class)];
            if (p > best_prob) {
                best_prob = p;
                best = std::move(r);
            }
        }
    }
    return best;
}

AttackResult lbfgs_attack_untargeted(const ClassifierModel& model, const ImageTensor& x,
                                     const AttackConfig& cfg) {
    return smallest_successful_target(
        model, x, [&](int target) { return lbfgs_attack(model, x, target, cfg); });
}

AttackResult run_attack(AttackKind kind, const ClassifierModel& model, const ImageTensor& x,
                        const AttackConfig& cfg) {
    switch (kind) {
        case AttackKind::Fgsm: return fgsm(model, x, cfg);
        case AttackKind::Igsm: return igsm(model, x, cfg);
        case AttackKind::GradientAttack: return gradient_attack(model, x, cfg);
        case AttackKind::DeepFool: return deepfool(model, x, cfg);
        case AttackKind::Jsma: return jsma_untargeted(model, x, cfg);
        case AttackKind::Lbfgs: return lbfgs_attack_untargeted(model, x, cfg);
    }
    throw ParameterError("run_attack: bad kind");
}

namespace {

AttackConfig with_strength(AttackKind kind, const AttackConfig& base, double strength) {
    AttackConfig cfg = base;
    switch (kind) {
        case AttackKind::Fgsm:
        case AttackKind::GradientAttack:
            cfg.epsilon = strength;
            break;
        case AttackKind::Igsm:
            // fine steps stop at the first boundary crossing instead of
            // overshooting deep into the adversarial class
            cfg.epsilon = strength;
            cfg.alpha = strength / 20.0;
            break;
        case AttackKind::DeepFool:
            cfg.deepfool_scale = strength;
            break;
        case AttackKind::Jsma:
            cfg.epsilon = strength;
            break;
        case AttackKind::Lbfgs:
            throw ParameterError("calibrate_to_rmse: lbfgs has no monotone strength parameter");
    }
    return cfg;
}

} // namespace

AttackConfig calibrate_to_rmse(AttackKind kind, const ClassifierModel& model,
                               const ImageTensor& x, double rmse_target,
                               const AttackConfig& base) {
    if (rmse_target < 0.0) throw ParameterError("calibrate_to_rmse: negative target");
    if (rmse_target == 0.0) return with_strength(kind, base, 0.0);

    const double tolerance = 0.10 * rmse_target;
    auto measure = [&](double strength) {
        return run_attack(kind, model, x, with_strength(kind, base, strength)).rmse;
    };

    int evals = 0;
    const int max_evals = 30;

    // sign-style attacks hit the target exactly at strength == target, so
    // probe there first and expand upward while the response is too small
    double hi = kind == AttackKind::DeepFool ? 1.0 : rmse_target;
    double rmse_hi = measure(hi);
    ++evals;
    double best_strength = hi;
    double best_err = std::fabs(rmse_hi - rmse_target);

    while (rmse_hi < rmse_target && evals < max_evals) {
        if (rmse_hi == 0.0 && hi >= 1e4)
            throw CalibrationError("calibrate_to_rmse: attack produces no perturbation");
        if (hi >= 1e6) break;
        hi *= 2.0;
        rmse_hi = measure(hi);
        ++evals;
        if (std::fabs(rmse_hi - rmse_target) < best_err) {
            best_err = std::fabs(rmse_hi - rmse_target);
            best_strength = hi;
        }
    }
    if (rmse_hi == 0.0)
        throw CalibrationError("calibrate_to_rmse: attack produces no perturbation");

    double lo = 0.0;
    while (evals < max_evals && best_err > tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double rmse_mid = measure(mid);
        ++evals;
        if (std::fabs(rmse_mid - rmse_target) < best_err) {
            best_err = std::fabs(rmse_mid - rmse_target);
            best_strength = mid;
        }
        if (rmse_mid < rmse_target) lo = mid;
        else hi = mid;
    }
    return with_strength(kind, base, best_strength);
}

} // namespace semjpeg::attacks
