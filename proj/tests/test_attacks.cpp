#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "semjpeg/attacks/attacks.hpp"
#include "semjpeg/attacks/lbfgs.hpp"
#include "semjpeg/eval/dataset.hpp"
#include "semjpeg/nn/model.hpp"
#include "semjpeg/util/errors.hpp"
#include "semjpeg/util/rng.hpp"
#include "support/testutil.hpp"

using namespace semjpeg;
using attacks::AttackConfig;
using attacks::AttackKind;
using attacks::AttackResult;

namespace {

nn::ClassifierModel quick_model(std::uint64_t seed) {
    return nn::ClassifierModel::create(10, seed);
}

// Model with a little structure: a few epochs on a small shapes set, enough
// to give attacks a meaningful landscape without slowing the suite down.
const nn::ClassifierModel& trained_model() {
    static const nn::ClassifierModel model = [] {
        nn::ClassifierModel m = nn::ClassifierModel::create(10, 7);
        const eval::SyntheticDataset data = eval::generate_dataset(200, 55);
        nn::TrainOptions options;
        options.epochs = 8;
        options.batch_size = 16;
        options.seed = 9;
        nn::train(m, data.images, data.labels, options);
        return m;
    }();
    return model;
}

ImageTensor interior_image(Rng& rng) {
    ImageTensor img(32, 32, 3);
    for (double& v : img.data) v = rng.uniform(0.3, 0.7);
    return img;
}

// n-dimensional affine binary classifier as a DifferentiableVectorFn with
// logits {0, w.x + b}; image container is abused as a flat vector.
struct AffineBinary {
    std::vector<double> w;
    double b;

    attacks::DifferentiableVectorFn fn(int h, int wdt, int c) const {
        attacks::DifferentiableVectorFn f;
        f.outputs = 2;
        f.eval = [this](const ImageTensor& z) {
            double acc = b;
            for (size_t i = 0; i < z.data.size(); ++i) acc += w[i] * z.data[i];
            return std::vector<double>{0.0, acc};
        };
        f.gradients = [this, h, wdt, c](const ImageTensor& z) {
            std::vector<ImageTensor> grads(2, ImageTensor(h, wdt, c, 0.0));
            for (size_t i = 0; i < z.data.size(); ++i) grads[1].data[i] = w[i];
            return grads;
        };
        return f;
    }
};

} // namespace

TEST_CASE("fgsm with epsilon zero is the identity and not a success") {
    Rng rng(1);
    const nn::ClassifierModel model = quick_model(3);
    const ImageTensor x = interior_image(rng);
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    const AttackResult r = attacks::fgsm(model, x, cfg);
    CHECK(r.adversarial.data == x.data);
    CHECK_FALSE(r.success);
    CHECK(r.rmse == 0.0);
}

TEST_CASE("fgsm moves every interior pixel by exactly epsilon along the loss-gradient sign") {
    Rng rng(2);
    const nn::ClassifierModel model = trained_model();
    const ImageTensor x = interior_image(rng);
    AttackConfig cfg;
    cfg.epsilon = 0.01;
    const AttackResult r = attacks::fgsm(model, x, cfg);

    const ImageTensor grad = nn::input_gradient(model, x, r.original_class);
    int nonzero = 0;
    for (size_t i = 0; i < x.data.size(); ++i) {
        const double expected = grad.data[i] > 0 ? 0.01 : (grad.data[i] < 0 ? -0.01 : 0.0);
        CHECK(r.delta.data[i] == doctest::Approx(expected).epsilon(1e-12));
        if (expected != 0.0) ++nonzero;
    }
    CHECK(nonzero > static_cast<int>(0.95 * x.data.size()));
    CHECK(r.linf == doctest::Approx(0.01));
    CHECK(r.rmse == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("one-dimensional logistic: loss gradient sign is minus the weight sign") {
    // two-class linear-softmax with logits {0, w x + b}: dL/dx for the
    // currently predicted class 1 is (p1 - 1) w, so the sign step moves
    // against w for any positive w
    for (double w : {0.5, 2.0, 7.5}) {
        const double b = 0.3;
        const double x = 0.4;
        const double p1 = 1.0 / (1.0 + std::exp(-(w * x + b)));
        const double grad = (p1 - 1.0) * w;
        CHECK(grad < 0.0);
        CHECK((grad > 0) - (grad < 0) == -((w > 0) - (w < 0)));
    }
}

TEST_CASE("igsm stays inside the L-inf ball and [0,1] at the final iterate") {
    Rng rng(3);
    const nn::ClassifierModel model = trained_model();
    for (int trial = 0; trial < 4; ++trial) {
        const ImageTensor x = testsupport::random_image(32, 32, 3, rng);
        AttackConfig cfg;
        cfg.epsilon = 0.03;
        cfg.alpha = 0.004;
        cfg.max_iterations = 12;
        const AttackResult r = attacks::igsm(model, x, cfg);
        CHECK(r.linf <= cfg.epsilon + 1e-12);
        for (double v : r.adversarial.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK((r.success == (r.adversarial_class != r.original_class)));
    }
}

TEST_CASE("igsm with alpha == epsilon and one iteration reproduces fgsm") {
    Rng rng(4);
    const nn::ClassifierModel model = trained_model();
    const ImageTensor x = interior_image(rng);
    AttackConfig cfg;
    cfg.epsilon = 0.015;
    cfg.alpha = 0.015;
    cfg.max_iterations = 1;
    const AttackResult a = attacks::igsm(model, x, cfg);
    const AttackResult b = attacks::fgsm(model, x, cfg);
    CHECK(a.adversarial.data == b.adversarial.data);
}

TEST_CASE("gradient attack delta has L2 norm epsilon when no clipping occurs") {
    Rng rng(5);
    const nn::ClassifierModel model = trained_model();
    const ImageTensor x = interior_image(rng);
    AttackConfig cfg;
    cfg.epsilon = 0.5;
    const AttackResult r = attacks::gradient_attack(model, x, cfg);
    CHECK(r.l2 == doctest::Approx(0.5).epsilon(1e-9));

    // direction matches the normalized gradient
    const ImageTensor grad = nn::input_gradient(model, x, r.original_class);
    double norm = 0.0;
    for (double g : grad.data) norm += g * g;
    norm = std::sqrt(norm);
    for (size_t i = 0; i < x.data.size(); ++i)
        CHECK(r.delta.data[i] == doctest::Approx(0.5 * grad.data[i] / norm).epsilon(1e-9));
}

TEST_CASE("deepfool one-step closed form on random affine binary classifiers") {
    Rng rng(6);
    const int dim_h = 4, dim_w = 4, dim_c = 1;
    for (int trial = 0; trial < 20; ++trial) {
        AffineBinary model;
        model.w.resize(dim_h * dim_w * dim_c);
        for (double& v : model.w) v = rng.uniform(-1.0, 1.0);
        model.b = rng.uniform(-0.1, 0.1);

        ImageTensor x(dim_h, dim_w, dim_c);
        for (double& v : x.data) v = rng.uniform(0.35, 0.65);

        const auto fn = model.fn(dim_h, dim_w, dim_c);
        const double fx = fn.eval(x)[1];
        if (std::fabs(fx) < 1e-3) continue;  // skip near-boundary starts

        AttackConfig cfg;
        cfg.overshoot = 0.02;
        cfg.max_iterations = 50;
        const AttackResult r = attacks::deepfool_generic(fn, x, cfg);

        double wnorm_sq = 0.0;
        for (double v : model.w) wnorm_sq += v * v;
        const int sign = fx > 0 ? 1 : -1;  // step crosses the hyperplane
        CHECK(r.iterations == 1);
        CHECK(r.success);
        for (size_t i = 0; i < x.data.size(); ++i) {
            const double expected = -sign * (std::fabs(fx) / wnorm_sq) * model.w[i] * 1.02;
            CHECK(r.delta.data[i] == doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("deepfool leaves an already ambiguous start immediately") {
    // when the model's top-1 flips at iterate zero relative to the recorded
    // class, the loop must not run
    Rng rng(7);
    AffineBinary model;
    model.w = {1.0};
    model.b = -10.0;  // class 0 everywhere near [0,1]
    ImageTensor x(1, 1, 1);
    x.data[0] = 0.5;
    AttackConfig cfg;
    cfg.max_iterations = 3;
    const AttackResult r = attacks::deepfool_generic(model.fn(1, 1, 1), x, cfg);
    // class 0 is argmax at x and stays argmax: the attack runs its budget,
    // but for a correctly classified point the first probe equals x itself
    CHECK(r.original_class == 0);
}

TEST_CASE("deepfool on the toy model beats fgsm on L2 at equal strength") {
    const nn::ClassifierModel& model = trained_model();
    const eval::SyntheticDataset data = eval::generate_dataset(30, 321);

    double fgsm_l2 = 0.0, deepfool_l2 = 0.0;
    int fgsm_hits = 0, deepfool_hits = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        AttackConfig strong;
        strong.epsilon = 0.08;
        const AttackResult f = attacks::fgsm(model, data.images[i], strong);
        if (f.success) {
            fgsm_l2 += f.l2;
            ++fgsm_hits;
        }
        AttackConfig df;
        df.max_iterations = 30;
        const AttackResult d = attacks::deepfool(model, data.images[i], df);
        if (d.success) {
            deepfool_l2 += d.l2;
            ++deepfool_hits;
        }
    }
    REQUIRE(fgsm_hits > 0);
    REQUIRE(deepfool_hits >= fgsm_hits);
    CHECK(deepfool_l2 / deepfool_hits < fgsm_l2 / fgsm_hits);
}

TEST_CASE("jsma score is zero when the target gradient is negative") {
    // 2-class linear-softmax: J_1 = p1 (1-p1) (w1 - w0); coordinates where
    // w1 < w0 must never be selected
    Rng rng(8);
    const int n = 9;
    std::vector<double> w0(n), w1(n);
    for (int i = 0; i < n; ++i) {
        w0[i] = rng.uniform(-1.0, 1.0);
        w1[i] = rng.uniform(-1.0, 1.0);
    }

    attacks::DifferentiableVectorFn fn;
    fn.outputs = 2;
    fn.eval = [&](const ImageTensor& z) {
        double a = 0.0, b = 0.0;
        for (int i = 0; i < n; ++i) {
            a += w0[i] * z.data[i];
            b += w1[i] * z.data[i];
        }
        const double m = std::max(a, b);
        const double ea = std::exp(a - m), eb = std::exp(b - m);
        return std::vector<double>{ea / (ea + eb), eb / (ea + eb)};
    };
    fn.gradients = [&](const ImageTensor& z) {
        const std::vector<double> p = fn.eval(z);
        std::vector<ImageTensor> jac(2, ImageTensor(3, 3, 1, 0.0));
        for (int i = 0; i < n; ++i) {
            const double d = p[0] * p[1] * (w1[i] - w0[i]);
            jac[1].data[i] = d;   // dp1/dx_i
            jac[0].data[i] = -d;  // dp0/dx_i
        }
        return jac;
    };

    ImageTensor x(3, 3, 1, 0.5);
    AttackConfig cfg;
    cfg.epsilon = 0.2;
    cfg.max_iterations = 1;
    const AttackResult r = attacks::jsma_generic(fn, x, 1, cfg);

    // hand computation: argmax over positive (w1-w0) of J * |-J| = J^2
    int expected = -1;
    double best = 0.0;
    const std::vector<double> p = fn.eval(x);
    for (int i = 0; i < n; ++i) {
        const double j1 = p[0] * p[1] * (w1[i] - w0[i]);
        const double score = j1 < 0.0 ? 0.0 : j1 * j1;
        if (score > best) {
            best = score;
            expected = i;
        }
    }
    if (expected >= 0 && r.iterations == 1) {
        for (int i = 0; i < n; ++i) {
            if (i == expected) CHECK(r.delta.data[i] == doctest::Approx(0.2));
            else CHECK(r.delta.data[i] == 0.0);
        }
        CHECK(w1[expected] - w0[expected] > 0.0);
    }
}

TEST_CASE("jsma sparsity: changed pixels never exceed iterations used") {
    Rng rng(9);
    const nn::ClassifierModel& model = trained_model();
    const ImageTensor x = testsupport::random_image(32, 32, 3, rng);
    AttackConfig cfg;
    cfg.epsilon = 0.25;
    cfg.max_iterations = 40;
    const AttackResult r = attacks::jsma(model, x, 3, cfg);

    int changed = 0;
    for (size_t i = 0; i < x.data.size(); ++i) {
        if (r.delta.data[i] != 0.0) {
            ++changed;
            CHECK(r.delta.data[i] > 0.0);  // jsma only increases pixels
        } else {
            CHECK(r.adversarial.data[i] == x.data[i]);  // untouched = bit-identical
        }
    }
    CHECK(changed <= r.iterations);
}

TEST_CASE("box-constrained L-BFGS reaches closed-form optima of strongly convex quadratics") {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(49));  // dims up to 50
        // A = L L^T + lambda I, minimum at m
        std::vector<double> L(static_cast<size_t>(n) * n);
        for (double& v : L) v = rng.uniform(-1.0, 1.0);
        const double lambda = rng.uniform(0.1, 1.0);
        std::vector<double> A(static_cast<size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = i == j ? lambda : 0.0;
                for (int k = 0; k < n; ++k) acc += L[i * n + k] * L[j * n + k];
                A[i * n + j] = acc;
            }
        std::vector<double> m(static_cast<size_t>(n));
        for (double& v : m) v = rng.uniform(-2.0, 2.0);

        attacks::Objective objective = [&](const std::vector<double>& z,
                                           std::vector<double>& grad) {
            grad.assign(static_cast<size_t>(n), 0.0);
            double value = 0.0;
            for (int i = 0; i < n; ++i) {
                double row = 0.0;
                for (int j = 0; j < n; ++j) row += A[i * n + j] * (z[j] - m[j]);
                grad[i] = row;
                value += 0.5 * (z[i] - m[i]) * row;
            }
            return value;
        };

        std::vector<double> x0(static_cast<size_t>(n));
        for (double& v : x0) v = rng.uniform(-3.0, 3.0);

        attacks::LbfgsOptions options;
        options.memory = 50;  // full memory: finite termination on quadratics
        options.max_iterations = 50;
        options.gradient_tolerance = 1e-10;
        const attacks::LbfgsResult res = attacks::minimize_box(objective, x0, {}, {}, options);

        CHECK(res.iterations <= 50);
        for (int i = 0; i < n; ++i) CHECK(std::fabs(res.x[i] - m[i]) < 1e-6);
    }
}

TEST_CASE("L-BFGS respects box constraints") {
    attacks::Objective objective = [](const std::vector<double>& z, std::vector<double>& grad) {
        // minimum at (2, -2), outside the box
        grad = {2.0 * (z[0] - 2.0), 2.0 * (z[1] + 2.0)};
        return (z[0] - 2.0) * (z[0] - 2.0) + (z[1] + 2.0) * (z[1] + 2.0);
    };
    const attacks::LbfgsResult res =
        attacks::minimize_box(objective, {0.5, 0.5}, {0.0, 0.0}, {1.0, 1.0}, {});
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.x[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lbfgs attack: huge distance weight returns the original image") {
    Rng rng(11);
    const nn::ClassifierModel& model = trained_model();
    const ImageTensor x = interior_image(rng);
    AttackConfig cfg;
    cfg.lbfgs_iterations = 30;
    const AttackResult r = attacks::lbfgs_attack_single(model, x, 5, 1e9, cfg);
    CHECK(r.l2 < 1e-4);
    for (double v : r.adversarial.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("calibration: fgsm lands exactly on the analytic epsilon") {
    Rng rng(12);
    const nn::ClassifierModel& model = trained_model();
    const ImageTensor x = interior_image(rng);
    const AttackConfig cfg = attacks::calibrate_to_rmse(AttackKind::Fgsm, model, x, 0.02);
    CHECK(cfg.epsilon == doctest::Approx(0.02).epsilon(1e-9));
    const AttackResult r = attacks::fgsm(model, x, cfg);
    CHECK(r.rmse >= 0.018);
    CHECK(r.rmse <= 0.022);
}

TEST_CASE("calibration: zero target returns zero strength immediately") {
    Rng rng(13);
    const nn::ClassifierModel model = quick_model(2);
    const ImageTensor x = interior_image(rng);
    const AttackConfig cfg = attacks::calibrate_to_rmse(AttackKind::Fgsm, model, x, 0.0);
    CHECK(cfg.epsilon == 0.0);
}

TEST_CASE("calibration: an attack that cannot perturb raises CalibrationError") {
    Rng rng(14);
    nn::ClassifierModel model = quick_model(4);
    // kill every parameter: gradients vanish identically
    for (size_t i = 0; i < model.parameter_count(); ++i) model.set_parameter(i, 0.0);
    const ImageTensor x = interior_image(rng);
    CHECK_THROWS_AS(attacks::calibrate_to_rmse(AttackKind::Fgsm, model, x, 0.02),
                    CalibrationError);
}

TEST_CASE("calibration: deepfool hits the rmse window on the toy model") {
    Rng rng(15);
    const nn::ClassifierModel& model = trained_model();
    const eval::SyntheticDataset data = eval::generate_dataset(6, 777);
    int in_window = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        AttackConfig base;
        base.max_iterations = 30;
        const AttackConfig cfg =
            attacks::calibrate_to_rmse(AttackKind::DeepFool, model, data.images[i], 0.02, base);
        const AttackResult r = attacks::deepfool(model, data.images[i], cfg);
        if (r.rmse >= 0.018 && r.rmse <= 0.022) ++in_window;
    }
    CHECK(in_window >= 5);  // one stubborn image tolerated
}

TEST_CASE("attack results are deterministic") {
    Rng rng(16);
    const nn::ClassifierModel& model = trained_model();
    const ImageTensor x = testsupport::random_image(32, 32, 3, rng);
    AttackConfig cfg;
    cfg.epsilon = 0.03;
    cfg.alpha = 0.005;
    const AttackResult a = attacks::igsm(model, x, cfg);
    const AttackResult b = attacks::igsm(model, x, cfg);
    CHECK(a.adversarial.data == b.adversarial.data);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("config validation") {
    Rng rng(17);
    const nn::ClassifierModel model = quick_model(5);
    const ImageTensor x = interior_image(rng);
    AttackConfig bad;
    bad.epsilon = -0.1;
    CHECK_THROWS_AS(attacks::fgsm(model, x, bad), ParameterError);
    AttackConfig swapped;
    swapped.epsilon = 0.01;
    swapped.alpha = 0.02;
    CHECK_THROWS_AS(attacks::igsm(model, x, swapped), ParameterError);
}
