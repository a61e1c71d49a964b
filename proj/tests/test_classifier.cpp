#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "naive_kernels.hpp"
#include "semjpeg/eval/dataset.hpp"
#include "semjpeg/nn/model.hpp"
#include "semjpeg/util/errors.hpp"
#include "semjpeg/util/rng.hpp"
#include "support/testutil.hpp"

using namespace semjpeg;

namespace {

nn::ClassifierModel random_model(std::uint64_t seed) {
    return nn::ClassifierModel::create(10, seed);
}

std::vector<std::uint8_t> file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("softmax output always sums to one") {
    Rng rng(1);
    const nn::ClassifierModel model = random_model(7);
    for (int trial = 0; trial < 20; ++trial) {
        const ImageTensor x = testsupport::random_image(32, 32, 3, rng);
        const nn::ActivationStack s = nn::forward(model, x);
        double sum = 0.0;
        for (double p : s.probs) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("zeroed class-activation layer gives uniform probabilities") {
    Rng rng(2);
    nn::ClassifierModel model = random_model(8);
    for (double& v : model.conv3.w) v = 0.0;
    for (double& v : model.conv3.b) v = 0.0;
    const ImageTensor x = testsupport::random_image(32, 32, 3, rng);
    const nn::ActivationStack s = nn::forward(model, x);
    for (double p : s.probs) CHECK(p == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("cross-entropy closed forms") {
    std::vector<double> sure(10, 0.0);
    sure[3] = 1.0;
    CHECK(nn::loss(sure, 3) == doctest::Approx(0.0));

    std::vector<double> uniform(10, 0.1);
    CHECK(nn::loss(uniform, 5) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("cross-entropy matches long-double recomputation within 1e-10") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> p(10);
        long double sum = 0.0;
        for (double& v : p) {
            v = rng.uniform(1e-6, 1.0);
            sum += v;
        }
        for (double& v : p) v = static_cast<double>(v / sum);
        const int target = rng.below_int(10);
        const long double expected = -std::log(static_cast<long double>(p[target]));
        CHECK(std::fabs(nn::loss(p, target) - static_cast<double>(expected)) < 1e-10);
    }
}

TEST_CASE("conv kernel matches the naive reference") {
    Rng rng(4);
    const nn::ClassifierModel model = random_model(9);
    const ImageTensor x = testsupport::random_image(32, 32, 3, rng);
    const nn::ActivationStack s = nn::forward(model, x);

    std::vector<double> expected(32 * 32 * 8);
    reference::naive_conv3x3(x.data.data(), 32, 32, 3, model.conv1.w.data(),
                             model.conv1.b.data(), 8, expected.data());
    for (size_t i = 0; i < expected.size(); ++i)
        CHECK(s.conv1_out.data[i] == doctest::Approx(expected[i]).epsilon(1e-12));

    // pooled relu output against the reference pooling of rectified values
    std::vector<double> relu = expected;
    for (double& v : relu) v = v > 0.0 ? v : 0.0;
    std::vector<double> pooled(16 * 16 * 8);
    reference::naive_avgpool2(relu.data(), 32, 32, 8, pooled.data());
    for (size_t i = 0; i < pooled.size(); ++i)
        CHECK(s.pool1.data[i] == doctest::Approx(pooled[i]).epsilon(1e-12));
}

TEST_CASE("input gradient matches central finite differences") {
    Rng rng(5);
    nn::ClassifierModel model = random_model(11);
    ImageTensor x = testsupport::random_image(32, 32, 3, rng);
    const int target = 4;

    const ImageTensor grad = nn::input_gradient(model, x, target);
    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 60; ++k) {
        const size_t idx = rng.below(x.data.size());
        ImageTensor xp = x, xm = x;
        xp.data[idx] += h;
        xm.data[idx] -= h;
        const double lp = nn::loss(nn::forward(model, xp).probs, target);
        const double lm = nn::loss(nn::forward(model, xm).probs, target);
        const double fd = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::fabs(fd), std::fabs(grad.data[idx]), 1e-6});
        worst = std::max(worst, std::fabs(fd - grad.data[idx]) / denom);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("parameter gradients match central finite differences") {
    Rng rng(6);
    nn::ClassifierModel model = random_model(12);
    const ImageTensor x = testsupport::random_image(32, 32, 3, rng);
    const int target = 2;

    const nn::ActivationStack stack = nn::forward(model, x);
    std::vector<double> dlogits = stack.probs;
    dlogits[target] -= 1.0;
    nn::Gradients grads(model);
    nn::backward(model, stack, dlogits, &grads);

    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 60; ++k) {
        const size_t idx = rng.below(model.parameter_count());
        const double saved = model.get_parameter(idx);
        model.set_parameter(idx, saved + h);
        const double lp = nn::loss(nn::forward(model, x).probs, target);
        model.set_parameter(idx, saved - h);
        const double lm = nn::loss(nn::forward(model, x).probs, target);
        model.set_parameter(idx, saved);
        const double fd = (lp - lm) / (2.0 * h);
        const double analytic = grads.get_parameter(idx);
        const double denom = std::max({std::fabs(fd), std::fabs(analytic), 1e-6});
        worst = std::max(worst, std::fabs(fd - analytic) / denom);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("argmax ties break to the lowest index") {
    CHECK(nn::argmax_lowest({0.1, 0.7, 0.2}) == 1);
    CHECK(nn::argmax_lowest({0.5, 0.5}) == 0);
    CHECK(nn::argmax_lowest({0.2, 0.5, 0.5}) == 1);
}

TEST_CASE("zeroing one class channel leaves the other class maps untouched") {
    Rng rng(8);
    nn::ClassifierModel model = random_model(14);
    const ImageTensor x = testsupport::random_image(32, 32, 3, rng);
    const nn::ActivationStack before = nn::forward(model, x);

    const int victim = 3;
    for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx)
            for (int i = 0; i < model.conv3.in_ch; ++i) model.conv3.weight(victim, ky, kx, i) = 0.0;
    model.conv3.b[victim] = 0.0;

    const nn::ActivationStack after = nn::forward(model, x);
    for (int y = 0; y < 8; ++y)
        for (int x2 = 0; x2 < 8; ++x2)
            for (int c = 0; c < 10; ++c) {
                if (c == victim) {
                    CHECK(after.class_maps.at(y, x2, c) == 0.0);
                } else {
                    CHECK(after.class_maps.at(y, x2, c) == before.class_maps.at(y, x2, c));
                }
            }
}

TEST_CASE("training is deterministic and zero epochs is the identity") {
    const eval::SyntheticDataset data = eval::generate_dataset(40, 77);

    nn::TrainOptions options;
    options.epochs = 2;
    options.batch_size = 8;
    options.seed = 5;

    nn::ClassifierModel a = random_model(20);
    nn::ClassifierModel b = random_model(20);

    SUBCASE("zero epochs leaves parameters untouched") {
        nn::TrainOptions none = options;
        none.epochs = 0;
        nn::ClassifierModel c = a;
        nn::train(c, data.images, data.labels, none);
        for (size_t i = 0; i < c.parameter_count(); ++i)
            CHECK(c.get_parameter(i) == a.get_parameter(i));
    }

    SUBCASE("same seed gives bit-identical checkpoints") {
        nn::train(a, data.images, data.labels, options);
        nn::train(b, data.images, data.labels, options);
        const std::string pa = "/tmp/semjpeg_ckpt_a.bin", pb = "/tmp/semjpeg_ckpt_b.bin";
        nn::save_checkpoint(a, pa);
        nn::save_checkpoint(b, pb);
        CHECK(file_bytes(pa) == file_bytes(pb));
        std::filesystem::remove(pa);
        std::filesystem::remove(pb);
    }

    SUBCASE("empty dataset is rejected") {
        nn::ClassifierModel c = a;
        CHECK_THROWS_AS(nn::train(c, {}, {}, options), ParameterError);
    }
}

TEST_CASE("worker count does not change the training trajectory") {
    const eval::SyntheticDataset data = eval::generate_dataset(24, 99);
    nn::TrainOptions options;
    options.epochs = 1;
    options.batch_size = 6;
    options.seed = 3;

    omp_set_num_threads(1);
    nn::ClassifierModel one = random_model(31);
    nn::train(one, data.images, data.labels, options);

    omp_set_num_threads(4);
    nn::ClassifierModel four = random_model(31);
    nn::train(four, data.images, data.labels, options);
    omp_set_num_threads(1);

    for (size_t i = 0; i < one.parameter_count(); ++i)
        CHECK(one.get_parameter(i) == four.get_parameter(i));
}

TEST_CASE("checkpoint round trip preserves the float32 image of the model") {
    nn::ClassifierModel model = random_model(44);
    model.saliency_threshold = 1.25;
    const std::string path = "/tmp/semjpeg_ckpt_rt.bin";
    nn::save_checkpoint(model, path);
    const nn::ClassifierModel back = nn::load_checkpoint(path);
    std::filesystem::remove(path);

    CHECK(back.classes == model.classes);
    CHECK(back.saliency_threshold == doctest::Approx(1.25));
    for (size_t i = 0; i < model.parameter_count(); ++i)
        CHECK(back.get_parameter(i) ==
              static_cast<double>(static_cast<float>(model.get_parameter(i))));
}

TEST_CASE("forward rejects mismatched input shapes") {
    const nn::ClassifierModel model = random_model(50);
    ImageTensor wrong(16, 16, 3);
    CHECK_THROWS_AS(nn::forward(model, wrong), ParameterError);
}
