#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semjpeg/image.hpp"
#include "semjpeg/util/rng.hpp"

namespace semjpeg::nn {

// 3x3 convolution, stride 1, zero padding 1. Weight layout is
// [out][ky][kx][in], matching the channels-last activation layout.
struct ConvLayer {
    int in_ch = 0;
    int out_ch = 0;
    std::vector<double> w;
    std::vector<double> b;

    ConvLayer() = default;
    ConvLayer(int in, int out)
        : in_ch(in), out_ch(out), w(static_cast<size_t>(out) * 9 * in, 0.0), b(out, 0.0) {}

    double& weight(int o, int ky, int kx, int i) {
        return w[((static_cast<size_t>(o) * 3 + ky) * 3 + kx) * in_ch + i];
    }
};

// Small convolutional classifier: two conv/relu/avgpool blocks followed by a
// per-class activation convolution, global average pooling and softmax. The
// class-activation maps (one 8x8 channel per class) are what the saliency
// module reads.
//
// Checkpoint layout (little-endian):
//   bytes 0..3   magic "SJC1"
//   u32          input_h, input_w, input_c, classes
//   u32          hidden1, hidden2 (conv channel counts)
//   f32          saliency_threshold
//   f32[]        conv1.w, conv1.b, conv2.w, conv2.b, conv3.w, conv3.b
// Weight order within a layer is [out][ky][kx][in], row-major.
struct ClassifierModel {
    int input_h = 32;
    int input_w = 32;
    int input_c = 3;
    int classes = 10;
    ConvLayer conv1;
    ConvLayer conv2;
    ConvLayer conv3;
    // Class-confidence threshold for saliency maps, calibrated after
    // training on clean validation images. 0 until calibrated.
    double saliency_threshold = 0.0;

    static ClassifierModel create(int classes, std::uint64_t seed);

    size_t parameter_count() const;
    double get_parameter(size_t index) const;
    void set_parameter(size_t index, double value);
};

// Everything one forward pass produces; retained for backprop and saliency.
// conv outputs are pre-rectification, pool tensors are post relu+pool.
struct ActivationStack {
    ImageTensor input;       // what conv1 consumed: jittered and mean-centered
    ImageTensor conv1_out;   // 32x32x8
    ImageTensor pool1;       // 16x16x8
    ImageTensor conv2_out;   // 16x16x16
    ImageTensor pool2;       // 8x8x16
    ImageTensor class_maps;  // 8x8xC
    std::vector<double> logits;
    std::vector<double> probs;
};

ActivationStack forward(const ClassifierModel& model, const ImageTensor& x);

// Forward pass with additive uniform jitter on the input of every layer:
// the image itself and each pooled activation before the next convolution.
// input_amp is in pixel units; act_amp is relative to the RMS of the tensor
// being jittered. Draw order is fixed, so one Rng state gives one result.
ActivationStack forward_jittered(const ClassifierModel& model, const ImageTensor& x,
                                 double input_amp, double act_amp, Rng& rng);

// Cross-entropy against a probability vector: -log p[target].
double loss(const std::vector<double>& probs, int target);

struct Gradients {
    ConvLayer g1, g2, g3;  // same shapes as the model's layers

    explicit Gradients(const ClassifierModel& m)
        : g1(m.conv1.in_ch, m.conv1.out_ch),
          g2(m.conv2.in_ch, m.conv2.out_ch),
          g3(m.conv3.in_ch, m.conv3.out_ch) {}

    double get_parameter(size_t index) const;
    void add_scaled(const Gradients& other, double scale);
};

// Backpropagate an arbitrary logit-space gradient; returns dL/dx and, when
// param_grads is non-null, adds parameter gradients into it.
ImageTensor backward(const ClassifierModel& model, const ActivationStack& stack,
                     const std::vector<double>& dlogits, Gradients* param_grads);

// dL/dx for the cross-entropy loss at `target`.
ImageTensor input_gradient(const ClassifierModel& model, const ImageTensor& x, int target);

// d logit_k / dx and d softmax_k / dx at a cached forward pass.
ImageTensor logit_input_gradient(const ClassifierModel& model, const ActivationStack& stack, int k);
ImageTensor prob_input_gradient(const ClassifierModel& model, const ActivationStack& stack, int k);

// Argmax with ties broken toward the lowest index.
int argmax_lowest(const std::vector<double>& values);
int predict_top1(const ClassifierModel& model, const ImageTensor& x);

struct TrainOptions {
    int epochs = 30;
    int batch_size = 16;
    double learning_rate = 0.1;
    double momentum = 0.9;
    double lr_decay = 0.95;   // per-epoch multiplier
    double clip_norm = 1.0;   // batch-gradient L2 clip, 0 disables
    int warmup_epochs = 2;    // linear ramp from lr/8; tames early momentum
    std::uint64_t seed = 1;
};

struct TrainStats {
    std::vector<double> epoch_loss;
    double final_train_accuracy = 0.0;
};

// Plain seeded SGD with momentum. Same seed and data give bit-identical
// parameters regardless of worker count: per-sample gradients are reduced
// in batch order.
TrainStats train(ClassifierModel& model, const std::vector<ImageTensor>& images,
                 const std::vector<int>& labels, const TrainOptions& options);

void save_checkpoint(const ClassifierModel& model, const std::string& path);
ClassifierModel load_checkpoint(const std::string& path);

} // namespace semjpeg::nn
