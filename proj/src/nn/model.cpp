#include "semjpeg/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "semjpeg/util/errors.hpp"

namespace semjpeg::nn {

namespace {

constexpr int kHidden1 = 8;
constexpr int kHidden2 = 16;

void conv3x3_forward(const ImageTensor& in, const ConvLayer& layer, ImageTensor& out) {
    const int h = in.h, w = in.w, in_ch = in.c, out_ch = layer.out_ch;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int ky_lo = y == 0 ? 1 : 0, ky_hi = y == h - 1 ? 2 : 3;
            const int kx_lo = x == 0 ? 1 : 0, kx_hi = x == w - 1 ? 2 : 3;
            for (int o = 0; o < out_ch; ++o) {
                double acc = layer.b[o];
                for (int ky = ky_lo; ky < ky_hi; ++ky) {
                    const double* in_row = &in.data[(static_cast<size_t>(y + ky - 1) * w) * in_ch];
                    const double* w_row = &layer.w[((static_cast<size_t>(o) * 3 + ky) * 3) * in_ch];
                    for (int kx = kx_lo; kx < kx_hi; ++kx) {
                        const double* src = in_row + static_cast<size_t>(x + kx - 1) * in_ch;
                        const double* wt = w_row + static_cast<size_t>(kx) * in_ch;
                        for (int i = 0; i < in_ch; ++i) acc += src[i] * wt[i];
                    }
                }
                out.data[(static_cast<size_t>(y) * w + x) * out_ch + o] = acc;
            }
        }
    }
}

// Gradient w.r.t. the convolution input (gather form: every input cell is
// written by exactly one iteration, so scheduling cannot change the result).
void conv3x3_backward_input(const ImageTensor& dout, const ConvLayer& layer, ImageTensor& din) {
    const int h = din.h, w = din.w, in_ch = layer.in_ch, out_ch = layer.out_ch;
#pragma omp parallel for schedule(static)
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            for (int i = 0; i < in_ch; ++i) {
                double acc = 0.0;
                for (int ky = 0; ky < 3; ++ky) {
                    const int y = sy - ky + 1;
                    if (y < 0 || y >= h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int x = sx - kx + 1;
                        if (x < 0 || x >= w) continue;
                        const double* doutp = &dout.data[(static_cast<size_t>(y) * w + x) * out_ch];
                        for (int o = 0; o < out_ch; ++o)
                            acc += doutp[o] * layer.w[((static_cast<size_t>(o) * 3 + ky) * 3 + kx) * in_ch + i];
                    }
                }
                din.data[(static_cast<size_t>(sy) * w + sx) * in_ch + i] = acc;
            }
        }
    }
}

void conv3x3_backward_params(const ImageTensor& in, const ImageTensor& dout, ConvLayer& grad) {
    const int h = in.h, w = in.w, in_ch = in.c, out_ch = grad.out_ch;
#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_ch; ++o) {
        double db = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                db += dout.data[(static_cast<size_t>(y) * w + x) * out_ch + o];
        grad.b[o] += db;

        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                for (int i = 0; i < in_ch; ++i) {
                    double acc = 0.0;
                    for (int y = 0; y < h; ++y) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int x = 0; x < w; ++x) {
                            const int sx = x + kx - 1;
                            if (sx < 0 || sx >= w) continue;
                            acc += dout.data[(static_cast<size_t>(y) * w + x) * out_ch + o] *
                                   in.data[(static_cast<size_t>(sy) * w + sx) * in_ch + i];
                        }
                    }
                    grad.w[((static_cast<size_t>(o) * 3 + ky) * 3 + kx) * in_ch + i] += acc;
                }
            }
        }
    }
}

// relu followed by 2x2 mean pooling, fused.
void relu_avgpool2(const ImageTensor& in, ImageTensor& out) {
    const int oh = in.h / 2, ow = in.w / 2, ch = in.c;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            for (int k = 0; k < ch; ++k) {
                double acc = 0.0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const double v =
                            in.data[(static_cast<size_t>(2 * y + dy) * in.w + 2 * x + dx) * ch + k];
                        if (v > 0.0) acc += v;
                    }
                out.data[(static_cast<size_t>(y) * ow + x) * ch + k] = acc * 0.25;
            }
        }
    }
}

void relu_avgpool2_backward(const ImageTensor& conv_out, const ImageTensor& dpool,
                            ImageTensor& dconv) {
    const int oh = dpool.h, ow = dpool.w, ch = dpool.c;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < 2 * oh; ++y) {
        for (int x = 0; x < 2 * ow; ++x) {
            for (int k = 0; k < ch; ++k) {
                const double v = conv_out.data[(static_cast<size_t>(y) * conv_out.w + x) * ch + k];
                const double g =
                    dpool.data[(static_cast<size_t>(y / 2) * ow + x / 2) * ch + k] * 0.25;
                dconv.data[(static_cast<size_t>(y) * conv_out.w + x) * ch + k] = v > 0.0 ? g : 0.0;
            }
        }
    }
}

void softmax(const std::vector<double>& logits, std::vector<double>& probs) {
    probs.resize(logits.size());
    double max_logit = logits[0];
    for (double v : logits) max_logit = std::max(max_logit, v);
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - max_logit);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
}

void check_input(const ClassifierModel& model, const ImageTensor& x) {
    if (x.h != model.input_h || x.w != model.input_w || x.c != model.input_c)
        throw ParameterError("forward: input shape does not match model");
}

void add_jitter(ImageTensor& t, double amp, Rng& rng) {
    if (amp <= 0.0) return;
    for (double& v : t.data) v += rng.uniform(-amp, amp);
}

double tensor_rms(const ImageTensor& t) {
    double acc = 0.0;
    for (double v : t.data) acc += v * v;
    return std::sqrt(acc / static_cast<double>(t.data.size()));
}

// Inputs are remapped from [0,1] to [-1,1] before the first convolution.
// All-positive inputs entangle every gradient direction with the image mean,
// and the sqrt(1/fan_in) initialization shrinks activations layer by layer;
// centering plus the gain keeps the logit scale workable for SGD.
constexpr double kInputCenter = 0.5;
constexpr double kInputGain = 2.0;

ActivationStack forward_impl(const ClassifierModel& model, const ImageTensor& x,
                             double input_amp, double act_amp, Rng* rng) {
    check_input(model, x);
    ActivationStack s;
    s.input = x;
    if (rng) add_jitter(s.input, input_amp, *rng);
    for (double& v : s.input.data) v = kInputGain * (v - kInputCenter);  // as conv1 sees it

    const int h = model.input_h, w = model.input_w;
    s.conv1_out = ImageTensor(h, w, model.conv1.out_ch);
    conv3x3_forward(s.input, model.conv1, s.conv1_out);
    s.pool1 = ImageTensor(h / 2, w / 2, model.conv1.out_ch);
    relu_avgpool2(s.conv1_out, s.pool1);
    if (rng) add_jitter(s.pool1, act_amp * tensor_rms(s.pool1), *rng);

    s.conv2_out = ImageTensor(h / 2, w / 2, model.conv2.out_ch);
    conv3x3_forward(s.pool1, model.conv2, s.conv2_out);
    s.pool2 = ImageTensor(h / 4, w / 4, model.conv2.out_ch);
    relu_avgpool2(s.conv2_out, s.pool2);
    if (rng) add_jitter(s.pool2, act_amp * tensor_rms(s.pool2), *rng);

    s.class_maps = ImageTensor(h / 4, w / 4, model.conv3.out_ch);
    conv3x3_forward(s.pool2, model.conv3, s.class_maps);

    // global average pooling over each class map
    const int cells = s.class_maps.h * s.class_maps.w;
    s.logits.assign(model.classes, 0.0);
    for (int y = 0; y < s.class_maps.h; ++y)
        for (int x2 = 0; x2 < s.class_maps.w; ++x2)
            for (int c = 0; c < model.classes; ++c)
                s.logits[c] += s.class_maps.at(y, x2, c);
    for (double& v : s.logits) v /= static_cast<double>(cells);

    softmax(s.logits, s.probs);
    return s;
}

} // namespace

ClassifierModel ClassifierModel::create(int classes, std::uint64_t seed) {
    if (classes < 2) throw ParameterError("create: need at least two classes");
    ClassifierModel m;
    m.classes = classes;
    m.conv1 = ConvLayer(m.input_c, kHidden1);
    m.conv2 = ConvLayer(kHidden1, kHidden2);
    m.conv3 = ConvLayer(kHidden2, classes);
    Rng rng(seed);
    for (ConvLayer* layer : {&m.conv1, &m.conv2, &m.conv3}) {
        const double k = std::sqrt(1.0 / (9.0 * layer->in_ch));
        for (double& v : layer->w) v = rng.uniform(-k, k);
        // biases start at zero
    }
    return m;
}

size_t ClassifierModel::parameter_count() const {
    auto count = [](const ConvLayer& l) { return l.w.size() + l.b.size(); };
    return count(conv1) + count(conv2) + count(conv3);
}

namespace {

// Flat parameter order: conv1.w, conv1.b, conv2.w, conv2.b, conv3.w, conv3.b.
template <typename Layer>
auto* locate_parameter(Layer* l1, Layer* l2, Layer* l3, size_t index) {
    for (auto* layer : {l1, l2, l3}) {
        if (index < layer->w.size()) return &layer->w[index];
        index -= layer->w.size();
        if (index < layer->b.size()) return &layer->b[index];
        index -= layer->b.size();
    }
    throw ParameterError("parameter index out of range");
}

} // namespace

double ClassifierModel::get_parameter(size_t index) const {
    return *locate_parameter(&conv1, &conv2, &conv3, index);
}

void ClassifierModel::set_parameter(size_t index, double value) {
    *locate_parameter(&conv1, &conv2, &conv3, index) = value;
}

double Gradients::get_parameter(size_t index) const {
    return *locate_parameter(&g1, &g2, &g3, index);
}

void Gradients::add_scaled(const Gradients& other, double scale) {
    auto add = [scale](ConvLayer& dst, const ConvLayer& src) {
        for (size_t i = 0; i < dst.w.size(); ++i) dst.w[i] += scale * src.w[i];
        for (size_t i = 0; i < dst.b.size(); ++i) dst.b[i] += scale * src.b[i];
    };
    add(g1, other.g1);
    add(g2, other.g2);
    add(g3, other.g3);
}

ActivationStack forward(const ClassifierModel& model, const ImageTensor& x) {
    return forward_impl(model, x, 0.0, 0.0, nullptr);
}

ActivationStack forward_jittered(const ClassifierModel& model, const ImageTensor& x,
                                 double input_amp, double act_amp, Rng& rng) {
    return forward_impl(model, x, input_amp, act_amp, &rng);
}

double loss(const std::vector<double>& probs, int target) {
    if (target < 0 || target >= static_cast<int>(probs.size()))
        throw ParameterError("loss: target outside class range");
    return -std::log(probs[static_cast<size_t>(target)]);
}

ImageTensor backward(const ClassifierModel& model, const ActivationStack& stack,
                     const std::vector<double>& dlogits, Gradients* param_grads) {
    const int mh = stack.class_maps.h, mw = stack.class_maps.w;
    const double inv_cells = 1.0 / static_cast<double>(mh * mw);

    ImageTensor dmaps(mh, mw, model.classes);
    for (int y = 0; y < mh; ++y)
        for (int x = 0; x < mw; ++x)
            for (int c = 0; c < model.classes; ++c)
                dmaps.at(y, x, c) = dlogits[static_cast<size_t>(c)] * inv_cells;

    if (param_grads) conv3x3_backward_params(stack.pool2, dmaps, param_grads->g3);
    ImageTensor dpool2(mh, mw, model.conv2.out_ch);
    conv3x3_backward_input(dmaps, model.conv3, dpool2);

    ImageTensor dconv2(stack.conv2_out.h, stack.conv2_out.w, stack.conv2_out.c);
    relu_avgpool2_backward(stack.conv2_out, dpool2, dconv2);
    if (param_grads) conv3x3_backward_params(stack.pool1, dconv2, param_grads->g2);
    ImageTensor dpool1(stack.pool1.h, stack.pool1.w, stack.pool1.c);
    conv3x3_backward_input(dconv2, model.conv2, dpool1);

    ImageTensor dconv1(stack.conv1_out.h, stack.conv1_out.w, stack.conv1_out.c);
    relu_avgpool2_backward(stack.conv1_out, dpool1, dconv1);
    if (param_grads) conv3x3_backward_params(stack.input, dconv1, param_grads->g1);
    ImageTensor dinput(stack.input.h, stack.input.w, stack.input.c);
    conv3x3_backward_input(dconv1, model.conv1, dinput);
    for (double& v : dinput.data) v *= kInputGain;  // chain rule through the input remap
    return dinput;
}

ImageTensor input_gradient(const ClassifierModel& model, const ImageTensor& x, int target) {
    const ActivationStack stack = forward(model, x);
    std::vector<double> dlogits = stack.probs;
    dlogits[static_cast<size_t>(target)] -= 1.0;
    return backward(model, stack, dlogits, nullptr);
}

ImageTensor logit_input_gradient(const ClassifierModel& model, const ActivationStack& stack,
                                 int k) {
    std::vector<double> dlogits(model.classes, 0.0);
    dlogits[static_cast<size_t>(k)] = 1.0;
    return backward(model, stack, dlogits, nullptr);
}

ImageTensor prob_input_gradient(const ClassifierModel& model, const ActivationStack& stack,
                                int k) {
    // d softmax_k / d logit_j = p_k ([j == k] - p_j)
    const double pk = stack.probs[static_cast<size_t>(k)];
    std::vector<double> dlogits(model.classes, 0.0);
    for (int j = 0; j < model.classes; ++j)
        dlogits[static_cast<size_t>(j)] = pk * ((j == k ? 1.0 : 0.0) - stack.probs[static_cast<size_t>(j)]);
    return backward(model, stack, dlogits, nullptr);
}

int argmax_lowest(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[static_cast<size_t>(i)] > values[static_cast<size_t>(best)]) best = i;
    return best;
}

int predict_top1(const ClassifierModel& model, const ImageTensor& x) {
    return argmax_lowest(forward(model, x).probs);
}

TrainStats train(ClassifierModel& model, const std::vector<ImageTensor>& images,
                 const std::vector<int>& labels, const TrainOptions& options) {
    if (images.empty()) throw ParameterError("train: empty dataset");
    if (images.size() != labels.size())
        throw ParameterError("train: image and label counts differ");

    TrainStats stats;
    const int n = static_cast<int>(images.size());
    Rng rng(options.seed);
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

    Gradients velocity(model);

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        double lr = options.learning_rate * std::pow(options.lr_decay, epoch);
        if (options.warmup_epochs > 0 && epoch < options.warmup_epochs) {
            const double ramp = (epoch + 1.0) / (options.warmup_epochs + 1.0);
            lr = options.learning_rate * std::max(0.125, ramp);
        }
        // Fisher-Yates with our portable Rng
        for (int i = n - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)], order[rng.below(static_cast<std::uint64_t>(i + 1))]);

        double epoch_loss = 0.0;
        for (int start = 0; start < n; start += options.batch_size) {
            const int count = std::min(options.batch_size, n - start);

            std::vector<Gradients> sample_grads(static_cast<size_t>(count), Gradients(model));
            std::vector<double> sample_loss(static_cast<size_t>(count), 0.0);
#pragma omp parallel for schedule(static)
            for (int s = 0; s < count; ++s) {
                const int idx = order[static_cast<size_t>(start + s)];
                const ActivationStack stack = forward(model, images[static_cast<size_t>(idx)]);
                std::vector<double> dlogits = stack.probs;
                dlogits[static_cast<size_t>(labels[static_cast<size_t>(idx)])] -= 1.0;
                backward(model, stack, dlogits, &sample_grads[static_cast<size_t>(s)]);
                sample_loss[static_cast<size_t>(s)] =
                    loss(stack.probs, labels[static_cast<size_t>(idx)]);
            }

            // fixed-order reduction keeps the trajectory worker-count independent
            Gradients batch(model);
            for (int s = 0; s < count; ++s)
                batch.add_scaled(sample_grads[static_cast<size_t>(s)], 1.0 / count);
            for (int s = 0; s < count; ++s) epoch_loss += sample_loss[static_cast<size_t>(s)];

            if (options.clip_norm > 0.0) {
                double norm_sq = 0.0;
                for (size_t i = 0; i < model.parameter_count(); ++i) {
                    const double g = batch.get_parameter(i);
                    norm_sq += g * g;
                }
                if (norm_sq > options.clip_norm * options.clip_norm) {
                    const double scale = options.clip_norm / std::sqrt(norm_sq);
                    Gradients clipped(model);
                    clipped.add_scaled(batch, scale);
                    batch = std::move(clipped);
                }
            }

            auto update = [&](ConvLayer& param, ConvLayer& vel, const ConvLayer& grad) {
                for (size_t i = 0; i < param.w.size(); ++i) {
                    vel.w[i] = options.momentum * vel.w[i] - lr * grad.w[i];
                    param.w[i] += vel.w[i];
                }
                for (size_t i = 0; i < param.b.size(); ++i) {
                    vel.b[i] = options.momentum * vel.b[i] - lr * grad.b[i];
                    param.b[i] += vel.b[i];
                }
            };
            update(model.conv1, velocity.g1, batch.g1);
            update(model.conv2, velocity.g2, batch.g2);
            update(model.conv3, velocity.g3, batch.g3);
        }
        stats.epoch_loss.push_back(epoch_loss / n);
    }

    int correct = 0;
    for (int i = 0; i < n; ++i)
        if (predict_top1(model, images[static_cast<size_t>(i)]) == labels[static_cast<size_t>(i)])
            ++correct;
    stats.final_train_accuracy = 100.0 * correct / n;
    return stats;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw ParameterError("checkpoint: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ofstream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

float get_f32(std::ifstream& in) {
    const std::uint32_t bits = get_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void write_layer(std::ofstream& out, const ConvLayer& layer) {
    for (double v : layer.w) put_f32(out, static_cast<float>(v));
    for (double v : layer.b) put_f32(out, static_cast<float>(v));
}

void read_layer(std::ifstream& in, ConvLayer& layer) {
    for (double& v : layer.w) v = get_f32(in);
    for (double& v : layer.b) v = get_f32(in);
}

} // namespace

void save_checkpoint(const ClassifierModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("checkpoint: cannot write " + path);
    out.write("SJC1", 4);
    put_u32(out, static_cast<std::uint32_t>(model.input_h));
    put_u32(out, static_cast<std::uint32_t>(model.input_w));
    put_u32(out, static_cast<std::uint32_t>(model.input_c));
    put_u32(out, static_cast<std::uint32_t>(model.classes));
    put_u32(out, static_cast<std::uint32_t>(model.conv1.out_ch));
    put_u32(out, static_cast<std::uint32_t>(model.conv2.out_ch));
    put_f32(out, static_cast<float>(model.saliency_threshold));
    write_layer(out, model.conv1);
    write_layer(out, model.conv2);
    write_layer(out, model.conv3);
    if (!out) throw ParameterError("checkpoint: write failed for " + path);
}

ClassifierModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SJC1", 4) != 0)
        throw ParameterError("checkpoint: bad magic in " + path);
    ClassifierModel m;
    m.input_h = static_cast<int>(get_u32(in));
    m.input_w = static_cast<int>(get_u32(in));
    m.input_c = static_cast<int>(get_u32(in));
    m.classes = static_cast<int>(get_u32(in));
    const int h1 = static_cast<int>(get_u32(in));
    const int h2 = static_cast<int>(get_u32(in));
    m.conv1 = ConvLayer(m.input_c, h1);
    m.conv2 = ConvLayer(h1, h2);
    m.conv3 = ConvLayer(h2, m.classes);
    m.saliency_threshold = get_f32(in);
    read_layer(in, m.conv1);
    read_layer(in, m.conv2);
    read_layer(in, m.conv3);
    if (!in) throw ParameterError("checkpoint: truncated file " + path);
    return m;
}

} // namespace semjpeg::nn
