#pragma once

#include <string>

#include "semjpeg/image.hpp"
#include "semjpeg/jpeg/codec.hpp"
#include "semjpeg/nn/model.hpp"
#include "semjpeg/saliency.hpp"

namespace semjpeg::defense {

enum class Method { PlainJpeg, Msroi, AugMsroi };

Method method_from_name(const std::string& name);
std::string method_name(Method method);

struct DefenseConfig {
    Method method = Method::AugMsroi;
    int quality = 90;  // uniform quality (plain) / global requantization table
    int q_min = 20;    // adaptive methods only
    int q_max = 90;    // must not exceed quality
    saliency::AugConfig aug;  // jitter settings; aug.threshold is the saliency T
};

struct DefenseOutcome {
    jpeg::JpegBitstream stream;
    ImageTensor defended;              // decoded output of `stream`
    saliency::SaliencyMap map;         // empty for plain JPEG
    jpeg::BlockQualityGrid grid;       // empty for plain JPEG
};

// plain_jpeg: encode_baseline(x, quality).
// msroi/aug_msroi: saliency map -> per-block qualities -> adaptive
// requantization against the global table. The decoded image comes back so
// callers can classify it without reparsing the stream.
DefenseOutcome defend(const nn::ClassifierModel& model, const ImageTensor& x,
                      const DefenseConfig& config);

} // namespace semjpeg::defense
