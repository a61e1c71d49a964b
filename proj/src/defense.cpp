#include "semjpeg/defense.hpp"

#include "semjpeg/util/errors.hpp"

namespace semjpeg::defense {

Method method_from_name(const std::string& name) {
    if (name == "jpeg" || name == "plain_jpeg") return Method::PlainJpeg;
    if (name == "msroi") return Method::Msroi;
    if (name == "aug-msroi" || name == "aug_msroi") return Method::AugMsroi;
    throw ParameterError("unknown defense method: " + name);
}

std::string method_name(Method method) {
    switch (method) {
        case Method::PlainJpeg: return "jpeg";
        case Method::Msroi: return "msroi";
        case Method::AugMsroi: return "aug-msroi";
    }
    return "?";
}

DefenseOutcome defend(const nn::ClassifierModel& model, const ImageTensor& x,
                      const DefenseConfig& config) {
    DefenseOutcome out;
    if (config.method == Method::PlainJpeg) {
        out.stream = jpeg::encode_baseline(x, config.quality);
        out.defended = jpeg::decode_baseline(out.stream);
        return out;
    }

    if (config.q_max > config.quality)
        throw ParameterError("defend: q_max must not exceed the global quality");

    if (config.method == Method::Msroi) {
        out.map = saliency::msroi_map(model, x, config.aug.threshold);
    } else {
        out.map = saliency::aug_msroi_map(model, x, config.aug);
    }
    out.grid = saliency::map_to_block_qualities(out.map, config.q_min, config.q_max);
    out.stream = jpeg::adaptive_requantize(x, out.grid, config.quality);
    out.defended = jpeg::decode_baseline(out.stream);
    return out;
}

} // namespace semjpeg::defense
