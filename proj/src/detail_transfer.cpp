#include "facerestore/detail_transfer.hpp"

#include <stdexcept>

namespace facerestore {

namespace {

ImagePlane product(const ImagePlane& a, const ImagePlane& b) {
    ImagePlane out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

}  // namespace

void GuidedFilterParams::validate() const {
    if (radius < 1) throw std::invalid_argument("guided filter radius must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("guided filter epsilon must be positive");
}

ImagePlane guided_filter(const ImagePlane& input, const ImagePlane& guide, const GuidedFilterParams& params) {
    params.validate();
    if (!input.same_shape(guide)) throw std::invalid_argument("guided_filter: input and guide differ in size");
    const int r = params.radius;
    const ImagePlane mean_i = box_filter(guide, r);
    const ImagePlane mean_p = box_filter(input, r);
    const ImagePlane corr_ip = box_filter(product(guide, input), r);
    const ImagePlane corr_ii = box_filter(product(guide, guide), r);

    ImagePlane a(input.width(), input.height());
    ImagePlane b(input.width(), input.height());
    for (std::size_t k = 0; k < input.size(); ++k) {
        const double mi = mean_i.data()[k];
        const double mp = mean_p.data()[k];
        const double var = corr_ii.data()[k] - mi * mi;
        const double cov = corr_ip.data()[k] - mi * mp;
        a.data()[k] = cov / (var + params.epsilon);
        b.data()[k] = mp - a.data()[k] * mi;
    }
    const ImagePlane mean_a = box_filter(a, r);
    const ImagePlane mean_b = box_filter(b, r);
    ImagePlane q(input.width(), input.height());
    for (std::size_t k = 0; k < q.size(); ++k) q.data()[k] = mean_a.data()[k] * guide.data()[k] + mean_b.data()[k];
    return q;
}

TransferResult transfer_details_full(const ImageStack& base, const ImageStack& regressed,
                                     const GuidedFilterParams& params) {
    if (base.width() != regressed.width() || base.height() != regressed.height())
        throw std::invalid_argument("transfer_details: base and regressed differ in size");
    const ImagePlane base_luma = rgb_to_luma(base);
    const ImagePlane reg = rgb_to_luma(regressed);

    TransferResult r;
    r.filtered_base = guided_filter(base_luma, reg, params);
    r.filtered_regressed = guided_filter(reg, reg, params);
    r.detail = ImagePlane(reg.width(), reg.height());
    ImagePlane out(reg.width(), reg.height());
    for (std::size_t k = 0; k < out.size(); ++k) {
        r.detail.data()[k] = reg.data()[k] - r.filtered_regressed.data()[k];
        out.data()[k] = reg.data()[k] + (r.filtered_base.data()[k] - r.filtered_regressed.data()[k]);
    }
    r.luma = clamp01(std::move(out));
    r.output = luma_recombine(r.luma, base);
    return r;
}

ImageStack transfer_details(const ImageStack& base, const ImageStack& regressed, const GuidedFilterParams& params) {
    return transfer_details_full(base, regressed, params).output;
}

}  // namespace facerestore
