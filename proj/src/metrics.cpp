#include "facerestore/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "facerestore/tensor_io.hpp"

namespace facerestore {

namespace {

std::vector<double> ssim_window() {
    std::vector<double> w(static_cast<std::size_t>(kSsimWindow) * kSsimWindow);
    const int r = kSsimWindow / 2;
    double sum = 0.0;
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) {
            const double v = std::exp(-(x * x + y * y) / (2.0 * kSsimSigma * kSsimSigma));
            w[static_cast<std::size_t>(y + r) * kSsimWindow + (x + r)] = v;
            sum += v;
        }
    for (double& v : w) v /= sum;
    return w;
}

std::vector<double> flatten_luma(const ImageStack& img) {
    const ImagePlane l = rgb_to_luma(img);
    return {l.data().begin(), l.data().end()};
}

}  // namespace

double psnr(const ImageStack& a, const ImageStack& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("psnr: images differ in shape");
    double se = 0.0;
    std::size_t n = 0;
    for (int c = 0; c < a.channel_count(); ++c) {
        const auto pa = a.channel(c).data();
        const auto pb = b.channel(c).data();
        for (std::size_t i = 0; i < pa.size(); ++i) se += (pa[i] - pb[i]) * (pa[i] - pb[i]);
        n += pa.size();
    }
    if (n == 0) throw std::invalid_argument("psnr: empty images");
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(static_cast<double>(n) / se);
}

double ssim(const ImagePlane& a, const ImagePlane& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: images differ in size");
    if (a.width() < kSsimWindow || a.height() < kSsimWindow)
        throw std::invalid_argument("ssim: images must be at least 11x11");
    static const std::vector<double> w = ssim_window();
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    double total = 0.0;
    int count = 0;
    for (int y0 = 0; y0 + kSsimWindow <= a.height(); ++y0)
        for (int x0 = 0; x0 + kSsimWindow <= a.width(); ++x0) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int y = 0; y < kSsimWindow; ++y)
                for (int x = 0; x < kSsimWindow; ++x) {
                    const double g = w[static_cast<std::size_t>(y) * kSsimWindow + x];
                    const double va = a(x0 + x, y0 + y);
                    const double vb = b(x0 + x, y0 + y);
                    ma += g * va;
                    mb += g * vb;
                    saa += g * va * va;
                    sbb += g * vb * vb;
                    sab += g * va * vb;
                }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            ++count;
        }
    return total / count;
}

double ssim(const ImageStack& a, const ImageStack& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("ssim: images differ in size");
    return ssim(rgb_to_luma(a), rgb_to_luma(b));
}

std::vector<double> IdentityProjector::project(const ImageStack& img) const {
    if (img.width() != width || img.height() != height)
        throw std::invalid_argument("identity projection: image is " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + ", projector expects " + std::to_string(width) +
                                    "x" + std::to_string(height));
    const auto v = flatten_luma(img);
    const std::size_t n = mean.size();
    std::vector<double> coeffs(static_cast<std::size_t>(dims()), 0.0);
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) s += basis[j * n + p] * (v[p] - mean[p]);
        coeffs[j] = s;
    }
    return coeffs;
}

IdentityProjector build_projector(const std::vector<ImageStack>& training, int max_dims) {
    if (training.size() < 2) throw std::invalid_argument("build_projector: need at least two training images");
    if (max_dims < 1) throw std::invalid_argument("build_projector: max_dims must be >= 1");
    const int w = training.front().width();
    const int h = training.front().height();
    for (const auto& t : training)
        if (t.width() != w || t.height() != h) throw std::invalid_argument("build_projector: training images differ in size");

    const Eigen::Index n = static_cast<Eigen::Index>(training.size());
    const Eigen::Index d = static_cast<Eigen::Index>(w) * h;
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto v = flatten_luma(training[static_cast<std::size_t>(i)]);
        x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), d);
    }
    const Eigen::RowVectorXd mu = x.colwise().mean();
    x.rowwise() -= mu;

    // Eigenvectors of X X^T (N x N) map to covariance eigenvectors via X^T u / sqrt(lambda).
    const Eigen::MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd& lambda = es.eigenvalues();
    const double top = lambda(n - 1);
    const int want = std::min<int>(max_dims, static_cast<int>(n) - 1);

    IdentityProjector p;
    p.width = w;
    p.height = h;
    p.mean.assign(mu.data(), mu.data() + d);
    for (Eigen::Index k = n - 1; k >= 0 && p.dims() < want; --k) {
        if (!(lambda(k) > top * 1e-12) || lambda(k) <= 0.0) break;
        Eigen::VectorXd v = x.transpose() * es.eigenvectors().col(k);
        v.normalize();
        // Sign convention: largest-magnitude entry positive.
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0) v = -v;
        p.basis.insert(p.basis.end(), v.data(), v.data() + d);
        p.eigenvalues.push_back(lambda(k) / static_cast<double>(n - 1));
    }
    return p;
}

double identity_similarity(const ImageStack& result, const ImageStack& gt, const IdentityProjector& projector) {
    const auto a = projector.project(result);
    const auto b = projector.project(gt);
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

void save_projector(const IdentityProjector& projector, const std::filesystem::path& path) {
    auto to_float = [](const std::vector<double>& v) { return std::vector<float>(v.begin(), v.end()); };
    const auto dd = static_cast<std::uint32_t>(projector.mean.size());
    const auto k = static_cast<std::uint32_t>(projector.dims());
    std::vector<Tensor> t;
    t.push_back({"mean", {dd}, to_float(projector.mean)});
    t.push_back({"basis", {k, dd}, to_float(projector.basis)});
    t.push_back({"eigenvalues", {k}, to_float(projector.eigenvalues)});
    t.push_back({"dims", {2}, {static_cast<float>(projector.width), static_cast<float>(projector.height)}});
    write_tensor_file(path, t);
}

IdentityProjector load_projector(const std::filesystem::path& path) {
    const auto tensors = read_tensor_file(path);
    auto find = [&](const std::string& name) -> const Tensor& {
        for (const auto& t : tensors)
            if (t.name == name) return t;
        throw TensorFileError(TensorFileError::Kind::MissingTensor, path.string() + ": missing tensor '" + name + "'");
    };
    const Tensor& mean = find("mean");
    const Tensor& basis = find("basis");
    const Tensor& eig = find("eigenvalues");
    const Tensor& dims = find("dims");
    IdentityProjector p;
    if (dims.values.size() != 2 || mean.dims.size() != 1 || basis.dims.size() != 2 || basis.dims[1] != mean.dims[0] ||
        eig.dims.size() != 1 || eig.dims[0] != basis.dims[0])
        throw TensorFileError(TensorFileError::Kind::ShapeMismatch, path.string() + ": inconsistent projector shapes");
    p.width = static_cast<int>(dims.values[0]);
    p.height = static_cast<int>(dims.values[1]);
    if (static_cast<std::size_t>(p.width) * static_cast<std::size_t>(p.height) != mean.values.size())
        throw TensorFileError(TensorFileError::Kind::ShapeMismatch, path.string() + ": mean length does not match dims");
    p.mean.assign(mean.values.begin(), mean.values.end());
    p.basis.assign(basis.values.begin(), basis.values.end());
    p.eigenvalues.assign(eig.values.begin(), eig.values.end());
    return p;
}

}  // namespace facerestore
