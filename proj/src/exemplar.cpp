#include "facerestore/exemplar.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "facerestore/degrade.hpp"
#include "facerestore/errors.hpp"
#include "facerestore/image_io.hpp"

namespace facerestore {

namespace {

// Per-pixel variance at or below this counts as a flat (zero-variance) patch.
constexpr double kFlatVariance = 1e-12;

struct Centered {
    std::vector<double> values;
    double mean = 0.0;
    double sumsq = 0.0;
};

double window_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double centered_sumsq(std::span<const double> v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s;
}

bool is_flat(double sumsq, std::size_t n) { return sumsq <= kFlatVariance * static_cast<double>(n); }

// sqrt(a * a) == a in IEEE arithmetic, so identical patches give exactly 1.
double ncc_from(double cross, double sumsq_a, double sumsq_b) {
    return std::clamp(cross / std::sqrt(sumsq_a * sumsq_b), -1.0, 1.0);
}

Centered center_values(std::span<const double> v) {
    Centered c;
    c.mean = window_mean(v);
    c.values.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) c.values[k] = v[k] - c.mean;
    c.sumsq = centered_sumsq(v, c.mean);
    return c;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_entry(const ImagePlane& luma, const ExemplarOptions& o) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const int dims[4] = {luma.width(), luma.height(), o.patch_side, static_cast<int>(o.source)};
    h = fnv1a(h, dims, sizeof dims);
    h = fnv1a(h, &o.smooth_sigma, sizeof o.smooth_sigma);
    return fnv1a(h, luma.data().data(), luma.size() * sizeof(double));
}

std::vector<ExemplarDB::WindowStats> window_stats(const ImagePlane& plane, int side) {
    const int nx = plane.width() - side + 1;
    const int ny = plane.height() - side + 1;
    std::vector<ExemplarDB::WindowStats> stats(static_cast<std::size_t>(nx) * ny);
    std::vector<double> buf(static_cast<std::size_t>(side) * side);
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            for (int r = 0; r < side; ++r) {
                const auto row = plane.row(y + r);
                std::copy(row.begin() + x, row.begin() + x + side, buf.begin() + static_cast<std::ptrdiff_t>(r) * side);
            }
            const double m = window_mean(buf);
            stats[static_cast<std::size_t>(y) * nx + x] = {m, centered_sumsq(buf, m)};
        }
    return stats;
}

// Cache file: "FXDB" | u32 version | u64 hash | u32 count | count x (f64 mean, f64 sumsq), little-endian.
constexpr std::uint32_t kCacheVersion = 1;

void put_bytes(std::vector<unsigned char>& out, std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_bytes(const std::vector<unsigned char>& in, std::size_t& pos, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
    pos += static_cast<std::size_t>(n);
    return v;
}

std::optional<std::vector<ExemplarDB::WindowStats>> read_cache(const std::filesystem::path& file, std::uint64_t hash,
                                                               std::size_t expected) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != 4 + 4 + 8 + 4 + expected * 16 || std::string(bytes.begin(), bytes.begin() + 4) != "FXDB")
        return std::nullopt;
    std::size_t pos = 4;
    if (get_bytes(bytes, pos, 4) != kCacheVersion || get_bytes(bytes, pos, 8) != hash ||
        get_bytes(bytes, pos, 4) != expected)
        return std::nullopt;
    std::vector<ExemplarDB::WindowStats> stats(expected);
    for (auto& s : stats) {
        s.mean = std::bit_cast<double>(get_bytes(bytes, pos, 8));
        s.sumsq = std::bit_cast<double>(get_bytes(bytes, pos, 8));
    }
    return stats;
}

void write_cache(const std::filesystem::path& file, std::uint64_t hash, const std::vector<ExemplarDB::WindowStats>& stats) {
    std::vector<unsigned char> bytes = {'F', 'X', 'D', 'B'};
    put_bytes(bytes, kCacheVersion, 4);
    put_bytes(bytes, hash, 8);
    put_bytes(bytes, stats.size(), 4);
    for (const auto& s : stats) {
        put_bytes(bytes, std::bit_cast<std::uint64_t>(s.mean), 8);
        put_bytes(bytes, std::bit_cast<std::uint64_t>(s.sumsq), 8);
    }
    std::ofstream out(file, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> window_values(const ImagePlane& plane, int x0, int y0, int side) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(side) * side);
    for (int r = 0; r < side; ++r) {
        const auto row = plane.row(y0 + r);
        v.insert(v.end(), row.begin() + x0, row.begin() + x0 + side);
    }
    return v;
}

}  // namespace

void MatchParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (patch_side < 1) throw std::invalid_argument("patch side must be >= 1");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (!(effective_lambda() > 0.0)) throw std::invalid_argument("lambda must be positive");
}

ExemplarDB::Entry ExemplarDB::prepare(const ImageStack& img, const ExemplarOptions& options,
                                      const std::optional<std::filesystem::path>& cache_dir) {
    Entry e;
    e.hr = rgb_to_luma(img);
    if (options.source == RegressionSource::SmoothedToSharp) {
        const int size = 2 * static_cast<int>(std::ceil(3.0 * options.smooth_sigma)) + 1;
        e.search = convolve(e.hr, gen_gaussian_kernel(size, options.smooth_sigma));
    } else {
        e.search = e.hr;
    }
    e.hash = hash_entry(e.hr, options);
    const std::size_t expected = static_cast<std::size_t>(e.hr.width() - options.patch_side + 1) *
                                 static_cast<std::size_t>(e.hr.height() - options.patch_side + 1);
    if (cache_dir) {
        std::ostringstream name;
        name << std::hex << e.hash << ".fxdb";
        const auto file = *cache_dir / name.str();
        if (auto cached = read_cache(file, e.hash, expected)) {
            e.stats = std::move(*cached);
            return e;
        }
        e.stats = window_stats(e.search, options.patch_side);
        std::filesystem::create_directories(*cache_dir);
        write_cache(file, e.hash, e.stats);
        return e;
    }
    e.stats = window_stats(e.search, options.patch_side);
    return e;
}

ExemplarDB ExemplarDB::build(const std::vector<ImageStack>& images, const ExemplarOptions& options) {
    if (images.empty()) throw ConfigError("exemplar database is empty");
    if (options.patch_side < 1 || options.search_radius < 0)
        throw std::invalid_argument("exemplar options: invalid patch side or search radius");
    ExemplarDB db;
    db.options_ = options;
    db.width_ = images.front().width();
    db.height_ = images.front().height();
    for (const auto& img : images) {
        if (img.width() != db.width_ || img.height() != db.height_)
            throw std::invalid_argument("exemplars must share one resolution");
        if (img.width() < options.patch_side || img.height() < options.patch_side)
            throw std::invalid_argument("exemplar smaller than the patch size");
        db.entries_.push_back(prepare(img, options, std::nullopt));
    }
    return db;
}

ExemplarDB ExemplarDB::from_directory(const std::filesystem::path& dir, const ExemplarOptions& options,
                                      const std::optional<std::filesystem::path>& cache_dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("exemplar directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& f : std::filesystem::directory_iterator(dir)) {
        const auto ext = f.path().extension().string();
        if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ImageStack> images;
    for (const auto& f : files) images.push_back(load_image(f));
    if (!cache_dir) return build(images, options);

    if (images.empty()) throw ConfigError("exemplar database is empty: " + dir.string());
    ExemplarDB db;
    db.options_ = options;
    db.width_ = images.front().width();
    db.height_ = images.front().height();
    for (const auto& img : images) {
        if (img.width() != db.width_ || img.height() != db.height_)
            throw std::invalid_argument("exemplars must share one resolution");
        if (img.width() < options.patch_side || img.height() < options.patch_side)
            throw std::invalid_argument("exemplar smaller than the patch size");
        db.entries_.push_back(prepare(img, options, cache_dir));
    }
    return db;
}

double patch_ncc(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("patch_ncc: patch sizes differ");
    const Centered ca = center_values(a);
    const Centered cb = center_values(b);
    if (is_flat(ca.sumsq, a.size()) || is_flat(cb.sumsq, b.size())) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += ca.values[k] * cb.values[k];
    return ncc_from(s, ca.sumsq, cb.sumsq);
}

double mean_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("mean_abs_diff: patch sizes differ");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s / static_cast<double>(a.size());
}

double patch_distance(const Patch& a, const Patch& b, double alpha) {
    if (a.side != b.side || a.values.size() != b.values.size())
        throw std::invalid_argument("patch_distance: patch sides differ");
    return alpha * (1.0 - patch_ncc(a.values, b.values)) + (1.0 - alpha) * mean_abs_diff(a.values, b.values);
}

std::vector<Candidate> knn_search(const ExemplarDB& db, const ImagePlane& base, PixelCoord center,
                                  const MatchParams& params) {
    params.validate();
    if (db.size() == 0) throw ConfigError("exemplar database is empty");
    if (params.patch_side != db.options().patch_side)
        throw ConfigError("patch side " + std::to_string(params.patch_side) + " differs from the database's " +
                          std::to_string(db.options().patch_side));
    if (params.k > db.size())
        throw ConfigError("K = " + std::to_string(params.k) + " exceeds the " + std::to_string(db.size()) +
                          " exemplars available");
    if (base.width() != db.width() || base.height() != db.height())
        throw std::invalid_argument("knn_search: base image resolution differs from the exemplars");

    const int side = params.patch_side;
    const int r = db.options().search_radius;
    const std::size_t n = static_cast<std::size_t>(side) * side;
    const Patch query = extract_patch(base, center, side);
    const Centered qa = center_values(query.values);
    const bool query_flat = is_flat(qa.sumsq, n);
    const double alpha = params.alpha;

    struct Best {
        int exemplar;
        PixelCoord at;
        double distance;
    };
    std::vector<Best> winners;
    for (int e = 0; e < db.size(); ++e) {
        const ImagePlane& plane = db.search_plane(e);
        Best best{e, {}, std::numeric_limits<double>::infinity()};
        bool found = false;
        for (int qy = center.y - r; qy <= center.y + r; ++qy) {
            const int y0 = patch_origin(qy, side);
            if (y0 < 0 || y0 + side > plane.height()) continue;
            for (int qx = center.x - r; qx <= center.x + r; ++qx) {
                const int x0 = patch_origin(qx, side);
                if (x0 < 0 || x0 + side > plane.width()) continue;
                const auto st = db.stats(e, x0, y0);
                double cross = 0.0, absdiff = 0.0;
                for (int row = 0; row < side; ++row) {
                    const double* b = plane.row(y0 + row).data() + x0;
                    const double* a = query.values.data() + static_cast<std::size_t>(row) * side;
                    const double* ac = qa.values.data() + static_cast<std::size_t>(row) * side;
                    for (int k = 0; k < side; ++k) {
                        cross += ac[k] * (b[k] - st.mean);
                        absdiff += std::abs(a[k] - b[k]);
                    }
                }
                double ncc = 0.0;
                if (!query_flat && !is_flat(st.sumsq, n)) ncc = ncc_from(cross, qa.sumsq, st.sumsq);
                const double d = alpha * (1.0 - ncc) + (1.0 - alpha) * (absdiff / static_cast<double>(n));
                if (d < best.distance) {
                    best = {e, {qx, qy}, d};
                    found = true;
                }
            }
        }
        if (found) winners.push_back(best);
    }
    if (static_cast<int>(winners.size()) < params.k)
        throw ConfigError("search regions yielded only " + std::to_string(winners.size()) + " candidates for K = " +
                          std::to_string(params.k));
    std::stable_sort(winners.begin(), winners.end(),
                     [](const Best& a, const Best& b) { return a.distance < b.distance; });

    std::vector<Candidate> out;
    for (int i = 0; i < params.k; ++i) {
        const auto& w = winners[static_cast<std::size_t>(i)];
        const int x0 = patch_origin(w.at.x, side);
        const int y0 = patch_origin(w.at.y, side);
        Candidate c{w.exemplar, w.at, w.distance, window_values(db.search_plane(w.exemplar), x0, y0, side), {}};
        c.hr_values = db.options().source == RegressionSource::Matched ? c.values
                                                                        : window_values(db.hr_plane(w.exemplar), x0, y0, side);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<double> solve_regression(const std::vector<std::vector<double>>& columns, std::span<const double> target,
                                     double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("solve_regression: lambda must be positive");
    if (columns.empty()) throw std::invalid_argument("solve_regression: no candidate patches");
    const std::size_t k = columns.size();
    for (const auto& c : columns)
        if (c.size() != target.size()) throw std::invalid_argument("solve_regression: vector lengths differ");

    // Gram matrix G = H^T H + lambda Id and right-hand side H^T I.
    std::vector<double> g(k * k), rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < target.size(); ++p) s += columns[i][p] * columns[j][p];
            g[i * k + j] = g[j * k + i] = s;
        }
        g[i * k + i] += lambda;
        double s = 0.0;
        for (std::size_t p = 0; p < target.size(); ++p) s += columns[i][p] * target[p];
        rhs[i] = s;
    }

    // G = L L^T
    std::vector<double> l(k * k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double d = g[j * k + j];
        for (std::size_t p = 0; p < j; ++p) d -= l[j * k + p] * l[j * k + p];
        if (!(d > 0.0)) throw std::logic_error("solve_regression: system is not positive definite");
        l[j * k + j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < k; ++i) {
            double s = g[i * k + j];
            for (std::size_t p = 0; p < j; ++p) s -= l[i * k + p] * l[j * k + p];
            l[i * k + j] = s / l[j * k + j];
        }
    }
    std::vector<double> y(k), f(k);
    for (std::size_t i = 0; i < k; ++i) {
        double s = rhs[i];
        for (std::size_t p = 0; p < i; ++p) s -= l[i * k + p] * y[p];
        y[i] = s / l[i * k + i];
    }
    for (std::size_t i = k; i-- > 0;) {
        double s = y[i];
        for (std::size_t p = i + 1; p < k; ++p) s -= l[p * k + i] * f[p];
        f[i] = s / l[i * k + i];
    }

#ifndef NDEBUG
    double fn = 0.0, bn = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        fn += f[i] * f[i];
        bn += rhs[i] * rhs[i];
    }
    assert(std::sqrt(fn) <= std::sqrt(bn) / lambda * (1.0 + 1e-9) + 1e-300);
#endif
    return f;
}

EnergyTerms regression_energy(const std::vector<std::vector<double>>& columns, std::span<const double> target,
                              std::span<const double> coeffs, double lambda) {
    if (columns.size() != coeffs.size()) throw std::invalid_argument("regression_energy: coefficient count mismatch");
    EnergyTerms e;
    for (std::size_t p = 0; p < target.size(); ++p) {
        double r = -target[p];
        for (std::size_t i = 0; i < columns.size(); ++i) r += columns[i].at(p) * coeffs[i];
        e.data += r * r;
    }
    for (double f : coeffs) e.reg += lambda * f * f;
    e.total = e.data + e.reg;
    return e;
}

std::vector<double> map_patch(const std::vector<std::vector<double>>& hr_columns, std::span<const double> coeffs) {
    if (hr_columns.size() != coeffs.size()) throw std::invalid_argument("map_patch: coefficient count mismatch");
    if (hr_columns.empty()) return {};
    const std::size_t n = hr_columns.front().size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < hr_columns.size(); ++i) {
        if (hr_columns[i].size() != n) throw std::invalid_argument("map_patch: patch lengths differ");
        for (std::size_t p = 0; p < n; ++p) out[p] += hr_columns[i][p] * coeffs[i];
    }
    return out;
}

RegressionPatch regress_patch(const ExemplarDB& db, const ImagePlane& base_luma, PixelCoord center,
                              const MatchParams& params) {
    const auto cands = knn_search(db, base_luma, center, params);
    RegressionPatch rp;
    rp.center = center;
    for (const auto& c : cands) {
        rp.candidates.push_back(c.values);
        rp.matched_hr.push_back(c.hr_values);
    }
    const Patch target = extract_patch(base_luma, center, params.patch_side);
    rp.coeffs = solve_regression(rp.candidates, target.values, params.effective_lambda());
    rp.output = map_patch(rp.matched_hr, rp.coeffs);
    return rp;
}

ImageStack regress_image(const ExemplarDB& db, const ImageStack& base, const MatchParams& params) {
    params.validate();
    if (db.size() == 0) throw ConfigError("exemplar database is empty");
    const ImagePlane luma = rgb_to_luma(base);
    if (luma.width() != db.width() || luma.height() != db.height())
        throw std::invalid_argument("regress_image: base resolution differs from the exemplars");
    const int side = params.patch_side;
    if (luma.width() < side || luma.height() < side)
        throw std::invalid_argument("regress_image: image smaller than one patch");

    std::vector<PixelCoord> origins;
    for (int y = 0; y + side <= luma.height(); y += params.stride)
        for (int x = 0; x + side <= luma.width(); x += params.stride) origins.push_back({x, y});

    std::vector<std::vector<double>> outputs(origins.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(origins.size()); ++i) {
        try {
            const auto& o = origins[static_cast<std::size_t>(i)];
            const PixelCoord c{o.x + side / 2, o.y + side / 2};
            outputs[static_cast<std::size_t>(i)] = regress_patch(db, luma, c, params).output;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    // Sequential accumulation keeps every pixel's summation order fixed.
    ImagePlane sum(luma.width(), luma.height(), 0.0);
    std::vector<int> count(luma.size(), 0);
    for (std::size_t i = 0; i < origins.size(); ++i) {
        const auto& o = origins[i];
        const auto& r = outputs[i];
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                sum(o.x + x, o.y + y) += r[static_cast<std::size_t>(y) * side + x];
                ++count[static_cast<std::size_t>(o.y + y) * luma.width() + o.x + x];
            }
    }
    ImagePlane out(luma.width(), luma.height());
    for (std::size_t k = 0; k < out.size(); ++k)
        out.data()[k] = count[k] > 0 ? sum.data()[k] / count[k] : luma.data()[k];
    return ImageStack::from_luma(std::move(out));
}

}  // namespace facerestore
