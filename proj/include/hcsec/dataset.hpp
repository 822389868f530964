#pragma once

// Data model, synthetic generators, file ingestion and normalization.

#include "hcsec/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hcsec {

struct FeatureBounds {
    double lower = 0.0;
    double upper = 0.0;

    [[nodiscard]] bool contains(double v) const noexcept { return lower <= v && v <= upper; }
    [[nodiscard]] double clamp(double v) const noexcept { return std::clamp(v, lower, upper); }

    friend bool operator==(const FeatureBounds&, const FeatureBounds&) = default;
};

/// Sorted list of distinct point indices.
class IndexSet {
  public:
    IndexSet() = default;

    explicit IndexSet(std::vector<std::size_t> indices)
      : indices_{std::move(indices)} {
        for (std::size_t i = 1; i < indices_.size(); ++i) {
            if (indices_[i - 1] >= indices_[i]) {
                throw invalid_argument{"IndexSet indices must be strictly increasing"};
            }
        }
    }

    /// {0, 1, ..., n-1}
    static IndexSet prefix(std::size_t n) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        return IndexSet{std::move(idx)};
    }

    [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
    [[nodiscard]] bool empty() const noexcept { return indices_.empty(); }
    [[nodiscard]] std::size_t operator[](std::size_t i) const { return indices_[i]; }
    [[nodiscard]] auto begin() const noexcept { return indices_.begin(); }
    [[nodiscard]] auto end() const noexcept { return indices_.end(); }
    [[nodiscard]] const std::vector<std::size_t>& indices() const noexcept { return indices_; }

    [[nodiscard]] bool contains(std::size_t i) const {
        return std::binary_search(indices_.begin(), indices_.end(), i);
    }

    /// True when every index is below n.
    [[nodiscard]] bool within(std::size_t n) const noexcept { return indices_.empty() || indices_.back() < n; }

    friend bool operator==(const IndexSet&, const IndexSet&) = default;

  private:
    std::vector<std::size_t> indices_;
};

/// Immutable n x d matrix of finite feature values with per-dimension bounds.
class Dataset {
  public:
    Dataset() = default;

    /// Bounds are taken as the exact per-dimension data range.
    explicit Dataset(Matrix points, std::string provenance = {})
      : points_{std::move(points)}
      , provenance_{std::move(provenance)} {
        check_shape();
        bounds_ = data_range(points_);
    }

    Dataset(Matrix points, std::vector<FeatureBounds> bounds, std::string provenance = {})
      : points_{std::move(points)}
      , bounds_{std::move(bounds)}
      , provenance_{std::move(provenance)} {
        check_shape();
        if (bounds_.size() != points_.cols()) {
            throw invalid_argument{"feature bounds do not match dimensionality"};
        }
        for (std::size_t i = 0; i < points_.rows(); ++i) {
            for (std::size_t j = 0; j < points_.cols(); ++j) {
                if (!bounds_[j].contains(points_(i, j))) {
                    throw invalid_argument{"point " + std::to_string(i) + " lies outside the bounds of feature " +
                                           std::to_string(j)};
                }
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return points_.rows(); }
    [[nodiscard]] std::size_t dim() const noexcept { return points_.cols(); }
    [[nodiscard]] std::span<const double> point(std::size_t i) const { return points_.row(i); }
    [[nodiscard]] const Matrix& points() const noexcept { return points_; }
    [[nodiscard]] const std::vector<FeatureBounds>& bounds() const noexcept { return bounds_; }
    [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }

    [[nodiscard]] bool in_bounds(std::span<const double> x) const {
        if (x.size() != dim()) {
            return false;
        }
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (!bounds_[j].contains(x[j])) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] Dataset subset(const IndexSet& keep) const {
        if (!keep.within(size())) {
            throw invalid_argument{"subset index out of range"};
        }
        Matrix m(keep.size(), dim());
        for (std::size_t r = 0; r < keep.size(); ++r) {
            std::copy_n(point(keep[r]).begin(), dim(), m.row(r).begin());
        }
        return Dataset{std::move(m), bounds_, provenance_};
    }

    /// Same points with bounds shrunk to the exact data range.
    [[nodiscard]] Dataset tightened() const { return Dataset{points_, provenance_}; }

    /// Rows of *this followed by rows of other; bounds become the union box.
    [[nodiscard]] Dataset concat(const Dataset& other) const {
        if (other.size() == 0) {
            return *this;
        }
        if (other.dim() != dim()) {
            throw invalid_argument{"cannot concatenate datasets of different dimensionality"};
        }
        std::vector<double> values = points_.data();
        values.insert(values.end(), other.points_.data().begin(), other.points_.data().end());
        std::vector<FeatureBounds> bounds = bounds_;
        for (std::size_t j = 0; j < bounds.size(); ++j) {
            bounds[j].lower = std::min(bounds[j].lower, other.bounds_[j].lower);
            bounds[j].upper = std::max(bounds[j].upper, other.bounds_[j].upper);
        }
        return Dataset{Matrix{size() + other.size(), dim(), std::move(values)}, std::move(bounds), provenance_};
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

  private:
    void check_shape() const {
        if (points_.rows() == 0 || points_.cols() == 0) {
            throw invalid_argument{"dataset needs at least one point and one feature"};
        }
        for (double v : points_.data()) {
            if (!std::isfinite(v)) {
                throw invalid_argument{"dataset contains a non-finite value"};
            }
        }
    }

    static std::vector<FeatureBounds> data_range(const Matrix& m) {
        std::vector<FeatureBounds> b(m.cols(), FeatureBounds{std::numeric_limits<double>::infinity(),
                                                             -std::numeric_limits<double>::infinity()});
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j) {
                b[j].lower = std::min(b[j].lower, m(i, j));
                b[j].upper = std::max(b[j].upper, m(i, j));
            }
        }
        return b;
    }

    Matrix points_;
    std::vector<FeatureBounds> bounds_;
    std::string provenance_;
};

/// Dataset plus optional ground-truth classes. Classes drive dataset
/// construction and reporting only; attack code never receives them.
struct LabeledDataset {
    Dataset data;
    std::optional<std::vector<int>> labels;

    LabeledDataset() = default;

    explicit LabeledDataset(Dataset ds, std::optional<std::vector<int>> lbl = std::nullopt)
      : data{std::move(ds)}
      , labels{std::move(lbl)} {
        if (labels && labels->size() != data.size()) {
            throw invalid_argument{"label count does not match number of points"};
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }

    [[nodiscard]] LabeledDataset subset(const IndexSet& keep) const {
        std::optional<std::vector<int>> lbl;
        if (labels) {
            lbl.emplace();
            lbl->reserve(keep.size());
            for (auto i : keep) {
                lbl->push_back((*labels)[i]);
            }
        }
        return LabeledDataset{data.subset(keep), std::move(lbl)};
    }

    /// Indices of points whose class equals c.
    [[nodiscard]] IndexSet members_of(int c) const {
        if (!labels) {
            throw invalid_argument{"dataset carries no class labels"};
        }
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels->size(); ++i) {
            if ((*labels)[i] == c) {
                idx.push_back(i);
            }
        }
        return IndexSet{std::move(idx)};
    }

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

/// Two interleaving half-circle arcs. The default radius puts the mean
/// pairwise distance near 2 at moderate noise.
struct BananaShape {
    double radius = 1.5;
    /// Offset of the second arc, in units of radius (x, y).
    double offset_x = 1.0;
    double offset_y = 0.5;
};

inline LabeledDataset generate_banana(std::size_t n_per_class, double noise, std::uint64_t seed,
                                      const BananaShape& shape = {}) {
    if (n_per_class < 1) {
        throw invalid_argument{"generate_banana needs n_per_class >= 1"};
    }
    if (!(noise > 0.0)) {
        throw invalid_argument{"banana noise must be positive"};
    }
    if (!(shape.radius > 0.0)) {
        throw invalid_argument{"banana radius must be positive"};
    }
    constexpr double pi = 3.14159265358979323846;
    Rng rng{seed};
    Matrix m(2 * n_per_class, 2);
    std::vector<int> labels(2 * n_per_class);
    const double r = shape.radius;
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        const bool second = i >= n_per_class;
        const double t = rng.uniform(0.0, pi);
        double x = r * std::cos(t);
        double y = r * std::sin(t);
        if (second) {
            x = r * shape.offset_x - x;
            y = r * shape.offset_y - y;
        }
        m(i, 0) = x + rng.normal(0.0, noise);
        m(i, 1) = y + rng.normal(0.0, noise);
        labels[i] = second ? 1 : 0;
    }
    return LabeledDataset{Dataset{std::move(m), "banana"}, std::move(labels)};
}

/// Isotropic Gaussian clusters whose centers sit at mutual distance
/// `separation` around a common base point, optionally clipped to a box
/// (e.g. [0,1] for pixel-like data). One class per cluster. With fewer
/// dimensions than classes the centers go on a regular polygon in the first
/// two coordinates (on a line in 1-D), neighbours `separation` apart.
struct BlobSpec {
    std::size_t n_per_class = 100;
    std::size_t classes = 3;
    std::size_t dim = 2;
    double separation = 1.0;
    double sigma = 0.1;
    double base = 0.5;
    std::optional<FeatureBounds> clip;
};

inline Matrix blob_centers(const BlobSpec& spec) {
    Matrix centers(spec.classes, spec.dim, spec.base);
    if (spec.dim >= spec.classes) {
        // Center c raises its own block of dim/classes coordinates by
        // s / sqrt(2 * block), so centers are pairwise s apart.
        const std::size_t block = spec.dim / spec.classes;
        const double offset = spec.separation / std::sqrt(2.0 * static_cast<double>(block));
        for (std::size_t c = 0; c < spec.classes; ++c) {
            for (std::size_t j = c * block; j < (c + 1) * block; ++j) {
                centers(c, j) += offset;
            }
        }
    } else if (spec.dim == 1) {
        for (std::size_t c = 0; c < spec.classes; ++c) {
            centers(c, 0) += spec.separation * static_cast<double>(c);
        }
    } else {
        const double pi = std::acos(-1.0);
        const double step = 2.0 * pi / static_cast<double>(spec.classes);
        const double radius = spec.separation / (2.0 * std::sin(step / 2.0));
        for (std::size_t c = 0; c < spec.classes; ++c) {
            centers(c, 0) += radius * std::cos(step * static_cast<double>(c));
            centers(c, 1) += radius * std::sin(step * static_cast<double>(c));
        }
    }
    return centers;
}

inline LabeledDataset generate_blobs(const BlobSpec& spec, std::uint64_t seed) {
    if (spec.n_per_class < 1 || spec.classes < 1 || spec.dim < 1) {
        throw invalid_argument{"blob spec needs n_per_class, classes and dim >= 1"};
    }
    if (!(spec.sigma > 0.0)) {
        throw invalid_argument{"blob sigma must be positive"};
    }
    Rng rng{seed};
    const std::size_t n = spec.n_per_class * spec.classes;
    const Matrix centers = blob_centers(spec);
    Matrix m(n, spec.dim);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = i / spec.n_per_class;
        labels[i] = static_cast<int>(c);
        for (std::size_t j = 0; j < spec.dim; ++j) {
            double v = centers(c, j) + rng.normal(0.0, spec.sigma);
            if (spec.clip) {
                v = spec.clip->clamp(v);
            }
            m(i, j) = v;
        }
    }
    if (spec.clip) {
        // A clip box is the feature domain (pixel intensities): it becomes the
        // recorded bounds rather than the tighter data range.
        std::vector<FeatureBounds> bounds(spec.dim, *spec.clip);
        return LabeledDataset{Dataset{std::move(m), std::move(bounds), "blobs"}, std::move(labels)};
    }
    return LabeledDataset{Dataset{std::move(m), "blobs"}, std::move(labels)};
}

// ---------------------------------------------------------------------------
// Normalization and sampling
// ---------------------------------------------------------------------------

/// Min-max rescaling of every feature to [0,1]; constant features map to 0.
inline Dataset normalize_min_max(const Dataset& ds) {
    Matrix m = ds.points();
    std::vector<FeatureBounds> bounds(ds.dim());
    for (std::size_t j = 0; j < ds.dim(); ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            lo = std::min(lo, m(i, j));
            hi = std::max(hi, m(i, j));
        }
        const double span = hi - lo;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            m(i, j) = span > 0.0 ? std::clamp((m(i, j) - lo) / span, 0.0, 1.0) : 0.0;
        }
        bounds[j] = span > 0.0 ? FeatureBounds{0.0, 1.0} : FeatureBounds{0.0, 0.0};
    }
    return Dataset{std::move(m), std::move(bounds), ds.provenance()};
}

/// Uniform sampling of `count` points without replacement; the kept points
/// stay in their original relative order and the bounds shrink to the sample.
inline LabeledDataset subsample(const LabeledDataset& ds, std::size_t count, std::uint64_t seed) {
    if (count > ds.size()) {
        throw invalid_argument{"subsample of " + std::to_string(count) + " requested from " +
                               std::to_string(ds.size()) + " points"};
    }
    Rng rng{seed};
    auto picked = rng.sample_without_replacement(ds.size(), count);
    std::sort(picked.begin(), picked.end());
    auto out = ds.subset(IndexSet{std::move(picked)});
    out.data = out.data.tightened();
    return out;
}

/// Uniform sampling of `per_class` points from every class present.
inline LabeledDataset subsample_per_class(const LabeledDataset& ds, std::size_t per_class, std::uint64_t seed) {
    if (!ds.labels) {
        throw invalid_argument{"per-class subsampling needs class labels"};
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        by_class[(*ds.labels)[i]].push_back(i);
    }
    Rng rng{seed};
    std::vector<std::size_t> keep;
    for (const auto& [cls, members] : by_class) {
        if (per_class > members.size()) {
            throw invalid_argument{"class " + std::to_string(cls) + " has only " + std::to_string(members.size()) +
                                   " points, " + std::to_string(per_class) + " requested"};
        }
        for (auto pick : rng.sample_without_replacement(members.size(), per_class)) {
            keep.push_back(members[pick]);
        }
    }
    std::sort(keep.begin(), keep.end());
    auto out = ds.subset(IndexSet{std::move(keep)});
    out.data = out.data.tightened();
    return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) {
        return std::nullopt;
    }
    if (cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return cells;
}

}  // namespace detail

/// Parses comma-separated numeric rows. A first row with any non-numeric
/// cell is treated as a header; later non-numeric cells are errors.
inline Dataset parse_csv(std::istream& in, bool normalize, const std::string& provenance = "csv") {
    Matrix m;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto cells = detail::split_commas(line);
        std::vector<double> row;
        row.reserve(cells.size());
        bool numeric = true;
        for (auto cell : cells) {
            auto v = detail::parse_double(cell);
            if (!v) {
                numeric = false;
                break;
            }
            row.push_back(*v);
        }
        if (!numeric) {
            if (first_content_row) {
                first_content_row = false;
                continue;
            }
            throw load_error{load_error::kind::non_numeric, "non-numeric cell on line " + std::to_string(line_no)};
        }
        first_content_row = false;
        if (m.rows() > 0 && row.size() != m.cols()) {
            throw load_error{load_error::kind::ragged, "line " + std::to_string(line_no) + " has " +
                                                          std::to_string(row.size()) + " columns, expected " +
                                                          std::to_string(m.cols())};
        }
        m.append_row(row);
    }
    if (m.rows() == 0) {
        throw load_error{load_error::kind::empty, "no numeric rows found"};
    }
    Dataset ds{std::move(m), provenance};
    return normalize ? normalize_min_max(ds) : ds;
}

inline Dataset load_csv(const std::string& path, bool normalize) {
    std::ifstream in{path};
    if (!in) {
        throw load_error{load_error::kind::io, "cannot open " + path};
    }
    return parse_csv(in, normalize, path);
}

inline void write_csv(std::ostream& out, const Dataset& ds, const std::optional<std::vector<int>>& labels = {}) {
    std::ostringstream line;
    line.precision(17);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        line.str({});
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            line << (j ? "," : "") << ds.point(i)[j];
        }
        if (labels) {
            line << ',' << (*labels)[i];
        }
        out << line.str() << '\n';
    }
}

// ---------------------------------------------------------------------------
// IDX (MNIST raster format)
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<unsigned char> read_all(const std::string& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw load_error{load_error::kind::io, "cannot open " + path};
    }
    return {std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

inline std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
           std::uint32_t{b[off + 3]};
}

}  // namespace detail

inline constexpr std::uint32_t idx_images_magic = 0x00000803;
inline constexpr std::uint32_t idx_labels_magic = 0x00000801;

/// Decodes an IDX image file: raster-scan flattened pixels divided by 255.
inline Matrix parse_idx_images(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 16) {
        throw load_error{load_error::kind::truncated, "IDX image header truncated"};
    }
    if (detail::be32(bytes, 0) != idx_images_magic) {
        throw load_error{load_error::kind::bad_magic, "bad IDX image magic number"};
    }
    const std::size_t count = detail::be32(bytes, 4);
    const std::size_t rows = detail::be32(bytes, 8);
    const std::size_t cols = detail::be32(bytes, 12);
    const std::size_t pixels = rows * cols;
    if (bytes.size() < 16 + count * pixels) {
        throw load_error{load_error::kind::truncated, "IDX image payload truncated"};
    }
    Matrix m(count, pixels);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t p = 0; p < pixels; ++p) {
            m(i, p) = static_cast<double>(bytes[16 + i * pixels + p]) / 255.0;
        }
    }
    return m;
}

inline std::vector<int> parse_idx_labels(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 8) {
        throw load_error{load_error::kind::truncated, "IDX label header truncated"};
    }
    if (detail::be32(bytes, 0) != idx_labels_magic) {
        throw load_error{load_error::kind::bad_magic, "bad IDX label magic number"};
    }
    const std::size_t count = detail::be32(bytes, 4);
    if (bytes.size() < 8 + count) {
        throw load_error{load_error::kind::truncated, "IDX label payload truncated"};
    }
    return {bytes.begin() + 8, bytes.begin() + static_cast<std::ptrdiff_t>(8 + count)};
}

struct IdxSelection {
    std::vector<int> classes;
    /// Points per class retained by closeness to the class-mean image.
    std::size_t preselect_per_class = 0;
    /// Uniform subsample drawn from each preselection: empty keeps it whole,
    /// one count applies to every class, otherwise one count per class.
    std::vector<std::size_t> sample_per_class;
};

/// For each requested class, keeps the preselect_per_class images closest
/// (Euclidean) to the class mean image, then optionally subsamples them.
inline LabeledDataset select_by_class_mean(const Matrix& images, const std::vector<int>& labels,
                                           const IdxSelection& sel, std::uint64_t seed) {
    if (labels.size() != images.rows()) {
        throw load_error{load_error::kind::truncated, "image and label counts differ"};
    }
    if (sel.sample_per_class.size() > 1 && sel.sample_per_class.size() != sel.classes.size()) {
        throw invalid_argument{"give one sample count, or one per class"};
    }
    Matrix out;
    std::vector<int> out_labels;
    Rng rng{seed};
    for (std::size_t ci = 0; ci < sel.classes.size(); ++ci) {
        const int cls = sel.classes[ci];
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) {
                members.push_back(i);
            }
        }
        if (members.empty()) {
            throw load_error{load_error::kind::class_absent, "class " + std::to_string(cls) + " absent"};
        }
        if (sel.preselect_per_class > members.size()) {
            throw load_error{load_error::kind::insufficient_samples,
                             "class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                                 " samples, " + std::to_string(sel.preselect_per_class) + " requested"};
        }
        std::vector<double> mean(images.cols(), 0.0);
        for (auto i : members) {
            for (std::size_t p = 0; p < images.cols(); ++p) {
                mean[p] += images(i, p);
            }
        }
        for (auto& v : mean) {
            v /= static_cast<double>(members.size());
        }
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(members.size());
        for (auto i : members) {
            ranked.emplace_back(squared_distance(images.row(i), mean), i);
        }
        std::sort(ranked.begin(), ranked.end());
        ranked.resize(sel.preselect_per_class);
        std::vector<std::size_t> chosen;
        for (const auto& entry : ranked) {
            chosen.push_back(entry.second);
        }
        if (!sel.sample_per_class.empty()) {
            const auto count = sel.sample_per_class[sel.sample_per_class.size() == 1 ? 0 : ci];
            if (count > chosen.size()) {
                throw load_error{load_error::kind::insufficient_samples,
                                 "sample_per_class exceeds the preselected count"};
            }
            auto picks = rng.sample_without_replacement(chosen.size(), count);
            std::sort(picks.begin(), picks.end());
            std::vector<std::size_t> sampled;
            for (auto p : picks) {
                sampled.push_back(chosen[p]);
            }
            chosen = std::move(sampled);
        }
        std::sort(chosen.begin(), chosen.end());
        for (auto i : chosen) {
            out.append_row(images.row(i));
            out_labels.push_back(cls);
        }
    }
    if (out.rows() == 0) {
        throw load_error{load_error::kind::empty, "selection produced no images"};
    }
    return LabeledDataset{Dataset{std::move(out), "idx"}, std::move(out_labels)};
}

inline LabeledDataset load_idx_images(const std::string& images_path, const std::string& labels_path,
                                      const IdxSelection& sel, std::uint64_t seed) {
    const auto images = parse_idx_images(detail::read_all(images_path));
    const auto labels = parse_idx_labels(detail::read_all(labels_path));
    return select_by_class_mean(images, labels, sel, seed);
}

}  // namespace hcsec
