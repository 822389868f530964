#include "catch_amalgamated.hpp"

#include "hcsec/dataset.hpp"
#include "hcsec/hclust.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace hcsec;

namespace {

Dataset csv(const std::string& text, bool normalize = true) {
    std::istringstream in{text};
    return parse_csv(in, normalize);
}

load_error::kind csv_failure(const std::string& text) {
    try {
        (void)csv(text);
    } catch (const load_error& e) {
        return e.reason();
    }
    FAIL("expected a load error");
    return load_error::kind::io;
}

void put32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) {
        b.push_back(static_cast<unsigned char>((v >> s) & 0xFF));
    }
}

std::vector<unsigned char> idx_images(const std::vector<std::vector<unsigned char>>& images, std::uint32_t side) {
    std::vector<unsigned char> b;
    put32(b, idx_images_magic);
    put32(b, static_cast<std::uint32_t>(images.size()));
    put32(b, side);
    put32(b, side);
    for (const auto& img : images) {
        b.insert(b.end(), img.begin(), img.end());
    }
    return b;
}

std::vector<unsigned char> idx_labels(const std::vector<unsigned char>& labels) {
    std::vector<unsigned char> b;
    put32(b, idx_labels_magic);
    put32(b, static_cast<std::uint32_t>(labels.size()));
    b.insert(b.end(), labels.begin(), labels.end());
    return b;
}

bool within_bounds(const Dataset& ds) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!ds.in_bounds(ds.point(i))) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("dataset validates its matrix and bounds") {
    CHECK_THROWS_AS(Dataset{Matrix(0, 2)}, invalid_argument);
    CHECK_THROWS_AS(Dataset(Matrix::from_rows({{0.0, 2.0}}), std::vector<FeatureBounds>{{0, 1}, {0, 1}}), invalid_argument);
    CHECK_THROWS_AS(Dataset{Matrix::from_rows({{0.0, std::numeric_limits<double>::quiet_NaN()}})}, invalid_argument);
    const Dataset ds{Matrix::from_rows({{0, 5}, {2, -1}})};
    CHECK(ds.bounds()[0] == FeatureBounds{0, 2});
    CHECK(ds.bounds()[1] == FeatureBounds{-1, 5});
}

TEST_CASE("concat takes the union box") {
    const Dataset a{Matrix::from_rows({{0, 0}, {1, 1}})};
    const Dataset b{Matrix::from_rows({{3, -2}})};
    const auto c = a.concat(b);
    CHECK(c.size() == 3);
    CHECK(c.bounds()[0] == FeatureBounds{0, 3});
    CHECK(c.bounds()[1] == FeatureBounds{-2, 1});
}

TEST_CASE("banana generator sizes and labels") {
    const auto ds = generate_banana(50, 0.3, 7);
    CHECK(ds.size() == 100);
    CHECK(ds.data.dim() == 2);
    REQUIRE(ds.labels);
    CHECK(ds.members_of(0).size() == 50);
    CHECK(ds.members_of(1).size() == 50);
}

TEST_CASE("banana bounds are the exact data range") {
    const auto ds = generate_banana(40, 0.3, 1);
    for (std::size_t j = 0; j < 2; ++j) {
        double lo = 1e300;
        double hi = -1e300;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            lo = std::min(lo, ds.data.point(i)[j]);
            hi = std::max(hi, ds.data.point(i)[j]);
        }
        CHECK(ds.data.bounds()[j].lower == lo);
        CHECK(ds.data.bounds()[j].upper == hi);
    }
}

TEST_CASE("banana generation is deterministic") {
    CHECK(generate_banana(40, 0.3, 5) == generate_banana(40, 0.3, 5));
    CHECK_FALSE(generate_banana(40, 0.3, 5) == generate_banana(40, 0.3, 6));
}

TEST_CASE("banana rejects nonpositive noise") {
    CHECK_THROWS_AS(generate_banana(10, 0.0, 1), invalid_argument);
    CHECK_THROWS_AS(generate_banana(10, -1.0, 1), invalid_argument);
    CHECK_THROWS_AS(generate_banana(0, 0.3, 1), invalid_argument);
}

TEST_CASE("banana four-cluster cut mixes both arcs") {
    const auto ds = generate_banana(40, 0.3, 1);
    const auto c = cut(single_linkage(ds.data), 4);
    CHECK(c.k() == 4);
    // The largest cluster holds points of both classes.
    const auto members = c.members();
    const auto largest = std::max_element(members.begin(), members.end(),
                                          [](const auto& a, const auto& b) { return a.size() < b.size(); });
    std::set<int> classes;
    for (auto i : *largest) {
        classes.insert((*ds.labels)[i]);
    }
    CHECK(classes.size() == 2);
}

TEST_CASE("blobs respect the clip box as bounds") {
    BlobSpec spec;
    spec.n_per_class = 20;
    spec.classes = 3;
    spec.dim = 12;
    spec.separation = 1.0;
    spec.sigma = 0.05;
    spec.base = 0.2;
    spec.clip = FeatureBounds{0, 1};
    const auto ds = generate_blobs(spec, 3);
    CHECK(ds.size() == 60);
    for (const auto& b : ds.data.bounds()) {
        CHECK(b == FeatureBounds{0, 1});
    }
    CHECK(within_bounds(ds.data));
}

TEST_CASE("blob centers sit at the requested separation") {
    BlobSpec spec;
    spec.n_per_class = 400;
    spec.classes = 3;
    spec.dim = 6;
    spec.separation = 2.0;
    spec.sigma = 0.01;
    const auto ds = generate_blobs(spec, 11);
    std::vector<std::vector<double>> centers(3, std::vector<double>(6, 0.0));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            centers[static_cast<std::size_t>((*ds.labels)[i])][j] += ds.data.point(i)[j] / 400.0;
        }
    }
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = a + 1; b < 3; ++b) {
            CHECK(distance(centers[a], centers[b]) == Catch::Approx(2.0).epsilon(0.01));
        }
    }
}

TEST_CASE("csv min-max normalization") {
    const auto ds = csv("0,10\n5,20\n10,30\n");
    CHECK(ds.points() == Matrix::from_rows({{0, 0}, {0.5, 0.5}, {1, 1}}));
    CHECK(ds.bounds()[0] == FeatureBounds{0, 1});
}

TEST_CASE("csv constant column maps to zero") {
    const auto ds = csv("3,1\n3,2\n3,5\n");
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ds.point(i)[0] == 0.0);
    }
    CHECK(within_bounds(ds));
}

TEST_CASE("csv header row is skipped") {
    const auto ds = csv("a,b,c,d,e,f\n1,2,3,4,5,6\n2,3,4,5,6,7\n", false);
    CHECK(ds.size() == 2);
    CHECK(ds.dim() == 6);
    CHECK(ds.point(1)[5] == 7.0);
}

TEST_CASE("csv failures are distinguished") {
    CHECK(csv_failure("") == load_error::kind::empty);
    CHECK(csv_failure("x,y\n") == load_error::kind::empty);
    CHECK(csv_failure("1,2\n3\n") == load_error::kind::ragged);
    CHECK(csv_failure("1,2\n3,abc\n") == load_error::kind::non_numeric);
    try {
        (void)load_csv("/nonexistent/file.csv", true);
        FAIL("expected io error");
    } catch (const load_error& e) {
        CHECK(e.reason() == load_error::kind::io);
    }
}

TEST_CASE("csv round trip through a file") {
    const auto path = std::filesystem::temp_directory_path() / "hcsec_dataset_roundtrip.csv";
    const Dataset ds{Matrix::from_rows({{0.125, -3}, {1e-7, 42}})};
    {
        std::ofstream out{path};
        write_csv(out, ds);
    }
    const auto back = load_csv(path.string(), false);
    CHECK(back.points() == ds.points());
    std::filesystem::remove(path);
}

TEST_CASE("normalization is idempotent") {
    Rng rng{9};
    for (int trial = 0; trial < 20; ++trial) {
        Matrix m(15, 4);
        for (std::size_t i = 0; i < 15; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                m(i, j) = rng.uniform(-50, 50);
            }
        }
        const auto once = normalize_min_max(Dataset{m});
        const auto twice = normalize_min_max(once);
        for (std::size_t i = 0; i < m.data().size(); ++i) {
            REQUIRE(std::abs(once.points().data()[i] - twice.points().data()[i]) <= 1e-12);
        }
    }
}

TEST_CASE("idx pixels are scaled by 255") {
    std::vector<unsigned char> zero(784, 0);
    std::vector<unsigned char> full(784, 255);
    const auto m = parse_idx_images(idx_images({zero, full}, 28));
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 784);
    CHECK(std::all_of(m.row(0).begin(), m.row(0).end(), [](double v) { return v == 0.0; }));
    CHECK(std::all_of(m.row(1).begin(), m.row(1).end(), [](double v) { return v == 1.0; }));
}

TEST_CASE("idx decoding errors") {
    auto bytes = idx_images({std::vector<unsigned char>(4, 1)}, 2);
    auto bad = bytes;
    bad[3] = 0x01;
    try {
        (void)parse_idx_images(bad);
        FAIL("expected bad magic");
    } catch (const load_error& e) {
        CHECK(e.reason() == load_error::kind::bad_magic);
    }
    bytes.pop_back();
    try {
        (void)parse_idx_images(bytes);
        FAIL("expected truncation");
    } catch (const load_error& e) {
        CHECK(e.reason() == load_error::kind::truncated);
    }
    auto labels = idx_labels({1, 2});
    labels.pop_back();
    CHECK_THROWS_AS(parse_idx_labels(labels), load_error);
}

TEST_CASE("idx class selection keeps images nearest the class mean") {
    // Class 3: four 2x2 images; the outlier (all 255) is farthest from the mean.
    const std::vector<std::vector<unsigned char>> imgs{
        {0, 0, 0, 0}, {10, 10, 10, 10}, {255, 255, 255, 255}, {20, 20, 20, 20}, {7, 7, 7, 7}};
    const auto images = parse_idx_images(idx_images(imgs, 2));
    const auto labels = parse_idx_labels(idx_labels({3, 3, 3, 3, 5}));
    const auto ds = select_by_class_mean(images, labels, IdxSelection{{3}, 3, {}}, 1);
    CHECK(ds.size() == 3);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(ds.data.point(i)[0] < 0.5);
    }
    CHECK(ds.data.bounds()[0].upper == Catch::Approx(20.0 / 255.0));

    try {
        (void)select_by_class_mean(images, labels, IdxSelection{{4}, 1, {}}, 1);
        FAIL("expected class absent");
    } catch (const load_error& e) {
        CHECK(e.reason() == load_error::kind::class_absent);
    }
    try {
        (void)select_by_class_mean(images, labels, IdxSelection{{5}, 2, {}}, 1);
        FAIL("expected insufficient samples");
    } catch (const load_error& e) {
        CHECK(e.reason() == load_error::kind::insufficient_samples);
    }
    const auto sampled = select_by_class_mean(images, labels, IdxSelection{{3, 5}, 1, {1}}, 1);
    CHECK(sampled.size() == 2);
    const auto uneven = select_by_class_mean(images, labels, IdxSelection{{3, 5}, 1, {1, 1}}, 1);
    CHECK(uneven.size() == 2);
    const auto more = select_by_class_mean(images, labels, IdxSelection{{3}, 4, {2}}, 1);
    CHECK(more.size() == 2);
    CHECK_THROWS_AS(select_by_class_mean(images, labels, IdxSelection{{3, 5}, 1, {1, 1, 1}}, 1), invalid_argument);
    try {
        (void)select_by_class_mean(images, labels, IdxSelection{{3}, 3, {4}}, 1);
        FAIL("expected insufficient samples");
    } catch (const load_error& e) {
        CHECK(e.reason() == load_error::kind::insufficient_samples);
    }
}

TEST_CASE("subsample of everything keeps the same points") {
    const auto ds = generate_banana(20, 0.3, 2);
    const auto all = subsample(ds, ds.size(), 9);
    CHECK(all.data.points() == ds.data.points());
}

TEST_CASE("subsample sizes, seeds and errors") {
    BlobSpec spec;
    spec.n_per_class = 500;
    spec.classes = 2;
    const auto ds = generate_blobs(spec, 1);
    const auto a = subsample(ds, 475, 1);
    const auto b = subsample(ds, 475, 2);
    CHECK(a.size() == 475);
    CHECK_FALSE(a.data.points() == b.data.points());
    CHECK(subsample(ds, 475, 1) == a);
    CHECK(within_bounds(a.data));
    CHECK_THROWS_AS(subsample(ds, 1001, 1), invalid_argument);
    const auto per = subsample_per_class(ds, 30, 4);
    CHECK(per.members_of(0).size() == 30);
    CHECK(per.members_of(1).size() == 30);
    CHECK_THROWS_AS(subsample_per_class(ds, 501, 4), invalid_argument);
}

TEST_CASE("blob centers in fewer dimensions than classes") {
    BlobSpec spec;
    spec.classes = 3;
    spec.dim = 2;
    spec.separation = 3.0;
    const auto tri = blob_centers(spec);
    CHECK(distance(tri.row(0), tri.row(1)) == Catch::Approx(3.0));
    CHECK(distance(tri.row(1), tri.row(2)) == Catch::Approx(3.0));
    CHECK(distance(tri.row(0), tri.row(2)) == Catch::Approx(3.0));
    spec.dim = 1;
    CHECK(blob_centers(spec) == Matrix::from_rows({{0.5}, {3.5}, {6.5}}));
    spec.dim = 0;
    CHECK_THROWS_AS(generate_blobs(spec, 1), invalid_argument);
}

TEST_CASE("idx files load end to end") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto images = dir / "hcsec_test_images.idx";
    const auto labels = dir / "hcsec_test_labels.idx";
    auto dump = [](const std::filesystem::path& p, const std::vector<unsigned char>& b) {
        std::ofstream out{p, std::ios::binary};
        out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    };
    dump(images, idx_images({{0, 0, 0, 0}, {255, 255, 255, 255}, {0, 0, 0, 51}}, 2));
    dump(labels, idx_labels({0, 1, 0}));
    const auto ds = load_idx_images(images.string(), labels.string(), IdxSelection{{0, 1}, 1, {}}, 1);
    CHECK(ds.size() == 2);
    CHECK(ds.data.dim() == 4);
    CHECK(*ds.labels == std::vector<int>{0, 1});
    CHECK(ds.data.point(1)[0] == 1.0);
    std::filesystem::remove(images);
    std::filesystem::remove(labels);
    CHECK_THROWS_AS(load_idx_images(images.string(), labels.string(), IdxSelection{{0}, 1, {}}, 1), load_error);
}
