#include <doctest.h>

#include <cmath>
#include <vector>

#include "actclust/errors.hpp"
#include "actclust/kmeans.hpp"
#include "actclust/rng.hpp"
#include "actclust/store.hpp"

using namespace actclust;

namespace {

// Global optimum by enumerating every assignment of n points to k clusters
// with centroids at the assigned means.
double brute_force_inertia(const Tensor& points, int k) {
    const int n = points.rows();
    const int dim = points.cols();
    double best = 1e300;
    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= k;
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = 0; i < n; ++i) {
            assign[static_cast<std::size_t>(i)] = static_cast<int>(c % k);
            c /= k;
        }
        std::vector<std::vector<double>> mean(static_cast<std::size_t>(k),
                                              std::vector<double>(static_cast<std::size_t>(dim), 0.0));
        std::vector<int> count(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            ++count[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
            for (int j = 0; j < dim; ++j) {
                mean[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])][static_cast<std::size_t>(j)] +=
                    points.at(i, j);
            }
        }
        for (int cidx = 0; cidx < k; ++cidx) {
            if (count[static_cast<std::size_t>(cidx)] == 0) continue;
            for (int j = 0; j < dim; ++j) {
                mean[static_cast<std::size_t>(cidx)][static_cast<std::size_t>(j)] /= count[static_cast<std::size_t>(cidx)];
            }
        }
        double inertia = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto& mu = mean[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
            for (int j = 0; j < dim; ++j) {
                const double d = static_cast<double>(points.at(i, j)) - mu[static_cast<std::size_t>(j)];
                inertia += d * d;
            }
        }
        best = std::min(best, inertia);
    }
    return best;
}

}  // namespace

TEST_SUITE_BEGIN("kmeans");

TEST_CASE("kmeans recovers far-separated blob centers") {
    const double separation = 50.0;
    const Blobs blobs = make_blobs(2, 60, 4, separation, 17);
    const KMeansResult result = kmeans(blobs.points, 2, 5, 4242);

    // Match centroids to true centers up to permutation.
    for (int c = 0; c < 2; ++c) {
        double best = 1e300;
        for (int t = 0; t < 2; ++t) {
            best = std::min(best, sq_dist(result.centroids.row(c), blobs.centers.row(t), 4));
        }
        CHECK(std::sqrt(best) < 0.1 * separation);
    }
}

TEST_CASE("kmeans with k equal to n puts a centroid on every point") {
    Rng rng(8);
    Tensor points({6, 3});
    for (float& v : points.data) v = static_cast<float>(10.0 * rng.normal());
    const KMeansResult result = kmeans(points, 6, 8, 99);
    CHECK(result.inertia == doctest::Approx(0.0).epsilon(1e-12));
    for (int i = 0; i < 6; ++i) {
        CHECK(sq_dist(points.row(i), result.centroids.row(result.assignment[static_cast<std::size_t>(i)]), 3) ==
              doctest::Approx(0.0));
    }
}

TEST_CASE("kmeans inertia matches exhaustive enumeration on a planted instance") {
    // 12 points, 3 planted groups of 4.
    Rng rng(13);
    Tensor points({12, 2});
    const double centers[3][2] = {{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}};
    for (int i = 0; i < 12; ++i) {
        points.at(i, 0) = static_cast<float>(centers[i / 4][0] + rng.normal());
        points.at(i, 1) = static_cast<float>(centers[i / 4][1] + rng.normal());
    }

    const KMeansResult result = kmeans(points, 3, 10, 7);
    const double best = brute_force_inertia(points, 3);
    CHECK(result.inertia == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("kmeans is deterministic for a fixed seed") {
    const Blobs blobs = make_blobs(4, 25, 6, 12.0, 3);
    const KMeansResult a = kmeans(blobs.points, 4, 10, 555);
    const KMeansResult b = kmeans(blobs.points, 4, 10, 555);
    CHECK(a.centroids.data == b.centroids.data);
    CHECK(a.assignment == b.assignment);
    CHECK(a.inertia == b.inertia);
}

TEST_CASE("kmeans rejects undersized inputs") {
    Tensor points({3, 2}, 1.0f);
    CHECK_THROWS_AS(kmeans(points, 4, 1, 0), ConfigError);
    CHECK_THROWS_AS(kmeans(points, 0, 1, 0), ConfigError);
}

TEST_SUITE_END();
