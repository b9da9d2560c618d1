#include "actclust/kmeans.hpp"

#include <cmath>
#include <limits>

#include "actclust/errors.hpp"
#include "actclust/rng.hpp"

namespace actclust {

double sq_dist(const float* a, const float* b, int dim) {
    double acc = 0.0;
    for (int j = 0; j < dim; ++j) {
        const double d = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        acc += d * d;
    }
    return acc;
}

namespace {

// k-means++: first center uniform, then proportional to squared distance.
Tensor seed_centroids(const Tensor& points, int k, Rng& rng) {
    const int n = points.rows();
    const int dim = points.cols();
    Tensor centroids({k, dim});
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

    int first = rng.uniform_int(n);
    for (int j = 0; j < dim; ++j) centroids.at(0, j) = points.at(first, j);

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = sq_dist(points.row(i), centroids.row(c - 1), dim);
            if (d < d2[static_cast<std::size_t>(i)]) d2[static_cast<std::size_t>(i)] = d;
            total += d2[static_cast<std::size_t>(i)];
        }
        int pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += d2[static_cast<std::size_t>(i)];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_int(n);
        }
        for (int j = 0; j < dim; ++j) centroids.at(c, j) = points.at(pick, j);
    }
    return centroids;
}

struct LloydResult {
    Tensor centroids;
    std::vector<int> assignment;
    double inertia;
    int iterations;
};

LloydResult lloyd(const Tensor& points, Tensor centroids, int max_iter) {
    const int n = points.rows();
    const int k = centroids.rows();
    const int dim = points.cols();
    std::vector<int> assignment(static_cast<std::size_t>(n), -1);
    std::vector<double> point_d2(static_cast<std::size_t>(n), 0.0);
    int iterations = 0;

    for (int it = 0; it < max_iter; ++it) {
        ++iterations;
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_k = 0;
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(points.row(i), centroids.row(c), dim);
                if (d < best) {
                    best = d;
                    best_k = c;
                }
            }
            point_d2[static_cast<std::size_t>(i)] = best;
            if (assignment[static_cast<std::size_t>(i)] != best_k) {
                assignment[static_cast<std::size_t>(i)] = best_k;
                changed = true;
            }
        }
        if (!changed) break;

        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                              std::vector<double>(static_cast<std::size_t>(dim), 0.0));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            const int c = assignment[static_cast<std::size_t>(i)];
            ++counts[static_cast<std::size_t>(c)];
            const float* p = points.row(i);
            for (int j = 0; j < dim; ++j) sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] += p[j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                for (int j = 0; j < dim; ++j) {
                    centroids.at(c, j) = static_cast<float>(sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] /
                                                            counts[static_cast<std::size_t>(c)]);
                }
            } else {
                // Empty cluster: reseed on the point currently farthest from
                // its centroid.
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    if (point_d2[static_cast<std::size_t>(i)] > far_d) {
                        far_d = point_d2[static_cast<std::size_t>(i)];
                        far = i;
                    }
                }
                for (int j = 0; j < dim; ++j) centroids.at(c, j) = points.at(far, j);
                point_d2[static_cast<std::size_t>(far)] = 0.0;
            }
        }
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
        inertia += sq_dist(points.row(i), centroids.row(assignment[static_cast<std::size_t>(i)]), dim);
    }
    return {std::move(centroids), std::move(assignment), inertia, iterations};
}

}  // namespace

KMeansResult kmeans(const Tensor& points, int k, int restarts, std::uint64_t seed, int max_iter) {
    const int n = points.rows();
    if (k < 1) throw ConfigError("kmeans: k must be positive");
    if (n < k) {
        throw ConfigError("kmeans: " + std::to_string(n) + " points for k=" + std::to_string(k));
    }
    if (restarts < 1) throw ConfigError("kmeans: restarts must be positive");
    if (!points.all_finite()) throw NumericError("kmeans: input contains non-finite values");

    Rng rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        LloydResult run = lloyd(points, seed_centroids(points, k, rng), max_iter);
        if (run.inertia < best.inertia) {
            best.centroids = std::move(run.centroids);
            best.assignment = std::move(run.assignment);
            best.inertia = run.inertia;
            best.iterations = run.iterations;
        }
    }
    return best;
}

}  // namespace actclust
