#include "scenebal/cluster.hpp"

#include "scenebal/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scenebal {

namespace {

double sq_dist(const Eigen::MatrixXf& rows, Eigen::Index i, const Eigen::VectorXd& centroid) {
    return (rows.row(i).transpose().cast<double>() - centroid).squaredNorm();
}

struct SingleRun {
    std::vector<int> assignments;
    Eigen::MatrixXd centroids;
    double inertia = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool degenerate = false;
};

void assign_nearest(const Eigen::MatrixXf& rows, const Eigen::MatrixXd& centroids,
                    std::vector<int>& assignments, double* inertia) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index k = centroids.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d = sq_dist(rows, i, centroids.row(0).transpose());
        for (Eigen::Index c = 1; c < k; ++c) {
            const double d = sq_dist(rows, i, centroids.row(c).transpose());
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        assignments[static_cast<size_t>(i)] = best;
        total += best_d;
    }
    if (inertia) *inertia = total;
}

Eigen::MatrixXd recompute_centroids(const Eigen::MatrixXf& rows, const std::vector<int>& assignments,
                                    const Eigen::MatrixXd& fallback, int k) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, rows.cols());
    std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const int c = assignments[static_cast<size_t>(i)];
        sums.row(c) += rows.row(i).cast<double>();
        ++counts[static_cast<size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<size_t>(c)] > 0)
            sums.row(c) /= static_cast<double>(counts[static_cast<size_t>(c)]);
        else
            sums.row(c) = fallback.row(c);
    }
    return sums;
}

// kmeans++ seeding: squared-distance-weighted picks, deterministic per rng.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXf& rows, int k, Rng& rng) {
    const Eigen::Index n = rows.rows();
    Eigen::MatrixXd centroids(k, rows.cols());
    centroids.row(0) = rows.row(static_cast<Eigen::Index>(rng.index(static_cast<uint32_t>(n)))).cast<double>();
    std::vector<double> d2(static_cast<size_t>(n), 0.0);
    for (int c = 1; c < k; ++c) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < c; ++j)
                best = std::min(best, sq_dist(rows, i, centroids.row(j).transpose()));
            d2[static_cast<size_t>(i)] = best;
            sum += best;
        }
        Eigen::Index pick = 0;
        if (sum > 0.0) {
            const double target = static_cast<double>(rng.uniform01()) * sum;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[static_cast<size_t>(i)];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(c) % n;  // coincident data
        }
        centroids.row(c) = rows.row(pick).cast<double>();
    }
    return centroids;
}

SingleRun kmeans_single(const Eigen::MatrixXf& rows, int k, uint64_t seed, int max_iter, double tol) {
    const Eigen::Index n = rows.rows();
    Rng rng(seed);
    SingleRun run;
    run.centroids = seed_centroids(rows, k, rng);
    run.assignments.assign(static_cast<size_t>(n), 0);

    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        double inertia = 0.0;
        assign_nearest(rows, run.centroids, run.assignments, &inertia);

        // Reseed any empty cluster to the point farthest from its own centroid.
        std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
        for (int a : run.assignments) ++counts[static_cast<size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) continue;
            Eigen::Index far_i = 0;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d = sq_dist(rows, i, run.centroids.row(run.assignments[static_cast<size_t>(i)]).transpose());
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            inertia -= far_d;  // the moved point now sits on its centroid
            --counts[static_cast<size_t>(run.assignments[static_cast<size_t>(far_i)])];
            run.assignments[static_cast<size_t>(far_i)] = c;
            ++counts[static_cast<size_t>(c)];
            run.centroids.row(c) = rows.row(far_i).cast<double>();
        }

        if (inertia > prev_inertia * (1.0 + 1e-12) + 1e-12)
            throw std::logic_error("kmeans: inertia increased across iterations");
        prev_inertia = inertia;
        run.iterations = iter + 1;

        const Eigen::MatrixXd updated = recompute_centroids(rows, run.assignments, run.centroids, k);
        const double movement = (updated - run.centroids).rowwise().norm().maxCoeff();
        run.centroids = updated;
        if (movement < tol) break;
    }

    // Final nearest-centroid pass so the published assignment satisfies the
    // tie rule against the published centroids.
    assign_nearest(rows, run.centroids, run.assignments, &run.inertia);
    std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
    for (int a : run.assignments) ++counts[static_cast<size_t>(a)];
    run.degenerate = std::any_of(counts.begin(), counts.end(), [](Eigen::Index c) { return c == 0; });
    return run;
}

}  // namespace

void FeatureMatrix::validate() const {
    if (rows.rows() < 2) throw std::invalid_argument("feature matrix needs at least 2 rows");
    if (!rows.allFinite()) throw std::invalid_argument("feature matrix contains non-finite values");
    if (!image_ids.empty() && static_cast<Eigen::Index>(image_ids.size()) != rows.rows())
        throw std::invalid_argument("feature matrix ids do not align with rows");
}

std::vector<int> ClusterResult::cluster_sizes() const {
    std::vector<int> sizes(static_cast<size_t>(centroids.rows()), 0);
    for (int a : assignments) ++sizes[static_cast<size_t>(a)];
    return sizes;
}

ClusterResult kmeans(const FeatureMatrix& features, int k, uint64_t seed, int max_iter,
                     double tol, int restarts) {
    features.validate();
    const Eigen::Index n = features.count();
    if (k < 2) throw std::invalid_argument("kmeans: k must be >= 2");
    if (static_cast<Eigen::Index>(k) > n)
        throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " exceeds row count " + std::to_string(n));
    if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");

    SingleRun best;
    for (int r = 0; r < restarts; ++r) {
        const uint64_t sub_seed = seed * 0x9E3779B97F4A7C15ull + static_cast<uint64_t>(r) + 1;
        SingleRun run = kmeans_single(features.rows, k, sub_seed, max_iter, tol);
        if (run.inertia < best.inertia) best = std::move(run);
    }

    ClusterResult result;
    result.assignments = std::move(best.assignments);
    result.centroids = std::move(best.centroids);
    result.inertia = best.inertia;
    result.iterations_used = best.iterations;
    result.degenerate = best.degenerate;
    return result;
}

namespace {

struct ClusterStats {
    int k = 0;
    std::vector<Eigen::Index> counts;
    Eigen::MatrixXd centroids;

    ClusterStats(const FeatureMatrix& f, const std::vector<int>& assignments) {
        if (assignments.size() != static_cast<size_t>(f.count()))
            throw std::invalid_argument("assignments do not align with features");
        for (int a : assignments) k = std::max(k, a + 1);
        if (k < 2) throw std::invalid_argument("validity index needs k >= 2 clusters");
        counts.assign(static_cast<size_t>(k), 0);
        centroids = Eigen::MatrixXd::Zero(k, f.dims());
        for (Eigen::Index i = 0; i < f.count(); ++i) {
            const int a = assignments[static_cast<size_t>(i)];
            if (a < 0) throw std::invalid_argument("negative cluster index");
            centroids.row(a) += f.rows.row(i).cast<double>();
            ++counts[static_cast<size_t>(a)];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] == 0)
                throw std::invalid_argument("validity index: empty cluster " + std::to_string(c));
            centroids.row(c) /= static_cast<double>(counts[static_cast<size_t>(c)]);
        }
    }
};

}  // namespace

double calinski_harabasz(const FeatureMatrix& features, const std::vector<int>& assignments) {
    features.validate();
    const ClusterStats st(features, assignments);
    const Eigen::Index n = features.count();
    if (n <= st.k) throw std::invalid_argument("calinski_harabasz: needs n > k");

    Eigen::VectorXd overall = Eigen::VectorXd::Zero(features.dims());
    for (Eigen::Index i = 0; i < n; ++i) overall += features.rows.row(i).cast<double>();
    overall /= static_cast<double>(n);

    double between = 0.0;
    for (int c = 0; c < st.k; ++c)
        between += static_cast<double>(st.counts[static_cast<size_t>(c)]) *
                   (st.centroids.row(c).transpose() - overall).squaredNorm();
    double within = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        within += sq_dist(features.rows, i, st.centroids.row(assignments[static_cast<size_t>(i)]).transpose());

    if (within == 0.0) return std::numeric_limits<double>::infinity();
    return (between / static_cast<double>(st.k - 1)) / (within / static_cast<double>(n - st.k));
}

double davies_bouldin(const FeatureMatrix& features, const std::vector<int>& assignments) {
    features.validate();
    const ClusterStats st(features, assignments);

    std::vector<double> scatter(static_cast<size_t>(st.k), 0.0);
    for (Eigen::Index i = 0; i < features.count(); ++i) {
        const int a = assignments[static_cast<size_t>(i)];
        scatter[static_cast<size_t>(a)] += std::sqrt(sq_dist(features.rows, i, st.centroids.row(a).transpose()));
    }
    for (int c = 0; c < st.k; ++c) scatter[static_cast<size_t>(c)] /= static_cast<double>(st.counts[static_cast<size_t>(c)]);

    double total = 0.0;
    for (int i = 0; i < st.k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < st.k; ++j) {
            if (i == j) continue;
            const double m = (st.centroids.row(i) - st.centroids.row(j)).norm();
            if (m == 0.0)
                throw std::invalid_argument("davies_bouldin: coincident centroids " + std::to_string(i) +
                                            " and " + std::to_string(j));
            worst = std::max(worst, (scatter[static_cast<size_t>(i)] + scatter[static_cast<size_t>(j)]) / m);
        }
        total += worst;
    }
    return total / static_cast<double>(st.k);
}

double silhouette(const FeatureMatrix& features, const std::vector<int>& assignments) {
    features.validate();
    const ClusterStats st(features, assignments);
    const Eigen::Index n = features.count();
    if (n < 3) throw std::invalid_argument("silhouette: needs n >= 3");

    // Pairwise Euclidean distances via the Gram expansion, in double.
    const Eigen::MatrixXd x = features.rows.cast<double>();
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * (x * x.transpose())).colwise() + sq;
    d2.rowwise() += sq.transpose();
    const Eigen::MatrixXd dist = d2.cwiseMax(0.0).cwiseSqrt();

    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = assignments[static_cast<size_t>(i)];
        if (st.counts[static_cast<size_t>(own)] <= 1) continue;  // singleton: s = 0

        std::vector<double> sums(static_cast<size_t>(st.k), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[static_cast<size_t>(assignments[static_cast<size_t>(j)])] += dist(i, j);
        }
        const double a = sums[static_cast<size_t>(own)] / static_cast<double>(st.counts[static_cast<size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < st.k; ++c) {
            if (c == own) continue;
            b = std::min(b, sums[static_cast<size_t>(c)] / static_cast<double>(st.counts[static_cast<size_t>(c)]));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

ValidityReport validity_report(const FeatureMatrix& features, const std::vector<int>& assignments) {
    ValidityReport r;
    r.calinski_harabasz = calinski_harabasz(features, assignments);
    r.davies_bouldin = davies_bouldin(features, assignments);
    r.silhouette = silhouette(features, assignments);
    return r;
}

SceneLabeling label_scenes(const ClusterResult& result) {
    const auto sizes = result.cluster_sizes();
    if (sizes.size() != 2) throw std::invalid_argument("label_scenes: needs exactly 2 clusters");
    SceneLabeling out;
    if (sizes[0] == sizes[1]) {
        out.inshore_cluster = 0;
        out.tie_warning = true;
    } else {
        out.inshore_cluster = sizes[0] < sizes[1] ? 0 : 1;
    }
    out.labels.reserve(result.assignments.size());
    for (int a : result.assignments)
        out.labels.push_back(a == out.inshore_cluster ? Scene::Inshore : Scene::Offshore);
    return out;
}

double external_accuracy(const std::vector<Scene>& predicted, const std::vector<Scene>& reference) {
    if (predicted.size() != reference.size())
        throw std::invalid_argument("external_accuracy: label list lengths differ");
    if (predicted.empty()) throw std::invalid_argument("external_accuracy: empty labels");
    size_t agree = 0;
    for (size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == reference[i]) ++agree;
    const size_t best = std::max(agree, predicted.size() - agree);
    return static_cast<double>(best) / static_cast<double>(predicted.size());
}

}  // namespace scenebal
