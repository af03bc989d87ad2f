#pragma once

#include "scenebal/scene.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace scenebal {

// Row-per-image feature collection; ids align with rows when present.
struct FeatureMatrix {
    Eigen::MatrixXf rows;
    std::vector<std::string> image_ids;

    Eigen::Index count() const { return rows.rows(); }
    Eigen::Index dims() const { return rows.cols(); }
    void validate() const;
};

struct ClusterResult {
    std::vector<int> assignments;
    Eigen::MatrixXd centroids;  // k x d
    double inertia = 0.0;
    int iterations_used = 0;
    // Set when the data could not sustain k nonempty clusters (coincident
    // points); assignments then collapse onto the lowest index by the tie rule.
    bool degenerate = false;

    std::vector<int> cluster_sizes() const;
};

// Lloyd iterations from k-means++ seeding, squared-Euclidean metric, ties to
// the lowest centroid index, empty clusters reseeded to the point farthest
// from its centroid. Runs `restarts` seeded starts and keeps the lowest
// inertia. Deterministic per seed.
ClusterResult kmeans(const FeatureMatrix& features, int k = 2, uint64_t seed = 0,
                     int max_iter = 300, double tol = 1e-6, int restarts = 10);

// Between/within dispersion ratio (B/(k-1))/(W/(n-k)); +inf when W == 0.
double calinski_harabasz(const FeatureMatrix& features, const std::vector<int>& assignments);

// Mean over clusters of the worst (S_i + S_j)/M_ij; rejects coincident centroids.
double davies_bouldin(const FeatureMatrix& features, const std::vector<int>& assignments);

// Mean of (b-a)/max(a,b) per point; singleton clusters contribute 0.
double silhouette(const FeatureMatrix& features, const std::vector<int>& assignments);

struct ValidityReport {
    double calinski_harabasz = 0.0;
    double davies_bouldin = 0.0;
    double silhouette = 0.0;
};

ValidityReport validity_report(const FeatureMatrix& features, const std::vector<int>& assignments);

struct SceneLabeling {
    std::vector<Scene> labels;   // per row
    int inshore_cluster = 0;
    bool tie_warning = false;    // equal cluster sizes; index 0 taken as inshore
};

// The smaller cluster is the inshore scene, the larger the offshore one.
SceneLabeling label_scenes(const ClusterResult& result);

// Agreement fraction under the better of the two inshore/offshore pairings.
double external_accuracy(const std::vector<Scene>& predicted, const std::vector<Scene>& reference);

}  // namespace scenebal
