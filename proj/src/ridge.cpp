#include "gridcast/models.hpp"

#include <cmath>

namespace gridcast {

namespace {

// Solves A x = b for symmetric positive definite A (in place Cholesky).
// Returns false when a pivot is not strictly positive.
bool cholesky_solve(Matrix& A, std::vector<double>& b) {
    const std::size_t p = A.rows;
    for (std::size_t j = 0; j < p; ++j) {
        double d = A(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= A(j, k) * A(j, k);
        if (!(d > 0.0)) return false;
        const double Ljj = std::sqrt(d);
        A(j, j) = Ljj;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = A(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= A(i, k) * A(j, k);
            A(i, j) = s / Ljj;
        }
    }
    // forward: L z = b
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= A(i, k) * b[k];
        b[i] = s / A(i, i);
    }
    // backward: L' x = z
    for (std::size_t i = p; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < p; ++k) s -= A(k, i) * b[k];
        b[i] = s / A(i, i);
    }
    return true;
}

} // namespace

RidgeModel fit_ridge(const SampleSet& data, double alpha) {
    const std::size_t m = data.rows();
    const std::size_t p = data.cols();
    if (m == 0) throw TrainError("cannot fit on an empty sample set");
    if (alpha < 0.0) throw TrainError("alpha must be >= 0");
    for (double v : data.X.data)
        if (!std::isfinite(v)) throw TrainError("non-finite feature value");
    for (double v : data.y)
        if (!std::isfinite(v)) throw TrainError("non-finite target value");

    RidgeModel model;
    model.alpha = alpha;
    model.feature_names = data.feature_names;
    model.col_mean.assign(p, 0.0);
    model.col_std.assign(p, 1.0);

    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += data.X(i, j);
        model.col_mean[j] = s / static_cast<double>(m);
    }
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = data.X(i, j) - model.col_mean[j];
            s += d * d;
        }
        const double sd = std::sqrt(s / static_cast<double>(m));
        model.col_std[j] = sd > 0.0 ? sd : 1.0; // constant column stays zero
    }

    double ysum = 0.0;
    for (double v : data.y) ysum += v;
    model.intercept = ysum / static_cast<double>(m);

    // Normal equations on standardized, centered data: (Xs'Xs + aI) th = Xs'yc.
    Matrix A(p, p);
    std::vector<double> b(p, 0.0);
    std::vector<double> xs(p);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < p; ++j)
            xs[j] = (data.X(i, j) - model.col_mean[j]) / model.col_std[j];
        const double yc = data.y[i] - model.intercept;
        for (std::size_t j = 0; j < p; ++j) {
            b[j] += xs[j] * yc;
            for (std::size_t k = 0; k <= j; ++k) A(j, k) += xs[j] * xs[k];
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = j + 1; k < p; ++k) A(j, k) = A(k, j);
        A(j, j) += alpha;
    }

    if (!cholesky_solve(A, b))
        throw TrainError("normal equations are numerically singular; use alpha > 0");
    model.theta = std::move(b);
    model.fitted = true;
    return model;
}

double RidgeModel::predict_row(std::span<const double> x) const {
    if (!fitted) throw TrainError("model is not fitted");
    if (x.size() != theta.size())
        throw EvalError("feature count mismatch: model has " +
                        std::to_string(theta.size()) + ", row has " +
                        std::to_string(x.size()));
    double s = intercept;
    for (std::size_t j = 0; j < theta.size(); ++j)
        s += theta[j] * ((x[j] - col_mean[j]) / col_std[j]);
    return s;
}

std::vector<double> RidgeModel::predict(const Matrix& X) const {
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict_row(X.row(i));
    return out;
}

std::vector<double> RidgeModel::importance() const {
    if (!fitted) throw TrainError("model is not fitted");
    return theta;
}

nlohmann::json RidgeModel::to_json() const {
    if (!fitted) throw TrainError("model is not fitted");
    return {{"format", "ridge-v1"},
            {"alpha", alpha},
            {"intercept", intercept},
            {"theta", theta},
            {"col_mean", col_mean},
            {"col_std", col_std},
            {"feature_names", feature_names}};
}

RidgeModel RidgeModel::from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "ridge-v1")
        throw DataError("unrecognized ridge container format");
    RidgeModel m;
    m.alpha = j.at("alpha").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.theta = j.at("theta").get<std::vector<double>>();
    m.col_mean = j.at("col_mean").get<std::vector<double>>();
    m.col_std = j.at("col_std").get<std::vector<double>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (m.theta.size() != m.col_mean.size() || m.theta.size() != m.col_std.size() ||
        m.theta.size() != m.feature_names.size())
        throw DataError("inconsistent ridge container");
    m.fitted = true;
    return m;
}

} // namespace gridcast
