#include "ufrkit/linear_models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ufrkit/error.hpp"

namespace ufrkit {

double LinearModel::predict(std::span<const double> row) const {
    if (row.size() != static_cast<std::size_t>(coef_.size())) throw DomainError("LinearModel: feature count mismatch");
    double v = intercept_;
    for (std::size_t j = 0; j < row.size(); ++j) v += coef_[static_cast<Eigen::Index>(j)] * row[j];
    return v;
}

namespace {

struct Centered {
    Matrix x;
    Vector y;
    Vector x_mean;
    double y_mean = 0.0;
};

Centered center(const Dataset& ds, bool intercept) {
    ds.validate();
    if (ds.rows() == 0) throw DomainError("linear model: empty dataset");
    Centered c;
    if (intercept) {
        c.x_mean = ds.x.colwise().mean();
        c.y_mean = ds.y.mean();
        c.x = ds.x.rowwise() - c.x_mean.transpose();
        c.y = ds.y.array() - c.y_mean;
    } else {
        c.x_mean = Vector::Zero(ds.x.cols());
        c.x = ds.x;
        c.y = ds.y;
    }
    return c;
}

LinearModel finish(const Centered& c, Vector beta) {
    const double intercept = c.y_mean - c.x_mean.dot(beta);
    return LinearModel(intercept, std::move(beta));
}

int numeric_rank(const Matrix& x) {
    if (x.cols() == 0 || x.rows() == 0) return 0;
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
}

}  // namespace

LinearModel fit_ols(const Dataset& ds, bool intercept) {
    const auto c = center(ds, intercept);
    const auto p = c.x.cols();
    if (p == 0) return finish(c, Vector(0));
    if (c.x.rows() < p + (intercept ? 1 : 0)) throw FitError("fit_ols: fewer observations than parameters");
    Eigen::ColPivHouseholderQR<Matrix> qr(c.x);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        std::ostringstream os;
        os << "fit_ols: design is rank deficient (rank " << qr.rank() << " < " << p << " columns)";
        throw FitError(os.str());
    }
    return finish(c, qr.solve(c.y));
}

double soft_threshold(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

LinearModel fit_penalized(const Dataset& ds, const Penalty& penalty, bool intercept) {
    if (!(penalty.lambda >= 0.0) || !std::isfinite(penalty.lambda))
        throw ValidationError("fit_penalized: lambda must be nonnegative");
    if (!(penalty.mu >= 0.0 && penalty.mu <= 1.0)) throw ValidationError("fit_penalized: mu must lie in [0, 1]");
    const auto c = center(ds, intercept);
    const auto p = c.x.cols();
    if (p == 0) return finish(c, Vector(0));

    if (penalty.kind == PenaltyKind::Ridge) {
        // d/d beta of 0.5 |y - X b|^2 + lambda |b|^2 gives (X^T X + 2 lambda I) b = X^T y.
        Matrix a = c.x.transpose() * c.x;
        a.diagonal().array() += 2.0 * penalty.lambda;
        const Vector rhs = c.x.transpose() * c.y;
        if (penalty.lambda == 0.0) {
            Eigen::ColPivHouseholderQR<Matrix> qr(c.x);
            qr.setThreshold(1e-10);
            if (qr.rank() < p) throw FitError("fit_penalized: ridge with lambda = 0 on a rank-deficient design");
            return finish(c, qr.solve(c.y));
        }
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() != Eigen::Success) throw FitError("fit_penalized: ridge system is not positive definite");
        return finish(c, llt.solve(rhs));
    }

    const double mu = penalty.kind == PenaltyKind::Lasso ? 1.0 : penalty.mu;
    const double l1 = penalty.lambda * mu;
    const double l2 = penalty.lambda * (1.0 - mu);
    const Vector norms = c.x.colwise().squaredNorm();
    Vector beta = Vector::Zero(p);
    Vector r = c.y;
    for (int sweep = 1; sweep <= penalty.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (norms[j] == 0.0) continue;
            const double old = beta[j];
            const double rho = c.x.col(j).dot(r) + norms[j] * old;
            const double updated = soft_threshold(rho, l1) / (norms[j] + l2);
            if (updated != old) {
                r.noalias() -= (updated - old) * c.x.col(j);
                beta[j] = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        if (max_change < penalty.tolerance) {
            auto model = finish(c, std::move(beta));
            model.set_sweeps(sweep);
            return model;
        }
    }
    std::ostringstream os;
    os << "fit_penalized: coordinate descent did not converge after " << penalty.max_sweeps << " sweeps";
    throw ConvergenceError(os.str());
}

Matrix PcaResult::transform(const Matrix& x) const {
    if (x.cols() != mean.size()) throw DomainError("PcaResult::transform: column count mismatch");
    const Matrix z = (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
    return z * loadings;
}

namespace {

Vector column_scales(const Matrix& centered) {
    const double n = static_cast<double>(centered.rows());
    Vector s(centered.cols());
    for (Eigen::Index j = 0; j < centered.cols(); ++j) {
        const double sd = n > 1.0 ? std::sqrt(centered.col(j).squaredNorm() / (n - 1.0)) : 0.0;
        s[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

void fix_sign(Eigen::Ref<Vector> v) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
}

}  // namespace

PcaResult pca(const Matrix& x, int k, bool standardize) {
    if (x.rows() < 2 || x.cols() < 1) throw DomainError("pca: need at least two rows and one column");
    if (!x.allFinite()) throw DomainError("pca: non-finite entries");
    PcaResult out;
    out.mean = x.colwise().mean();
    Matrix z = x.rowwise() - out.mean.transpose();
    out.scale = standardize ? column_scales(z) : Vector::Ones(x.cols());
    z = z.array().rowwise() / out.scale.transpose().array();
    Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinV);
    out.singular_values = svd.singularValues();
    const double s0 = out.singular_values.size() ? out.singular_values[0] : 0.0;
    const double tol = static_cast<double>(std::max(z.rows(), z.cols())) * 1e-13 * s0;
    out.rank = static_cast<int>((out.singular_values.array() > tol).count());
    if (k < 1 || k > out.rank) {
        std::ostringstream os;
        os << "pca: k = " << k << " outside [1, rank = " << out.rank << "]";
        throw DomainError(os.str());
    }
    out.loadings = svd.matrixV().leftCols(k);
    for (int c = 0; c < k; ++c) fix_sign(out.loadings.col(c));
    out.scores = z * out.loadings;
    const double total = out.singular_values.squaredNorm();
    out.explained_ratio = out.singular_values.head(k).array().square() / (total > 0.0 ? total : 1.0);
    return out;
}

LinearModel fit_pcr(const Dataset& ds, int k) {
    ds.validate();
    const auto pc = pca(ds.x, k, true);
    const double y_mean = ds.y.mean();
    const Vector yc = ds.y.array() - y_mean;
    // Scores are orthogonal, so the OLS coefficients decouple.
    Vector gamma(k);
    for (int c = 0; c < k; ++c) gamma[c] = pc.scores.col(c).dot(yc) / pc.scores.col(c).squaredNorm();
    const Vector beta = (pc.loadings * gamma).array() / pc.scale.array();
    return LinearModel(y_mean - pc.mean.dot(beta), beta);
}

LinearModel fit_pls(const Dataset& ds, int k) {
    const auto c = center(ds, true);
    const auto p = c.x.cols();
    const int rank = numeric_rank(c.x);
    if (k < 1 || k > rank) {
        std::ostringstream os;
        os << "fit_pls: k = " << k << " outside [1, rank = " << rank << "]";
        throw DomainError(os.str());
    }
    Matrix x = c.x;
    Vector y = c.y;
    Matrix w(p, k);
    Matrix load(p, k);
    Vector q(k);
    int used = 0;
    const double y_scale = std::max(c.y.norm(), 1e-300);
    for (int a = 0; a < k; ++a) {
        Vector wa = x.transpose() * y;
        const double wn = wa.norm();
        if (!(wn > 1e-14 * y_scale)) break;  // y already explained exactly
        wa /= wn;
        const Vector t = x * wa;
        const double tt = t.squaredNorm();
        if (!(tt > 0.0)) break;
        const Vector pa = x.transpose() * t / tt;
        const double qa = y.dot(t) / tt;
        x.noalias() -= t * pa.transpose();
        y.noalias() -= qa * t;
        w.col(a) = wa;
        load.col(a) = pa;
        q[a] = qa;
        ++used;
    }
    if (used == 0) return finish(c, Vector::Zero(p));
    const Matrix wu = w.leftCols(used);
    const Matrix pw = load.leftCols(used).transpose() * wu;
    const Vector beta = wu * pw.fullPivLu().solve(q.head(used));
    return finish(c, beta);
}

GroupComponents::GroupComponents(const Matrix& x, std::span<const std::string> groups,
                                 std::vector<std::string> selected)
    : names_(std::move(selected)) {
    if (groups.size() != static_cast<std::size_t>(x.cols())) throw DomainError("GroupComponents: label count mismatch");
    if (x.rows() < 2) throw DomainError("GroupComponents: need at least two rows");
    const auto n = x.rows();
    scores_.resize(n, static_cast<Eigen::Index>(names_.size()));
    explained_.resize(static_cast<Eigen::Index>(names_.size()));
    for (std::size_t g = 0; g < names_.size(); ++g) {
        Group grp;
        for (std::size_t j = 0; j < groups.size(); ++j)
            if (groups[j] == names_[g]) grp.columns.push_back(j);
        if (grp.columns.empty()) throw DomainError("pca_first_per_group: group '" + names_[g] + "' has no columns");
        Matrix sub(n, static_cast<Eigen::Index>(grp.columns.size()));
        for (std::size_t c = 0; c < grp.columns.size(); ++c)
            sub.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(grp.columns[c]));
        grp.mean = sub.colwise().mean();
        Matrix z = sub.rowwise() - grp.mean.transpose();
        grp.scale = column_scales(z);
        z = z.array().rowwise() / grp.scale.transpose().array();
        Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinV);
        grp.loading = svd.matrixV().col(0);
        fix_sign(grp.loading);
        Vector score = z * grp.loading;
        const double sd = std::sqrt(score.squaredNorm() / static_cast<double>(n - 1));
        grp.score_sd = sd > 0.0 ? sd : 1.0;
        scores_.col(static_cast<Eigen::Index>(g)) = score / grp.score_sd;
        const double total = svd.singularValues().squaredNorm();
        explained_[static_cast<Eigen::Index>(g)] =
            total > 0.0 ? svd.singularValues()[0] * svd.singularValues()[0] / total : 0.0;
        groups_.push_back(std::move(grp));
    }
}

void GroupComponents::transform_row(std::span<const double> row, std::span<double> out) const {
    if (out.size() != groups_.size()) throw DomainError("GroupComponents: output size mismatch");
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        const auto& grp = groups_[g];
        double s = 0.0;
        for (std::size_t c = 0; c < grp.columns.size(); ++c) {
            const auto e = static_cast<Eigen::Index>(c);
            s += (row[grp.columns[c]] - grp.mean[e]) / grp.scale[e] * grp.loading[e];
        }
        out[g] = s / grp.score_sd;
    }
}

Matrix GroupComponents::transform(const Matrix& x) const {
    Matrix out(x.rows(), static_cast<Eigen::Index>(groups_.size()));
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    std::vector<double> dst(groups_.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
        transform_row(row, dst);
        for (std::size_t g = 0; g < dst.size(); ++g) out(i, static_cast<Eigen::Index>(g)) = dst[g];
    }
    return out;
}

GroupComponents pca_first_per_group(const Matrix& x, std::span<const std::string> groups,
                                    std::vector<std::string> selected) {
    return GroupComponents(x, groups, std::move(selected));
}

}  // namespace ufrkit
