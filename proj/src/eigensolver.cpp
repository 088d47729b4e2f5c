#include "hotspot/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace hotspot::fem {

namespace {

// splitmix64: deterministic start vectors independent of libstdc++ internals
struct SplitMix {
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    Real uniform() { return static_cast<Real>(next() >> 11) * 0x1.0p-53; }
};

Vector random_vector(Eigen::Index n, std::uint64_t seed) {
    SplitMix rng{seed};
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
    return v;
}

struct ConstantMode {
    Vector ones;
    Vector m_ones;  // M * ones
    Real area;      // ones' M ones

    void project(Vector& v) const { v -= (m_ones.dot(v) / area) * ones; }
};

Real pair_residual(const SparseMatrix& K, const SparseMatrix& M, Real mu, const Vector& v) {
    const Vector kv = K * v;
    const Real denom = kv.norm();
    if (denom > 0.0) return (kv - mu * (M * v)).norm() / denom;
    return 0.0;
}

std::vector<EigenPair> finish(const SparseMatrix& K, const SparseMatrix& M,
                              const ConstantMode& cm, std::vector<EigenPair> pairs) {
    // prepend the exact kernel pair; residual scaled by ||K||_F since ||K v||
    // vanishes on the kernel
    EigenPair constant;
    constant.vector = cm.ones / std::sqrt(cm.area);
    constant.value = constant.vector.dot(K * constant.vector);
    const Real kf = std::sqrt(Real(K.squaredNorm()));
    constant.residual =
        (K * constant.vector - constant.value * (M * constant.vector)).norm() / std::max(kf, 1e-300);
    std::vector<EigenPair> out;
    out.push_back(std::move(constant));
    std::sort(pairs.begin(), pairs.end(),
              [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
    for (auto& p : pairs) out.push_back(std::move(p));
    return out;
}

std::vector<EigenPair> shift_invert_lanczos(const SparseMatrix& K, const SparseMatrix& M,
                                            const SolverOptions& opts, const ConstantMode& cm) {
    const Eigen::Index n = K.rows();
    const int want = opts.k - 1;  // beyond the deflated constant
    const Real trace_ratio = [&] {
        Real tk = 0, tm = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            tk += K.coeff(i, i);
            tm += M.coeff(i, i);
        }
        return tk / std::max(tm, 1e-300);
    }();
    const Real sigma = 1e-6 * std::max(trace_ratio, 1e-12);
    SparseMatrix A = K + sigma * M;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw FemError("eigensolver: sparse factorization of the shifted operator failed");

    const int m_max = std::max({3 * opts.k + 12, 40, opts.k + 2});
    std::vector<Vector> basis;
    basis.reserve(m_max);
    std::vector<Real> alpha, beta;

    Vector v = random_vector(n, opts.seed);
    cm.project(v);
    v /= std::sqrt(v.dot(M * v));
    basis.push_back(v);

    std::vector<EigenPair> best;
    for (int j = 0; j < m_max; ++j) {
        Vector w = ldlt.solve(M * basis[j]);
        cm.project(w);
        const Real a = w.dot(M * basis[j]);
        alpha.push_back(a);
        w -= a * basis[j];
        if (j > 0) w -= beta[j - 1] * basis[j - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) w -= b.dot(M * w) * b;
        Real bnorm = std::sqrt(std::max(w.dot(M * w), 0.0));
        if (!(bnorm > 1e-14)) {
            // invariant subspace: restart direction
            Vector r = random_vector(n, opts.seed + 7919 * (j + 1));
            cm.project(r);
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& b : basis) r -= b.dot(M * r) * b;
            bnorm = std::sqrt(std::max(r.dot(M * r), 0.0));
            if (!(bnorm > 1e-14)) break;
            w = r;
        }
        beta.push_back(bnorm);
        basis.push_back(w / bnorm);

        const int m = j + 1;
        if (m < opts.k + 1 || (m % 4 != 0 && m < m_max - 1)) continue;

        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        // largest theta of (K + sigma M)^-1 M  <->  smallest mu
        std::vector<EigenPair> pairs;
        bool all_ok = true;
        for (int idx = 0; idx < want && idx < m; ++idx) {
            const int col = m - 1 - idx;
            const Real theta = es.eigenvalues()(col);
            if (!(theta > 0.0)) {
                all_ok = false;
                break;
            }
            Vector x = Vector::Zero(n);
            for (int i = 0; i < m; ++i) x += es.eigenvectors()(i, col) * basis[i];
            cm.project(x);
            x /= std::sqrt(x.dot(M * x));
            EigenPair p;
            p.value = 1.0 / theta - sigma;
            p.value = x.dot(K * x) / x.dot(M * x);  // Rayleigh refinement
            p.vector = std::move(x);
            p.residual = pair_residual(K, M, p.value, p.vector);
            if (p.residual > opts.tol) all_ok = false;
            pairs.push_back(std::move(p));
        }
        if (static_cast<int>(pairs.size()) == want) best = pairs;
        if (all_ok && static_cast<int>(pairs.size()) == want) return pairs;
    }
    if (static_cast<int>(best.size()) == want) {
        Real worst = 0;
        for (const auto& p : best) worst = std::max(worst, p.residual);
        if (worst <= 100 * opts.tol) return best;  // near miss is still reported below
        throw FemError("eigensolver: Lanczos did not converge; worst residual " +
                       std::to_string(worst));
    }
    throw FemError("eigensolver: Lanczos failed to produce the requested pairs");
}

std::vector<EigenPair> lobpcg(const SparseMatrix& K, const SparseMatrix& M,
                              const SolverOptions& opts, const ConstantMode& cm) {
    const Eigen::Index n = K.rows();
    const int want = opts.k - 1;
    const int m = want + 3;
    Vector dinv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Real d = K.coeff(i, i);
        dinv[i] = d > 0 ? 1.0 / d : 1.0;
    }
    Eigen::MatrixXd X(n, m);
    for (int j = 0; j < m; ++j) {
        Vector v = random_vector(n, opts.seed + 131 * j);
        cm.project(v);
        X.col(j) = v;
    }
    const auto b_orthonormalize = [&](Eigen::MatrixXd& S) {
        const Eigen::MatrixXd G = S.transpose() * (M * S).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        std::vector<int> keep;
        const Real cutoff = std::max(es.eigenvalues().maxCoeff(), 1e-300) * 1e-12;
        for (int i = 0; i < G.rows(); ++i)
            if (es.eigenvalues()(i) > cutoff) keep.push_back(i);
        Eigen::MatrixXd U(G.rows(), keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i)
            U.col(i) = es.eigenvectors().col(keep[i]) / std::sqrt(es.eigenvalues()(keep[i]));
        S = (S * U).eval();
    };
    b_orthonormalize(X);

    Eigen::MatrixXd P;  // previous search directions
    for (int it = 0; it < opts.max_iter; ++it) {
        const Eigen::MatrixXd KX = K * X;
        const Eigen::MatrixXd MX = M * X;
        const Eigen::MatrixXd Xt_K_X = X.transpose() * KX;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(Xt_K_X);
        const Eigen::MatrixXd Y = small.eigenvectors();
        const Eigen::VectorXd theta = small.eigenvalues();
        const Eigen::MatrixXd Xr = X * Y;
        const Eigen::MatrixXd R = K * Xr - (M * Xr) * theta.asDiagonal();

        bool done = true;
        for (int j = 0; j < want; ++j) {
            const Real denom = std::max((K * Xr.col(j)).norm(), 1e-300);
            if (R.col(j).norm() / denom > opts.tol) {
                done = false;
                break;
            }
        }
        if (done) {
            std::vector<EigenPair> pairs;
            for (int j = 0; j < want; ++j) {
                EigenPair p;
                Vector x = Xr.col(j);
                cm.project(x);
                x /= std::sqrt(x.dot(M * x));
                p.value = x.dot(K * x) / x.dot(M * x);
                p.residual = pair_residual(K, M, p.value, x);
                p.vector = std::move(x);
                pairs.push_back(std::move(p));
            }
            return pairs;
        }

        Eigen::MatrixXd W(n, m);
        for (int j = 0; j < m; ++j) {
            Vector w = dinv.asArray().matrix().asDiagonal() * R.col(j);
            cm.project(w);
            W.col(j) = w;
        }
        Eigen::MatrixXd S(n, P.size() ? 3 * m : 2 * m);
        S.leftCols(m) = Xr;
        S.middleCols(m, m) = W;
        if (P.size()) S.rightCols(m) = P;
        b_orthonormalize(S);
        const Eigen::MatrixXd Ks = S.transpose() * (K * S).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(Ks);
        const Eigen::MatrixXd Z = rr.eigenvectors().leftCols(m);
        P = S.rightCols(S.cols() - m) * Z.bottomRows(S.cols() - m);
        X = S * Z;
    }
    throw FemError("eigensolver: LOBPCG did not converge within the iteration budget");
}

}  // namespace

std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M,
                                           const SolverOptions& opts) {
    if (opts.k < 2) throw ParameterError("smallest_eigenpairs: k must be >= 2");
    if (!(opts.tol > 0.0)) throw ParameterError("smallest_eigenpairs: tol must be > 0");
    if (K.rows() != M.rows()) throw ParameterError("smallest_eigenpairs: dimension mismatch");
    ConstantMode cm;
    cm.ones = Vector::Ones(K.rows());
    cm.m_ones = M * cm.ones;
    cm.area = cm.ones.dot(cm.m_ones);

    std::vector<EigenPair> pairs;
    if (opts.method == SolverOptions::Method::Lobpcg) {
        try {
            pairs = lobpcg(K, M, opts, cm);
        } catch (const FemError&) {
            pairs = shift_invert_lanczos(K, M, opts, cm);  // robust fallback
        }
    } else {
        pairs = shift_invert_lanczos(K, M, opts, cm);
    }
    return finish(K, M, cm, std::move(pairs));
}

}  // namespace hotspot::fem
