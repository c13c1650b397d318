#include "conv/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace conv {

void CsrMatrix::matvec(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

std::vector<BcType> all_dirichlet_bc(const Grid& grid) {
    std::vector<BcType> bc(static_cast<std::size_t>(grid.num_nodes()), BcType::interior);
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i)
            if (grid.is_boundary(i, j)) bc[grid.index(i, j)] = BcType::dirichlet;
    return bc;
}

std::vector<BcType> psi_bc(const Grid& grid, const BoundaryPartition& bp) {
    std::vector<BcType> bc(static_cast<std::size_t>(grid.num_nodes()), BcType::interior);
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i) {
            switch (classify_node(grid, bp, i, j)) {
                case NodeClass::interior: break;
                case NodeClass::gamma1: bc[grid.index(i, j)] = BcType::dirichlet; break;
                case NodeClass::gamma2: bc[grid.index(i, j)] = BcType::neumann; break;
            }
        }
    return bc;
}

namespace {

// Stencil accumulator for one row: at most 5 distinct nodes.
struct RowEntries {
    int node[5];
    double coeff[5];
    int count = 0;

    void add(int n, double c) {
        for (int k = 0; k < count; ++k)
            if (node[k] == n) {
                coeff[k] += c;
                return;
            }
        node[count] = n;
        coeff[count] = c;
        ++count;
    }
};

// Neighbor index with mirror-ghost reflection at the row node.
int mirrored(int i, int di, int n) {
    int t = i + di;
    if (t < 0) t = -t;
    if (t > n) t = 2 * n - t;
    return t;
}

}  // namespace

LinearSystem assemble(const EllipticProblem& problem, const Grid& grid) {
    const int nn = grid.num_nodes();
    if (static_cast<int>(problem.bc.size()) != nn)
        throw invalid_parameter("assemble: bc vector size does not match grid");
    if (!(problem.diffusion > 0.0))
        throw invalid_parameter("assemble: diffusion coefficient must be positive");
    if (problem.velocity && !(problem.velocity->grid == grid))
        throw invalid_parameter("assemble: velocity grid mismatch");
    for (int j = 0; j <= grid.ny; ++j)
        for (int i = 0; i <= grid.nx; ++i) {
            const BcType t = problem.bc[grid.index(i, j)];
            if (grid.is_boundary(i, j) && t == BcType::interior)
                throw invalid_parameter("assemble: uncovered boundary node");
            if (!grid.is_boundary(i, j) && t != BcType::interior)
                throw invalid_parameter("assemble: boundary condition on interior node");
        }

    LinearSystem sys;
    sys.grid = grid;
    sys.dirichlet = problem.dirichlet.v.empty() ? ScalarField(grid) : problem.dirichlet;
    sys.unknown_of_node.assign(static_cast<std::size_t>(nn), -1);
    bool has_neumann = false;
    for (int k = 0; k < nn; ++k) {
        if (problem.bc[k] == BcType::dirichlet) continue;
        if (problem.bc[k] == BcType::neumann) has_neumann = true;
        sys.unknown_of_node[k] = static_cast<int>(sys.node_of_unknown.size());
        sys.node_of_unknown.push_back(k);
    }
    sys.symmetric = (problem.velocity == nullptr) && !has_neumann;

    const int nu = static_cast<int>(sys.node_of_unknown.size());
    sys.A.n = nu;
    sys.A.row_ptr.assign(static_cast<std::size_t>(nu) + 1, 0);
    sys.b.assign(static_cast<std::size_t>(nu), 0.0);

    const double hx = grid.hx(), hy = grid.hy();
    const double ax = problem.diffusion / (hx * hx);
    const double ay = problem.diffusion / (hy * hy);

    std::vector<std::pair<int, double>> cols;  // (column, value) per row, reused
    for (int r = 0; r < nu; ++r) {
        const int node = sys.node_of_unknown[r];
        const int i = node % (grid.nx + 1);
        const int j = node / (grid.nx + 1);

        RowEntries row;
        row.add(grid.index(i, j), 2.0 * ax + 2.0 * ay);
        row.add(grid.index(mirrored(i, -1, grid.nx), j), -ax);
        row.add(grid.index(mirrored(i, +1, grid.nx), j), -ax);
        row.add(grid.index(i, mirrored(j, -1, grid.ny)), -ay);
        row.add(grid.index(i, mirrored(j, +1, grid.ny)), -ay);

        if (problem.velocity) {
            const double vx = problem.velocity->x[node];
            const double vy = problem.velocity->y[node];
            if (problem.scheme == Scheme::upwind) {
                if (vx >= 0.0) {
                    row.add(grid.index(i, j), vx / hx);
                    row.add(grid.index(mirrored(i, -1, grid.nx), j), -vx / hx);
                } else {
                    row.add(grid.index(i, j), -vx / hx);
                    row.add(grid.index(mirrored(i, +1, grid.nx), j), vx / hx);
                }
                if (vy >= 0.0) {
                    row.add(grid.index(i, j), vy / hy);
                    row.add(grid.index(i, mirrored(j, -1, grid.ny)), -vy / hy);
                } else {
                    row.add(grid.index(i, j), -vy / hy);
                    row.add(grid.index(i, mirrored(j, +1, grid.ny)), vy / hy);
                }
            } else {
                row.add(grid.index(mirrored(i, +1, grid.nx), j), vx / (2.0 * hx));
                row.add(grid.index(mirrored(i, -1, grid.nx), j), -vx / (2.0 * hx));
                row.add(grid.index(i, mirrored(j, +1, grid.ny)), vy / (2.0 * hy));
                row.add(grid.index(i, mirrored(j, -1, grid.ny)), -vy / (2.0 * hy));
            }
        }

        double rhs = problem.source.v.empty() ? 0.0 : problem.source.v[node];
        cols.clear();
        for (int k = 0; k < row.count; ++k) {
            const int nb = row.node[k];
            const int u = sys.unknown_of_node[nb];
            if (u < 0)
                rhs -= row.coeff[k] * sys.dirichlet.v[nb];
            else
                cols.emplace_back(u, row.coeff[k]);
        }
        std::sort(cols.begin(), cols.end());
        sys.A.row_ptr[r + 1] = sys.A.row_ptr[r] + static_cast<int>(cols.size());
        for (auto& [c, v] : cols) {
            sys.A.col.push_back(c);
            sys.A.val.push_back(v);
        }
        sys.b[r] = rhs;
    }
    return sys;
}

namespace {

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm_vec(const std::vector<double>& a) { return std::sqrt(dot_vec(a, a)); }

std::vector<double> diag_of(const CsrMatrix& A) {
    std::vector<double> d(static_cast<std::size_t>(A.n), 1.0);
    for (int r = 0; r < A.n; ++r)
        for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
            if (A.col[k] == r && A.val[k] != 0.0) d[r] = A.val[k];
    return d;
}

// Jacobi-preconditioned CG; returns iterations used or -1 on failure.
int cg(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
       double abs_tol, int max_iter) {
    const std::size_t n = b.size();
    std::vector<double> d = diag_of(A);
    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.matvec(x, Ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - Ap[k];
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / d[k];
    p = z;
    double rz = dot_vec(r, z);
    for (int it = 0; it < max_iter; ++it) {
        if (norm_vec(r) <= abs_tol) return it;
        A.matvec(p, Ap);
        const double pAp = dot_vec(p, Ap);
        if (pAp == 0.0) return -1;
        const double alpha = rz / pAp;
        for (std::size_t k = 0; k < n; ++k) x[k] += alpha * p[k];
        for (std::size_t k = 0; k < n; ++k) r[k] -= alpha * Ap[k];
        for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / d[k];
        const double rz_new = dot_vec(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    return norm_vec(r) <= abs_tol ? max_iter : -1;
}

// Jacobi-preconditioned BiCGStab; returns iterations used or -1 on failure.
int bicgstab(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
             double abs_tol, int max_iter) {
    const std::size_t n = b.size();
    std::vector<double> d = diag_of(A);
    std::vector<double> r(n), r0(n), p(n), phat(n), v(n), s(n), shat(n), t(n);
    A.matvec(x, v);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - v[k];
    r0 = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    for (int it = 0; it < max_iter; ++it) {
        if (norm_vec(r) <= abs_tol) return it;
        const double rho_new = dot_vec(r0, r);
        if (rho_new == 0.0 || omega == 0.0) {
            // shadow-residual breakdown; restart from the current iterate
            A.matvec(x, v);
            for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - v[k];
            r0 = r;
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - omega * v[k]);
        for (std::size_t k = 0; k < n; ++k) phat[k] = p[k] / d[k];
        A.matvec(phat, v);
        const double r0v = dot_vec(r0, v);
        if (r0v == 0.0) {
            omega = 0.0;  // forces restart next pass
            continue;
        }
        alpha = rho / r0v;
        for (std::size_t k = 0; k < n; ++k) s[k] = r[k] - alpha * v[k];
        if (norm_vec(s) <= abs_tol) {
            for (std::size_t k = 0; k < n; ++k) x[k] += alpha * phat[k];
            return it + 1;
        }
        for (std::size_t k = 0; k < n; ++k) shat[k] = s[k] / d[k];
        A.matvec(shat, t);
        const double tt = dot_vec(t, t);
        omega = tt == 0.0 ? 0.0 : dot_vec(t, s) / tt;
        for (std::size_t k = 0; k < n; ++k) x[k] += alpha * phat[k] + omega * shat[k];
        for (std::size_t k = 0; k < n; ++k) r[k] = s[k] - omega * t[k];
    }
    return norm_vec(r) <= abs_tol ? max_iter : -1;
}

}  // namespace

ScalarField solve_linear(const LinearSystem& system, double tol, int max_iter) {
    if (!(tol > 0.0)) throw invalid_parameter("solve_linear: tolerance must be positive");
    const int nu = system.A.n;
    ScalarField out = system.dirichlet.v.empty() ? ScalarField(system.grid) : system.dirichlet;
    for (int k = 0; k < system.grid.num_nodes(); ++k)
        if (system.unknown_of_node[k] >= 0) out.v[k] = 0.0;
    if (nu == 0) return out;

    const double bnorm = norm_vec(system.b);
    std::vector<double> x(static_cast<std::size_t>(nu), 0.0);
    if (bnorm > 0.0) {
        const double abs_tol = tol * bnorm;
        int used = 0;
        bool done = false;
        // a couple of restarts guard against recurrence drift at tight tolerances
        for (int attempt = 0; attempt < 3 && !done; ++attempt) {
            const int it = system.symmetric ? cg(system.A, system.b, x, abs_tol, max_iter)
                                            : bicgstab(system.A, system.b, x, abs_tol, max_iter);
            if (it >= 0) used += it;
            std::vector<double> Ax;
            system.A.matvec(x, Ax);
            double rn = 0.0;
            for (int k = 0; k < nu; ++k) {
                const double r = system.b[k] - Ax[k];
                rn += r * r;
            }
            rn = std::sqrt(rn);
            if (rn <= abs_tol * 1.0001) done = true;
        }
        if (!done) {
            std::vector<double> Ax;
            system.A.matvec(x, Ax);
            double rn = 0.0;
            for (int k = 0; k < nu; ++k) {
                const double r = system.b[k] - Ax[k];
                rn += r * r;
            }
            throw solver_error("solve_linear: iteration budget exhausted",
                               std::sqrt(rn) / bnorm, used);
        }
    }
    for (int k = 0; k < nu; ++k) out.v[system.node_of_unknown[k]] = x[k];
    return out;
}

ScalarField solve_linear_refined(const LinearSystem& system, double tol, int max_iter,
                                 double abs_target, int max_rounds) {
    ScalarField out = solve_linear(system, tol, max_iter);
    const int nu = system.A.n;
    if (nu == 0) return out;

    std::vector<double> x(static_cast<std::size_t>(nu));
    for (int k = 0; k < nu; ++k) x[k] = out.v[system.node_of_unknown[k]];

    std::vector<double> Ax, d(static_cast<std::size_t>(nu));
    double prev_inf = std::numeric_limits<double>::infinity();
    for (int round = 0; round < max_rounds; ++round) {
        system.A.matvec(x, Ax);
        double inf = 0.0;
        for (int k = 0; k < nu; ++k) {
            d[k] = system.b[k] - Ax[k];
            inf = std::max(inf, std::abs(d[k]));
        }
        if (inf <= abs_target || inf >= 0.5 * prev_inf) break;  // done or stagnating
        prev_inf = inf;
        std::vector<double> e(static_cast<std::size_t>(nu), 0.0);
        const double dn = norm_vec(d);
        if (dn == 0.0) break;
        const int it = system.symmetric ? cg(system.A, d, e, tol * dn, max_iter)
                                        : bicgstab(system.A, d, e, tol * dn, max_iter);
        if (it < 0) break;
        for (int k = 0; k < nu; ++k) x[k] += e[k];
    }
    for (int k = 0; k < nu; ++k) out.v[system.node_of_unknown[k]] = x[k];
    return out;
}

ScalarField harmonic_lift(const ScalarField& tw, const Grid& grid, double tol, int max_iter) {
    if (!(tw.grid == grid)) throw invalid_parameter("harmonic_lift: trace grid mismatch");
    EllipticProblem p;
    p.diffusion = 1.0;
    p.source = ScalarField(grid);
    p.dirichlet = tw;
    p.bc = all_dirichlet_bc(grid);
    return solve_linear(assemble(p, grid), tol, max_iter);
}

ScalarField advect(const VectorField& velocity, const ScalarField& u, Scheme scheme) {
    if (!(velocity.grid == u.grid)) throw invalid_parameter("advect: grid mismatch");
    const Grid& g = u.grid;
    ScalarField out(g);
    const double hx = g.hx(), hy = g.hy();
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const int k = g.index(i, j);
            const double vx = velocity.x[k], vy = velocity.y[k];
            double dux, duy;
            if (scheme == Scheme::upwind) {
                dux = vx >= 0.0 ? (u.at(i, j) - u.at(i - 1, j)) / hx
                                : (u.at(i + 1, j) - u.at(i, j)) / hx;
                duy = vy >= 0.0 ? (u.at(i, j) - u.at(i, j - 1)) / hy
                                : (u.at(i, j + 1) - u.at(i, j)) / hy;
            } else {
                dux = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * hx);
                duy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * hy);
            }
            out.v[k] = vx * dux + vy * duy;
        }
    return out;
}

}  // namespace conv
