#include <odcal/bvls.hpp>

#include <ostream>

namespace odcal {

namespace {

struct StackedLeastSquares {
    const StackedSystem& sys;

    VectorXd residual(const VectorXd& x) const { return sys.residual(x); }
    VectorXd gradient(const VectorXd& r) const { return sys.gradient(r); }

    // Minimize ||A_F y - r1||^2 + lambda^2 ||y - r2||^2 through the q x q system
    // y = r2 + A_F^T (A_F A_F^T + lambda^2 I)^-1 (r1 - A_F r2).
    VectorXd solve_free(const std::vector<Eigen::Index>& free, const VectorXd& x) const
    {
        const Eigen::Index q = sys.num_sensors();
        const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
        MatrixXd af = MatrixXd::Zero(q, nf);
        VectorXd r1 = sys.counts - sys.a * x;
        VectorXd r2(nf);
        for (Eigen::Index j = 0; j < nf; ++j) {
            const Eigen::Index i = free[j];
            for (SparseMatrixXd::InnerIterator it(sys.a, i); it; ++it)
                af(it.row(), j) = it.value();
            r1 += af.col(j) * x[i];
            r2[j] = sys.prior[i];
        }
        if (q == 0)
            return r2;
        MatrixXd m = af * af.transpose();
        m.diagonal().array() += sys.lambda * sys.lambda;
        const VectorXd s = r1 - af * r2;
        return r2 + af.transpose() * m.llt().solve(s);
    }
};

} // namespace

VectorXd StackedSystem::b_tilde() const
{
    VectorXd b(num_sensors() + num_od());
    b << counts, lambda * prior;
    return b;
}

SparseMatrixXd StackedSystem::a_prime() const
{
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() + num_od()));
    for (Eigen::Index c = 0; c < a.outerSize(); ++c)
        for (SparseMatrixXd::InnerIterator it(a, c); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < num_od(); ++i)
        t.emplace_back(num_sensors() + i, i, lambda);
    SparseMatrixXd out(num_sensors() + num_od(), num_od());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

VectorXd StackedSystem::residual(const VectorXd& x) const
{
    VectorXd r(num_sensors() + num_od());
    r.head(num_sensors()) = a * x - counts;
    r.tail(num_od()) = lambda * (x - prior);
    return r;
}

VectorXd StackedSystem::gradient(const VectorXd& r) const
{
    return a.transpose() * r.head(num_sensors()) + lambda * r.tail(num_od());
}

StackedSystem make_stacked_system(SparseMatrixXd sensor_by_od, VectorXd counts, VectorXd prior, double lambda,
                                  const BoundsConfig& bounds)
{
    if (!(lambda > 0))
        throw Error("make_stacked_system: lambda must be positive");
    if (sensor_by_od.rows() != counts.size() || sensor_by_od.cols() != prior.size())
        throw Error("make_stacked_system: dimension mismatch");
    StackedSystem sys;
    sys.a = std::move(sensor_by_od);
    sys.a.makeCompressed();
    sys.counts = std::move(counts);
    sys.prior = std::move(prior);
    sys.lambda = lambda;
    sys.lower = VectorXd::Zero(sys.prior.size());
    sys.upper = bounds.u_factor * sys.prior.cwiseMax(bounds.u_floor);
    return sys;
}

BvlsResult<double> solve(const StackedSystem& sys, const BvlsOptions& options)
{
    if (sys.lower.size() != sys.num_od() || sys.upper.size() != sys.num_od())
        throw Error("solve: bound vectors do not match the number of OD pairs");
    if ((sys.lower.array() > sys.upper.array()).any())
        throw Error("solve: lower bound above upper bound");
    if (!(sys.lambda > 0))
        throw Error("solve: lambda must be positive");
    VectorXd start = sys.prior.cwiseMax(sys.lower).cwiseMin(sys.upper);
    StackedLeastSquares problem{sys};
    return detail::bvls_active_set<double>(problem, std::move(start), sys.lower, sys.upper, options);
}

void write_matrix_market(std::ostream& out, const StackedSystem& sys)
{
    const SparseMatrixXd ap = sys.a_prime();
    out.precision(17);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << ap.rows() << ' ' << ap.cols() << ' ' << ap.nonZeros() << '\n';
    for (Eigen::Index c = 0; c < ap.outerSize(); ++c)
        for (SparseMatrixXd::InnerIterator it(ap, c); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    const VectorXd b = sys.b_tilde();
    out << "%%MatrixMarket matrix array real general\n";
    out << b.size() << " 1\n";
    for (Eigen::Index i = 0; i < b.size(); ++i)
        out << b[i] << '\n';
}

} // namespace odcal
