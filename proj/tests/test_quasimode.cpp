#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "steklov/annulus_oracle.hpp"
#include "steklov/quasimode.hpp"

using namespace steklov;

namespace {

std::vector<double> mu_values(const ComparisonSequence& seq) {
    std::vector<double> v;
    for (const auto& e : seq.entries) v.push_back(e.mu);
    return v;
}

void check_partition_invariants(const ClusterPartition& part, const std::vector<double>& lambdas,
                                const std::vector<double>& mus, int k,
                                const std::vector<double>& lengths) {
    // disjoint with gaps >= eps
    for (int i = 1; i < part.cluster_count(); ++i)
        CHECK(part.intervals[i].lo >= part.intervals[i - 1].hi + part.eps - 1e-12);
    // every lambda in some interval
    for (int n = 0; n < static_cast<int>(lambdas.size()); ++n)
        CHECK(part.lambda_cluster[n] >= 0);
    // every mu below the last interval end in some interval
    const double hi = part.intervals.back().hi;
    for (int j = 0; j < static_cast<int>(mus.size()); ++j)
        if (mus[j] <= hi) CHECK(part.mu_cluster[j] >= 0);
    // each interval holds at least one lambda and one mu
    for (int i = 0; i < part.cluster_count(); ++i) {
        CHECK(!part.lambda_members(i).empty());
        CHECK(!part.mu_members(i).empty());
    }
    // property (3): for i >= 2 at most one distinct element per progression
    // (each distinct element contributes the cos/sin pair)
    for (int i = 1; i < part.cluster_count(); ++i) {
        for (int j = 0; j < k; ++j) {
            std::set<long> distinct;
            const double alpha = kTwoPi / lengths[j];
            for (int e : part.mu_members(i)) {
                const double q = mus[e] / alpha;
                if (std::abs(q - std::round(q)) < 1e-9) distinct.insert(std::lround(q));
            }
            CHECK(distinct.size() <= 1);
        }
    }
}

}  // namespace

TEST_CASE("clustering of isolated integer spectrum") {
    std::vector<double> lam = {0, 1, 1, 2, 2};
    std::vector<double> mu = {0, 1, 1, 2, 2, 3, 3, 4, 4};
    const ClusterPartition part = cluster_spectrum(lam, mu, 0.1, 1, kTwoPi);
    REQUIRE(part.cluster_count() >= 3);
    CHECK(part.lambda_cluster[0] == 0);
    CHECK(part.lambda_cluster[1] == 1);
    CHECK(part.lambda_cluster[2] == 1);
    CHECK(part.lambda_cluster[3] == 2);
    CHECK(part.lambda_cluster[4] == 2);
    check_partition_invariants(part, lam, mu, 1, {kTwoPi});
}

TEST_CASE("clustering of the perturbed example") {
    std::vector<double> lam = {0, 0.999, 1.001, 1.998};
    std::vector<double> mu = {0, 1, 1, 2, 2, 3, 3};
    const ClusterPartition part = cluster_spectrum(lam, mu, 0.1, 1, kTwoPi);
    CHECK(part.lambda_cluster[0] == 0);
    CHECK(part.lambda_cluster[1] == 1);
    CHECK(part.lambda_cluster[2] == 1);
    CHECK(part.lambda_cluster[3] == 2);
}

TEST_CASE("eps precondition is enforced") {
    std::vector<double> lam = {0, 1}, mu = {0, 1, 2};
    CHECK_THROWS_AS(cluster_spectrum(lam, mu, 0.3, 1, kTwoPi), ConfigError);
}

struct DiskFixture {
    KoebeDomain d = testutil::disk_domain();
    SteklovProblem p = assemble_eigensystem(d, 32);
    SteklovSpectrum sp = solve_spectrum(p, 14);
    ComparisonSequence seq = comparison_sequence({kTwoPi}, sp.size() + 40);
    ClusterPartition part =
        cluster_spectrum(sp.eigenvalues, mu_values(seq), 0.9 * kPi / (2.0 * kTwoPi), 1, kTwoPi);
    CoefficientMatrix cm = coefficient_matrix(p, sp);
};

TEST_CASE("disk coefficient matrix is block orthogonal") {
    DiskFixture fx;
    for (int n = 0; n < fx.sp.size(); ++n) {
        CHECK(fx.cm.row_norms[n] == Catch::Approx(1.0).margin(1e-6));
    }
    // cross-cluster entries vanish: both bases span identical 2-D spaces
    for (int n = 0; n < fx.sp.size(); ++n) {
        for (int e = 0; e < fx.cm.seq.size(); ++e) {
            if (e >= static_cast<int>(fx.part.mu_cluster.size())) continue;
            if (fx.part.mu_cluster[e] != fx.part.lambda_cluster[n])
                CHECK(std::abs(fx.cm.a(n, e)) < 1e-8);
        }
    }
}

TEST_CASE("disk decomposition has negligible residual and exact split") {
    DiskFixture fx;
    for (int n = 0; n < fx.sp.size(); ++n) {
        const QuasimodeDecomposition dec =
            decompose_eigenfunction(fx.p, fx.sp, fx.part, fx.cm, n);
        CHECK(dec.f_norm <= 1e-8);
        CHECK(dec.psi_norm * dec.psi_norm + dec.f_norm * dec.f_norm ==
              Catch::Approx(1.0).margin(1e-10));
        // psi + f = phi coefficientwise
        const Eigen::VectorXd sum = dec.psi.comp[0] + dec.residual.comp[0];
        CHECK((sum - fx.sp.eigenfunctions[n].comp[0]).cwiseAbs().maxCoeff() < 1e-12);
        if (n >= 1) {
            CHECK(dec.comp[0].single_mode);
            CHECK(dec.comp[0].m == (n + 1) / 2);
            // frequency condition |lambda - 2 pi m / L| <= 2 pi / L
            CHECK(std::abs(fx.sp.eigenvalues[n] - dec.comp[0].m) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("disk near-orthogonality deviations at machine level") {
    DiskFixture fx;
    const NearOrthogonalityReport rep = near_orthogonality_report(fx.cm, fx.part);
    REQUIRE(!rep.deviations.empty());
    for (const auto& dev : rep.deviations) {
        CHECK(dev.col_dev < 1e-8);
        CHECK(dev.row_dev < 1e-8);
    }
}

TEST_CASE("scalar cluster deviation is |a^2 - 1|") {
    CoefficientMatrix cm;
    cm.a = Eigen::MatrixXd::Constant(1, 1, 0.9);
    cm.seq = comparison_sequence({kTwoPi}, 1);
    ClusterPartition part;
    part.intervals.push_back({-0.5, 0.5});
    part.lambda_cluster = {0};
    part.mu_cluster = {0};
    const NearOrthogonalityReport rep = near_orthogonality_report(cm, part);
    REQUIRE(rep.deviations.size() == 1);
    CHECK(rep.deviations[0].col_dev == Catch::Approx(std::abs(0.81 - 1.0)).epsilon(1e-12));
}

TEST_CASE("disk quasimode defects vanish") {
    KoebeDomain d = testutil::disk_domain();
    const SteklovProblem p = assemble_eigensystem(d, 32);
    for (int m : {1, 4, 9, 16}) {
        CHECK(quasimode_defect(p, m, 0) <= 1e-10);
    }
    CHECK_THROWS_AS(quasimode_defect(p, 17, 0), ModeOutOfRange);
}

TEST_CASE("annulus defect matches the two-by-two oracle") {
    const double eps = 0.5;
    KoebeDomain d = testutil::annulus_domain(eps);
    const SteklovProblem p = assemble_eigensystem(d, 32);
    const int m = 4;
    const double defect = quasimode_defect(p, m, 0);

    // Exact per-mode pencil on the scaled geometry.
    const double a = d.scale_factor, b = eps * d.scale_factor;
    const double em = std::pow(b / a, m);
    Eigen::Matrix2d N2, S2;
    N2 << 0.0, em, em, 0.0;
    S2 << a / (2.0 * m), b / (2.0 * m) * em, a / (2.0 * m) * em, b / (2.0 * m);
    const Eigen::Matrix2d A2 = 0.5 * (Eigen::Matrix2d::Identity() - N2);
    const double mu = kTwoPi * m / (kTwoPi * a);
    const Eigen::Vector2d e1(1.0, 0.0);
    const Eigen::Vector2d r = (A2 - mu * S2) * e1;
    const Eigen::Vector2d be = S2 * e1;
    // weighted component norms: ||(x_out, x_in)||^2 = pi a x_out^2 + pi b x_in^2
    auto wnorm = [&](const Eigen::Vector2d& v) {
        return std::sqrt(kPi * a * v[0] * v[0] + kPi * b * v[1] * v[1]);
    };
    const double oracle = wnorm(r) / wnorm(be);
    CHECK(defect == Catch::Approx(oracle).epsilon(0.10));
    // and the defect tracks the eigenvalue perturbation scale |sigma_-(4) - 4|
    auto lo = annulus_eigenvalues(eps, m).first;
    CHECK(defect > 0.05 * std::abs(lo.sigma - m));
    CHECK(defect < 20.0 * std::abs(lo.sigma - m));
}

TEST_CASE("cosine-weight defects decrease in the mode") {
    KoebeDomain d = testutil::cosine_disk_domain(0.5);
    const SteklovProblem p = assemble_eigensystem(d, 64);
    const double d4 = quasimode_defect(p, 4, 0);
    const double d8 = quasimode_defect(p, 8, 0);
    const double d16 = quasimode_defect(p, 16, 0);
    CHECK(d8 < d4);
    CHECK(d16 < d8);
    CHECK(d4 > 1e-12);  // genuinely nonzero on a weighted domain
}

TEST_CASE("annulus clustering over the computed spectrum") {
    const double eps = 0.5;
    KoebeDomain d = testutil::annulus_domain(eps);
    const SteklovProblem p = assemble_eigensystem(d, 64);
    const SteklovSpectrum sp = solve_spectrum(p, 56);
    std::vector<double> lengths = {kTwoPi, kTwoPi * eps};
    const ComparisonSequence seq = comparison_sequence(lengths, sp.size() + 60);
    const double L = kTwoPi;
    const double eps_cl = 0.9 * kPi / (2.0 * 2.0 * L);
    const ClusterPartition part =
        cluster_spectrum(sp.eigenvalues, mu_values(seq), eps_cl, 2, L);
    check_partition_invariants(part, sp.eigenvalues, mu_values(seq), 2, lengths);
    CHECK(part.cluster_count() >= 2);
}

TEST_CASE("rate constants for the annulus") {
    KoebeDomain d = testutil::annulus_domain(0.5);
    const ArclengthMap arc(d);
    const RateConstants rc = compute_rate_constants(d, arc, 0.2);
    CHECK(rc.delta > 0.0);
    CHECK(rc.gamma[0] == Catch::Approx(1.0));
    CHECK(rc.gamma[1] == Catch::Approx(0.5));
    CHECK(rc.third_bound[0] == Catch::Approx(0.0).margin(1e-14));
    CHECK(rc.delta == Catch::Approx(std::min(0.5 * 0.2 / 2.0, 0.1)));
}

TEST_CASE("interior quasimode reduces to harmonic polynomials on the disk") {
    KoebeDomain d = testutil::disk_domain();
    const ArclengthMap arc(d);
    InteriorQuasimode q;
    q.component = 0;
    q.m = 5;
    q.b_plus = 0.7;
    q.b_minus = -0.4;
    q.collar_width = 0.5;
    for (double r : {0.999, 0.9, 0.75}) {
        for (double th : {0.0, 1.1, 3.9}) {
            const Vec2 x{r * std::cos(th), r * std::sin(th)};
            const double expect =
                std::pow(r, 5) * (0.7 * std::cos(5 * th) - 0.4 * std::sin(5 * th));
            CHECK(q.eval(d, arc, x, false) == Catch::Approx(expect).margin(1e-12));
        }
    }
    CHECK_THROWS_AS(q.eval(d, arc, Vec2{0.1, 0.0}), OutsideCollar);
}

TEST_CASE("interior quasimode boundary trace and collar decay on the annulus") {
    const double eps = 0.5;
    KoebeDomain d = testutil::annulus_domain(eps);
    const ArclengthMap arc(d);

    // outer component, m = 6: |u| at depth xi = 0.1 is e^{-0.6} of the trace
    InteriorQuasimode qo;
    qo.component = 0;
    qo.m = 6;
    qo.b_plus = 1.0;
    qo.collar_width = 0.4;
    const double th = 0.37;
    const double trace = qo.eval(d, arc, Vec2{std::cos(th), std::sin(th)}, false);
    CHECK(trace == Catch::Approx(std::cos(6 * arc.forward(0, th))).margin(1e-9));
    const double r_depth = std::exp(-0.1);  // xi = log(1/r) = 0.1
    const double deep = qo.eval(d, arc, r_depth * Vec2{std::cos(th), std::sin(th)}, false);
    CHECK(std::abs(deep) <= std::exp(-0.6) * 1.2 + 1e-9);
    CHECK(std::abs(deep) >= std::exp(-0.6) * std::abs(trace) * 0.8 - 1e-9);

    // inner component: trace matches cos/sin in s and decays into r > eps
    InteriorQuasimode qi;
    qi.component = 1;
    qi.m = 4;
    qi.b_plus = 0.3;
    qi.b_minus = 0.9;
    qi.collar_width = 0.4;
    const double s_in = arc.forward(1, th);
    const double L_in = arc.length(1);
    const double expect_tr = 0.3 * std::cos(kTwoPi * 4 * s_in / L_in) +
                             0.9 * std::sin(kTwoPi * 4 * s_in / L_in);
    const double tr = qi.eval(d, arc, eps * Vec2{std::cos(th), std::sin(th)}, false);
    CHECK(tr == Catch::Approx(expect_tr).margin(1e-12));
    const double inward = qi.eval(d, arc, (eps * 1.1) * Vec2{std::cos(th), std::sin(th)}, false);
    CHECK(std::abs(inward) < std::hypot(0.3, 0.9));

    // cutoff profile
    CHECK(collar_cutoff(0.0, 0.2) == 1.0);
    CHECK(collar_cutoff(0.1, 0.2) == 1.0);
    CHECK(collar_cutoff(0.2, 0.2) == 0.0);
    CHECK(collar_cutoff(0.15, 0.2) == Catch::Approx(0.5).epsilon(1e-12));
}
