#include <gtest/gtest.h>

#include <random>

#include "gflow/manifold.hpp"
#include "gflow/oracles.hpp"
#include "gflow/verify.hpp"

using namespace gflow;

namespace {

void expect_vec_near(std::span<const double> got, std::initializer_list<double> want,
                     double tol = 1e-15) {
    ASSERT_EQ(got.size(), want.size());
    std::size_t i = 0;
    for (double w : want) EXPECT_NEAR(got[i++], w, tol) << "component " << i - 1;
}

} // namespace

TEST(Projection, SphereRadial) {
    const auto m = TargetManifold::sphere(3);
    expect_vec_near(m.project(Vector{2, 0, 0}).coords(), {1, 0, 0}, 0.0);
    expect_vec_near(m.project(Vector{1, 0, 0}).coords(), {1, 0, 0}, 0.0);
}

TEST(Projection, TorusBlockwiseMatchesDenseSearch) {
    const auto m = TargetManifold::torus2();
    const Vector v{2, 0, 0, 3};
    const auto p = m.project(v);
    expect_vec_near(p.coords(), {1, 0, 0, 1}, 0.0);
    // frozen from oracle --case torus_projection
    const auto dense = oracles::torus_nearest_dense(v);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(p[i], dense[i], 1e-9);
}

TEST(Projection, TorusRandomAgreesWithDenseSearch) {
    const auto m = TargetManifold::torus2();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int s = 0; s < 5; ++s) {
        Vector v(4);
        do {
            for (double& x : v) x = u(rng);
        } while (std::hypot(v[0], v[1]) < 0.5 || std::hypot(v[2], v[3]) < 0.5);
        const auto p = m.project(v);
        const auto dense = oracles::torus_nearest_dense(v, 400);
        for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(p[i], dense[i], 2e-4);
    }
}

TEST(Projection, OutsideTubularNeighbourhood) {
    const auto s = TargetManifold::sphere(3);
    try {
        s.project(Vector{0.3, 0.1, 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::OutsideTubularNeighbourhood);
    }
    const auto t = TargetManifold::torus2();
    EXPECT_THROW(t.project(Vector{2, 0, 0.1, 0.1}), Error);
    EXPECT_NO_THROW(s.project(Vector{0.5, 0, 0}));
}

TEST(Projection, DimensionMismatch) {
    const auto s = TargetManifold::sphere(3);
    try {
        s.project(Vector{1, 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DimensionMismatch);
    }
}

TEST(TangentProjector, HandValues) {
    const auto m = TargetManifold::sphere(3);
    expect_vec_near(m.tangent_project(Vector{1, 0, 0}, Vector{1, 0, 0}), {0, 0, 0});
    expect_vec_near(m.tangent_project(Vector{1, 0, 0}, Vector{0, 1, 0}), {0, 1, 0});
    const Vector p{0, 0, 1}, v{1, 1, 1};
    const auto oracle = oracles::sphere_projector_apply(p, v);
    const auto got = m.tangent_project(p, v);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(got[i], oracle[i]);
    expect_vec_near(got, {1, 1, 0});
}

TEST(TangentProjector, MatrixMatchesIdentityMinusOuter) {
    const auto m = TargetManifold::sphere(3);
    std::mt19937_64 rng(5);
    for (int s = 0; s < 50; ++s) {
        const Vector p = random_point(m, rng);
        const auto got = m.projector_matrix(p);
        const auto want = oracles::sphere_projector_matrix(p);
        for (std::size_t e = 0; e < 9; ++e) EXPECT_NEAR(got[e], want[e], 1e-15);
    }
}

TEST(Killing, SphereHandValues) {
    const auto m = TargetManifold::sphere(3);
    EXPECT_EQ(m.killing_count(), 3u);
    const auto x = m.killing_fields(Vector{1, 0, 0});
    expect_vec_near(x[0], {0, -1, 0}, 0.0);
    expect_vec_near(x[1], {0, 0, -1}, 0.0);
    expect_vec_near(x[2], {0, 0, 0}, 0.0);
}

TEST(Killing, SphereCountAndPlanes) {
    const auto m = TargetManifold::sphere(5);
    EXPECT_EQ(m.killing_count(), 10u);
    EXPECT_EQ(m.intrinsic_dim(), 4u);
    EXPECT_EQ(m.rotation_plane(0), (std::pair<std::size_t, std::size_t>{0, 1}));
    EXPECT_EQ(m.rotation_plane(3), (std::pair<std::size_t, std::size_t>{0, 4}));
    EXPECT_EQ(m.rotation_plane(4), (std::pair<std::size_t, std::size_t>{1, 2}));
    EXPECT_EQ(m.rotation_plane(9), (std::pair<std::size_t, std::size_t>{3, 4}));
}

TEST(Killing, PropertyAtHandPoints) {
    const auto m = TargetManifold::sphere(3);
    const Vector p{0, 0, 1}, q{0, 1, 0};
    for (std::size_t a = 0; a < 3; ++a) {
        const auto d = vec::sub(m.killing_field(p, a), m.killing_field(q, a));
        EXPECT_EQ(vec::dot(d, vec::sub(p, q)), 0.0);
    }
}

TEST(Killing, TorusHandValues) {
    const auto m = TargetManifold::torus2();
    EXPECT_EQ(m.killing_count(), 2u);
    const auto x = m.killing_fields(Vector{1, 0, 1, 0});
    expect_vec_near(x[0], {0, 1, 0, 0}, 0.0);
    expect_vec_near(x[1], {0, 0, 0, 1}, 0.0);
}

TEST(Killing, IndexOutOfRange) {
    const auto m = TargetManifold::torus2();
    try {
        m.killing_field(Vector{1, 0, 1, 0}, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IndexOutOfRange);
    }
}

TEST(DualFields, FrameSumMatchesRotationOracle) {
    const auto m = TargetManifold::sphere(3);
    std::mt19937_64 rng(9);
    for (int s = 0; s < 100; ++s) {
        const Vector p = random_point(m, rng);
        const auto oracle = oracles::rotation_frame_sum(p);
        const auto proj = oracles::sphere_projector_matrix(p);
        Vector sum(9, 0.0);
        const auto x = m.killing_fields(p);
        const auto y = m.dual_fields(p);
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) sum[i * 3 + j] += x[a][i] * y[a][j];
        for (std::size_t e = 0; e < 9; ++e) {
            EXPECT_NEAR(sum[e], oracle[e], 1e-15);
            EXPECT_NEAR(sum[e], proj[e], 1e-12);
        }
    }
}

TEST(DualFields, Reconstruction) {
    const auto reconstruct = [](const TargetManifold& m, const Vector& p, const Vector& v) {
        Vector r(v.size(), 0.0);
        for (std::size_t a = 0; a < m.killing_count(); ++a) {
            const double c = vec::dot(m.killing_field(p, a), v);
            const auto y = m.dual_field(p, a);
            for (std::size_t i = 0; i < v.size(); ++i) r[i] += c * y[i];
        }
        return r;
    };
    const auto s = TargetManifold::sphere(3);
    expect_vec_near(reconstruct(s, {0, 0, 1}, {1, 1, 0}), {1, 1, 0}, 0.0);
    const auto t = TargetManifold::torus2();
    expect_vec_near(reconstruct(t, {1, 0, 0, 1}, {0, 2, -3, 0}), {0, 2, -3, 0}, 0.0);
}

class ManifoldProperties : public ::testing::TestWithParam<int> {
protected:
    TargetManifold target() const {
        switch (GetParam()) {
        case 0: return TargetManifold::sphere(3);
        case 1: return TargetManifold::sphere(5);
        default: return TargetManifold::torus2();
        }
    }
};

TEST_P(ManifoldProperties, HoldOverRandomSamples) {
    Report rep;
    manifold_checks(target(), 42, 1000, rep);
    ASSERT_FALSE(rep.checks().empty());
    for (const auto& c : rep.checks()) EXPECT_TRUE(c.pass) << c.name << " = " << c.measured;
}

TEST_P(ManifoldProperties, KillingFieldsAreTangent) {
    const auto m = target();
    std::mt19937_64 rng(11);
    for (int s = 0; s < 1000; ++s) {
        const Vector p = random_point(m, rng);
        for (const auto& x : m.killing_fields(p)) {
            const auto px = m.tangent_project(p, x);
            EXPECT_LE(std::sqrt(vec::dist_sq(px, x)), 1e-15);
        }
    }
}

TEST_P(ManifoldProperties, ProjectionIsNearest) {
    const auto m = target();
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 0.08);
    for (int s = 0; s < 200; ++s) {
        const Vector p = random_point(m, rng);
        Vector v = p;
        for (double& x : v) x += normal(rng);
        const auto proj = m.project(v);
        const double best = vec::dist_sq(proj.coords(), v);
        for (int r = 0; r < 20; ++r) {
            const Vector q = random_point(m, rng);
            EXPECT_LE(best, vec::dist_sq(q, v) + 1e-14);
        }
        EXPECT_LE(m.constraint_residual(proj.coords()), kConstraintTol);
    }
}

INSTANTIATE_TEST_SUITE_P(Targets, ManifoldProperties, ::testing::Values(0, 1, 2));

TEST(ManifoldPoint, PointRejectsOffManifold) {
    const auto m = TargetManifold::sphere(3);
    EXPECT_NO_THROW(m.point({0, 1, 0}));
    EXPECT_THROW(m.point({0, 1.1, 0}), Error);
    EXPECT_THROW(TargetManifold::sphere(1), Error);
}
