#include <gtest/gtest.h>

#include <random>

#include "gflow/presets.hpp"
#include "gflow/verify.hpp"
#include "gflow/weakform.hpp"

using namespace gflow;

namespace {

struct FlowRun {
    Grid grid;
    TargetManifold m;
    KernelTable k;
    FlowTrajectory t;
};

FlowRun sphere_run(double tol = 1e-8, std::size_t steps = 40) {
    Grid g = build_grid(Box::unit(1), {32}, 0.1);
    const auto m = TargetManifold::sphere(3);
    KernelTable k = build_kernel(g, 0.5, 2.0);
    FlowConfig cfg;
    cfg.h = 0.05;
    cfg.steps = steps;
    cfg.inner_tol = tol;
    auto t = run_flow(make_initial("half_equator", g, m, 0), cfg, k, m);
    return {std::move(g), m, std::move(k), std::move(t)};
}

FlowRun torus_run() {
    Grid g = build_grid(Box::unit(1), {24}, 0.1);
    const auto m = TargetManifold::torus2();
    KernelTable k = build_kernel(g, 0.5, 2.0);
    FlowConfig cfg;
    cfg.h = 0.05;
    cfg.steps = 15;
    auto t = run_flow(make_initial("random_uniform", g, m, 4), cfg, k, m);
    return {std::move(g), m, std::move(k), std::move(t)};
}

const FlowRun& reference() {
    static const FlowRun r = sphere_run();
    return r;
}

const FlowRun& torus() {
    static const FlowRun r = torus_run();
    return r;
}

FlowTrajectory constant_trajectory(const Grid& g, const TargetManifold& m, const KernelTable& k) {
    FlowConfig cfg;
    cfg.h = 0.1;
    cfg.steps = 3;
    return run_flow(make_initial("constant", g, m, 0), cfg, k, m);
}

double max_sphere_residual(const FlowRun& r, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (std::size_t f = 0; f < count; ++f) {
        const TimeTestFunction psi = random_test_function(r.grid, 3, rng);
        worst = std::max(worst, std::abs(sphere_weak_residual(r.t, psi, r.k)) / psi.norm());
    }
    return worst;
}

} // namespace

TEST(Cancellation, TrivialCases) {
    const auto m = TargetManifold::sphere(3);
    const auto a = m.point({0, 0, 1});
    const auto b = m.point({0.6, 0.8, 0});
    const Vector psi1{1, 2, 3}, psi2{-1, 0.5, 2};
    const auto same = cancellation_identity_check(a, a, psi1, psi2);
    EXPECT_EQ(same.lhs, 0.0);
    EXPECT_EQ(same.rhs, 0.0);
    const auto rep = cancellation_identity_check(a, b, psi1, psi1);
    EXPECT_NEAR(rep.lhs, 0.0, 1e-15);
    EXPECT_EQ(rep.rhs, 0.0);
}

TEST(Cancellation, RandomSamples) {
    const auto m = TargetManifold::sphere(3);
    std::mt19937_64 rng(21);
    double worst = 0.0;
    for (int s = 0; s < 10000; ++s) {
        const auto a = m.project(random_point(m, rng));
        const auto b = m.project(random_point(m, rng));
        const auto sides = cancellation_identity_check(a, b, random_vector(3, rng), random_vector(3, rng));
        worst = std::max(worst, std::abs(sides.lhs - sides.rhs));
    }
    EXPECT_LE(worst, 1e-14);
}

TEST(Cancellation, UnsupportedAmbientDim) {
    const auto m = TargetManifold::sphere(4);
    const auto a = m.point({1, 0, 0, 0});
    try {
        cancellation_identity_check(a, a, Vector{1, 0, 0, 0}, Vector{0, 1, 0, 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnsupportedAmbientDim);
    }
}

TEST(TestFunctions, SupportViolation) {
    const Grid g = build_grid(Box::unit(1), {8}, 0.1);
    Field f(8, 3);
    f(0, 1) = 1e-300;
    try {
        TestFunction::make(g, f);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SupportViolation);
    }
    f(0, 1) = 0.0;
    f(3, 1) = 2.0;
    EXPECT_NO_THROW(TestFunction::make(g, f));
}

TEST(TestFunctions, RandomVanishOnCollarAndNorm) {
    const Grid g = build_grid(Box::unit(2), {6, 6}, 0.2);
    std::mt19937_64 rng(1);
    const TestFunction f = random_test_function(g, 3, rng);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.collar(i))
            for (double x : f.values().row(i)) EXPECT_EQ(x, 0.0);
    const TimeTestFunction tf(f);
    EXPECT_DOUBLE_EQ(tf.norm(), norm(f.values()));
    EXPECT_TRUE(tf.at(17) == f.values());
}

TEST(SphereResidual, ConstantTrajectoryIsZero) {
    const auto& r = reference();
    const auto t = constant_trajectory(r.grid, r.m, r.k);
    std::mt19937_64 rng(2);
    const TimeTestFunction psi = random_test_function(r.grid, 3, rng);
    EXPECT_EQ(sphere_weak_residual(t, psi, r.k), 0.0);
    EXPECT_EQ(sphere_weak_residual_rewritten(t, psi, r.k), 0.0);
}

TEST(SphereResidual, ReferenceRunCertified) {
    const auto& r = reference();
    ASSERT_TRUE(r.t.all_converged());
    EXPECT_LE(max_sphere_residual(r, 20, 7), 10 * 1e-8);
}

TEST(SphereResidual, BoundedByStepResiduals) {
    // |R(psi)| <= sum_k h |r_k| |u^k x psi| <= h sum_k r_k |psi|
    const auto& r = reference();
    double bound = 0.0;
    for (double res : r.t.residuals) bound += r.t.h * res;
    EXPECT_LE(max_sphere_residual(r, 20, 8), bound * (1 + 1e-9));
}

TEST(SphereResidual, RewriteAgrees) {
    const auto& r = reference();
    std::mt19937_64 rng(3);
    for (int f = 0; f < 20; ++f) {
        const TimeTestFunction psi = random_test_function(r.grid, 3, rng);
        EXPECT_NEAR(sphere_weak_residual(r.t, psi, r.k),
                    sphere_weak_residual_rewritten(r.t, psi, r.k), 1e-12);
    }
}

TEST(SphereResidual, TimeIndexedTestFunction) {
    const auto& r = reference();
    std::mt19937_64 rng(4);
    std::vector<TestFunction> slices;
    for (std::size_t k = 0; k < r.t.steps(); ++k) slices.push_back(random_test_function(r.grid, 3, rng));
    const TimeTestFunction psi(slices);
    EXPECT_LE(std::abs(sphere_weak_residual(r.t, psi, r.k)), 10 * 1e-8 * psi.norm());
    EXPECT_THROW(psi.at(0), Error);
    EXPECT_THROW(psi.at(r.t.steps() + 1), Error);
}

TEST(SphereResidual, NeedsSphereTarget) {
    const auto& r = torus();
    std::mt19937_64 rng(5);
    const TimeTestFunction psi = random_test_function(r.grid, 4, rng);
    try {
        sphere_weak_residual(r.t, psi, r.k);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnsupportedAmbientDim);
    }
}

TEST(TangentRecovery, HandValues) {
    const Grid g = build_grid(Box::unit(1), {2}, 0.0);
    const Field u(2, 3, {0, 0, 1, 0, 0, 1}, true);
    const auto rec = tangent_recovery(g, u, TestFunction::make(g, Field(2, 3, {1, 0, 0, 1, 0, 0})));
    const Field& psi = rec.psi.values();
    EXPECT_EQ(psi(0, 0), 0.0);
    EXPECT_EQ(psi(0, 1), -1.0);
    EXPECT_EQ(psi(0, 2), 0.0);
    const auto back = vec::cross(u.row(0), psi.row(0));
    EXPECT_EQ(back, (Vector{1, 0, 0}));
    EXPECT_EQ(rec.max_defect, 0.0);

    const auto zero = tangent_recovery(g, u, TestFunction::make(g, Field(2, 3)));
    for (double x : zero.psi.values().data()) EXPECT_EQ(x, 0.0);
}

TEST(TangentRecovery, RandomTangentFields) {
    const Grid g = build_grid(Box::unit(1), {50}, 0.0);
    const auto m = TargetManifold::sphere(3);
    std::mt19937_64 rng(6);
    for (int s = 0; s < 20; ++s) {
        const Field u = random_field_on(m, 50, rng);
        Field phi = random_ambient_field(50, 3, rng);
        for (std::size_t i = 0; i < 50; ++i) m.tangent_project_inplace(u.row(i), phi.row(i));
        const auto rec = tangent_recovery(g, u, TestFunction::make(g, phi));
        EXPECT_LE(rec.max_defect, 1e-13);
        for (std::size_t i = 0; i < 50; ++i) {
            // (u x phi) x u = |u|^2 phi - <u, phi> u
            const auto want = vec::cross(vec::cross(u.row(i), phi.row(i)), u.row(i));
            const auto got = vec::cross(u.row(i), rec.psi.values().row(i));
            EXPECT_LE(std::sqrt(vec::dist_sq(got, want)), 1e-13);
        }
    }
}

TEST(TangentRecovery, NotTangent) {
    const Grid g = build_grid(Box::unit(1), {2}, 0.0);
    const Field u(2, 3, {0, 0, 1, 0, 0, 1}, true);
    try {
        tangent_recovery(g, u, TestFunction::make(g, Field(2, 3, {0, 0, 1e-9, 0, 0, 0})));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NotTangent);
    }
}

TEST(KillingResidual, ConstantTrajectoryIsZero) {
    const auto& r = torus();
    const auto t = constant_trajectory(r.grid, r.m, r.k);
    std::mt19937_64 rng(7);
    const TimeTestFunction eta = random_test_function(r.grid, 1, rng);
    for (std::size_t a = 0; a < 2; ++a) {
        EXPECT_EQ(killing_weak_residual(t, eta, a, r.k, r.m), 0.0);
        EXPECT_EQ(killing_weak_residual(t, eta, a, r.k, r.m, KillingForm::Direct), 0.0);
    }
}

TEST(KillingResidual, FormsAgreeOnRandomFields) {
    std::mt19937_64 rng(8);
    const Grid g = build_grid(Box::unit(1), {12}, 0.0);
    for (const auto& m : {TargetManifold::sphere(3), TargetManifold::sphere(4), TargetManifold::torus2()}) {
        for (double p : {2.0, 3.0}) {
            const KernelTable k = build_kernel(g, 0.5, p);
            const Field u = random_field_on(m, 12, rng);
            const Field eta = random_ambient_field(12, 1, rng);
            for (std::size_t a = 0; a < m.killing_count(); ++a)
                EXPECT_NEAR(killing_pairing(u, eta, a, k, m, KillingForm::Direct),
                            killing_pairing(u, eta, a, k, m, KillingForm::Rewritten), 1e-12);
        }
    }
}

TEST(KillingResidual, TorusRunCertified) {
    const auto& r = torus();
    ASSERT_TRUE(r.t.all_converged());
    std::mt19937_64 rng(9);
    for (int f = 0; f < 20; ++f) {
        const TimeTestFunction eta = random_test_function(r.grid, 1, rng);
        for (std::size_t a = 0; a < 2; ++a)
            EXPECT_LE(std::abs(killing_weak_residual(r.t, eta, a, r.k, r.m)), 10 * 1e-8 * eta.norm());
    }
}

TEST(KillingResidual, SphereRunCertified) {
    const auto& r = reference();
    std::mt19937_64 rng(10);
    for (int f = 0; f < 10; ++f) {
        const TimeTestFunction eta = random_test_function(r.grid, 1, rng);
        for (std::size_t a = 0; a < 3; ++a)
            EXPECT_LE(std::abs(killing_weak_residual(r.t, eta, a, r.k, r.m)), 10 * 1e-8 * eta.norm());
    }
}

TEST(KillingResidual, IndexOutOfRange) {
    const auto& r = torus();
    std::mt19937_64 rng(11);
    const TimeTestFunction eta = random_test_function(r.grid, 1, rng);
    try {
        killing_weak_residual(r.t, eta, 2, r.k, r.m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IndexOutOfRange);
    }
}

TEST(ProjectorResidual, NormalTestFunctionVanishes) {
    const auto& r = reference();
    std::vector<TestFunction> slices;
    for (std::size_t k = 1; k <= r.t.steps(); ++k) {
        Field phi = r.t.snapshots[k];
        for (std::size_t i = 0; i < phi.rows(); ++i)
            for (double& x : phi.row(i)) x = r.grid.collar(i) ? 0.0 : 2.5 * x;
        slices.push_back(TestFunction::make(r.grid, std::move(phi)));
    }
    EXPECT_LE(std::abs(projector_weak_residual(r.t, TimeTestFunction(slices), r.k, r.m)), 1e-13);
}

TEST(ProjectorResidual, AgreesWithSummedKillingForms) {
    std::mt19937_64 rng(12);
    for (const FlowRun* r : {&reference(), &torus()}) {
        for (int f = 0; f < 10; ++f) {
            const TimeTestFunction phi = random_test_function(r->grid, r->m.ambient_dim(), rng);
            EXPECT_NEAR(projector_weak_residual(r->t, phi, r->k, r->m),
                        projector_weak_residual_via_killing(r->grid, r->t, phi, r->k, r->m), 1e-12);
        }
    }
}

TEST(ProjectorResidual, EquivalentToSphereForm) {
    const auto& r = reference();
    std::mt19937_64 rng(13);
    for (int f = 0; f < 10; ++f) {
        const TestFunction phi0 = random_test_function(r.grid, 3, rng);
        const TimeTestFunction phi = tangent_slices(r.grid, r.t, phi0, r.m);
        std::vector<TestFunction> psi;
        for (std::size_t k = 1; k <= r.t.steps(); ++k)
            psi.push_back(tangent_recovery(r.grid, r.t.snapshots[k],
                                           TestFunction::make(r.grid, phi.at(k))).psi);
        EXPECT_NEAR(sphere_weak_residual(r.t, TimeTestFunction(psi), r.k),
                    projector_weak_residual(r.t, phi, r.k, r.m), 1e-10);
    }
}

TEST(ProjectorResidual, ConvergedRunsCertified) {
    std::mt19937_64 rng(14);
    for (const FlowRun* r : {&reference(), &torus()}) {
        for (int f = 0; f < 20; ++f) {
            const TimeTestFunction phi = random_test_function(r->grid, r->m.ambient_dim(), rng);
            EXPECT_LE(std::abs(projector_weak_residual(r->t, phi, r->k, r->m)),
                      10 * 1e-8 * phi.norm());
        }
    }
}

TEST(Certification, ResidualScalesWithTolerance) {
    const FlowRun loose = sphere_run(1e-8, 10);
    const FlowRun tight = sphere_run(1e-9, 10);
    ASSERT_TRUE(loose.t.all_converged());
    ASSERT_TRUE(tight.t.all_converged());
    const double a = max_sphere_residual(loose, 20, 15);
    const double b = max_sphere_residual(tight, 20, 15);
    EXPECT_GE(a / b, 2.0) << a << " " << b;
}

TEST(Certification, TrajectoryChecksPassOnReference) {
    const auto& r = reference();
    Report rep;
    TrajectoryCheckOptions opt;
    trajectory_checks(r.grid, r.k, r.m, r.t, opt, rep);
    for (const auto& c : rep.checks()) EXPECT_TRUE(c.pass) << c.name << " = " << c.measured;
    EXPECT_NE(rep.find("formulation_equivalence"), nullptr);
}

TEST(Certification, IdentityChecksPass) {
    for (const auto& m : {TargetManifold::sphere(3), TargetManifold::torus2()}) {
        Report rep;
        identity_checks(m, 3, 10000, 3.0, rep);
        for (const auto& c : rep.checks()) EXPECT_TRUE(c.pass) << c.name << " = " << c.measured;
    }
}
