#include <doctest.h>

#include "subsphere/fitter.hpp"
#include "subsphere/loss_functions.hpp"
#include "subsphere/synthetic_data.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>

using namespace subsphere;
using testutil::basis_vector;
using testutil::noiseless_sample;
using testutil::point_on_subsphere;
using testutil::random_params;
using testutil::random_unit;

namespace {

const LossKind kAllKinds[] = {LossKind::Intrinsic, LossKind::Extrinsic, LossKind::Slicing,
                              LossKind::NaiveExtrinsic};

/// Test-side oracle: rho^2(X_i, .) evaluated through the chart, for finite
/// differencing against the implemented derivatives.
double loss_through_chart(LossKind kind, const PolysphereSample& data, Eigen::Index i,
                          const ProductChart& chart, const Eigen::VectorXd& u) {
    const SubsphereParams q = chart.from_chart(u);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < data.K(); ++j) {
        const double d = residual_from_dot(kind, data.point(i, j).dot(q.center()), q.radii()(j));
        acc += d * d;
    }
    return acc / static_cast<double>(data.K());
}

Eigen::VectorXd fd_gradient_oracle(LossKind kind, const PolysphereSample& data, Eigen::Index i,
                                   const ProductChart& chart, double h = 1e-6) {
    Eigen::VectorXd grad(chart.nu());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(chart.nu());
    for (Eigen::Index k = 0; k < chart.nu(); ++k) {
        u(k) = h;
        const double fp = loss_through_chart(kind, data, i, chart, u);
        u(k) = -h;
        const double fm = loss_through_chart(kind, data, i, chart, u);
        u(k) = 0.0;
        grad(k) = (fp - fm) / (2.0 * h);
    }
    return grad;
}

/// Hand-derived chart derivatives of the extrinsic and naive squared
/// residuals, used as an independent oracle for the finite-difference
/// implementation path.
Eigen::VectorXd analytic_gradient_oracle(LossKind kind, const PolysphereSample& data,
                                         Eigen::Index i, const ProductChart& chart) {
    const Eigen::Index m = chart.m();
    const Eigen::Index K = chart.K();
    const double invK = 1.0 / static_cast<double>(K);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(chart.nu());
    for (Eigen::Index j = 0; j < K; ++j) {
        const UnitVector& x = data.point(i, j);
        const double t = x.dot(chart.anchor().center());
        const double r = chart.anchor().radii()(j);
        const double s = std::sqrt(1.0 - t * t);
        const Eigen::VectorXd g = chart.basis() * x.coords();
        if (kind == LossKind::Extrinsic) {
            const double theta = std::acos(t);
            grad.head(m) += invK * 2.0 * std::sin(theta - r) * (-g / s);
            grad(m + j) = invK * (-2.0) * std::sin(theta - r);
        } else {  // NaiveExtrinsic
            const double chord = std::sqrt(2.0 - 2.0 * t);
            const double excess = chord - 2.0 * std::sin(0.5 * r);
            grad.head(m) += invK * 2.0 * excess * (-g / chord);
            grad(m + j) = invK * (-2.0) * excess * std::cos(0.5 * r);
        }
    }
    return grad;
}

Eigen::MatrixXd analytic_hessian_oracle(LossKind kind, const PolysphereSample& data,
                                        Eigen::Index i, const ProductChart& chart) {
    const Eigen::Index m = chart.m();
    const Eigen::Index K = chart.K();
    const double invK = 1.0 / static_cast<double>(K);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(chart.nu(), chart.nu());
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index j = 0; j < K; ++j) {
        const UnitVector& x = data.point(i, j);
        const double t = x.dot(chart.anchor().center());
        const double r = chart.anchor().radii()(j);
        const double s = std::sqrt(1.0 - t * t);
        const Eigen::VectorXd g = chart.basis() * x.coords();
        if (kind == LossKind::Extrinsic) {
            const double theta = std::acos(t);
            const Eigen::VectorXd dtheta = -g / s;
            const Eigen::MatrixXd d2theta = (t / s) * eye - (t / (s * s * s)) * (g * g.transpose());
            hess.topLeftCorner(m, m) +=
                invK * (2.0 * std::cos(theta - r) * dtheta * dtheta.transpose() +
                        2.0 * std::sin(theta - r) * d2theta);
            hess.block(0, m + j, m, 1) += invK * (-2.0 * std::cos(theta - r)) * dtheta;
            hess.block(m + j, 0, 1, m) += invK * (-2.0 * std::cos(theta - r)) * dtheta.transpose();
            hess(m + j, m + j) = invK * 2.0 * std::cos(theta - r);
        } else {  // NaiveExtrinsic
            const double chord = std::sqrt(2.0 - 2.0 * t);
            const double half = std::cos(0.5 * r);
            const double excess = chord - 2.0 * std::sin(0.5 * r);
            const Eigen::VectorXd dq = -g / chord;
            const Eigen::MatrixXd d2q =
                (t / chord) * eye - (g * g.transpose()) / (chord * chord * chord);
            hess.topLeftCorner(m, m) +=
                invK * (2.0 * dq * dq.transpose() + 2.0 * excess * d2q);
            hess.block(0, m + j, m, 1) += invK * (-2.0 * half) * dq;
            hess.block(m + j, 0, 1, m) += invK * (-2.0 * half) * dq.transpose();
            hess(m + j, m + j) = invK * (2.0 * half * half + excess * std::sin(0.5 * r));
        }
    }
    return hess;
}

PolysphereSample smooth_random_sample(Rng& rng, Eigen::Index m, Eigen::Index K, Eigen::Index n) {
    PolysphereSample sample(m, K);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<UnitVector> tuple;
        for (Eigen::Index j = 0; j < K; ++j) {
            UnitVector x = random_unit(rng, m + 1);
            tuple.push_back(std::move(x));
        }
        sample.add_observation(std::move(tuple));
    }
    return sample;
}

/// Random anchor kept away from all data poles so each loss is smooth.
SubsphereParams smooth_anchor(Rng& rng, const PolysphereSample& data) {
    for (;;) {
        SubsphereParams p = random_params(rng, data.m(), data.K(), 0.4, kPi - 0.4);
        bool ok = true;
        for (Eigen::Index i = 0; i < data.n() && ok; ++i)
            for (Eigen::Index j = 0; j < data.K() && ok; ++j)
                if (std::abs(data.point(i, j).dot(p.center())) > 0.95) ok = false;
        if (ok) return p;
    }
}

}  // namespace

TEST_CASE("all residuals vanish on the subsphere and are positive off it") {
    Rng rng(31);
    for (int trial = 0; trial < 2000; ++trial) {
        const UnitVector c = random_unit(rng, 3);
        const double r = rng.uniform(0.1, kPi - 0.1);
        const UnitVector on = point_on_subsphere(c, r, rng.uniform(0.0, 2.0 * kPi));
        for (const LossKind kind : kAllKinds)
            CHECK(residual_distance(kind, on, c, r) < 1e-7);

        const UnitVector off = random_unit(rng, 3);
        const double gap = std::abs(clamped_acos(off.dot(c)) - r);
        if (gap > 1e-3 && std::abs(off.dot(c)) < 0.999) {
            for (const LossKind kind : kAllKinds)
                CHECK(residual_distance(kind, off, c, r) > 0.0);
        }
    }
}

TEST_CASE("slicing residual at the reference configuration on S^1") {
    Eigen::Vector2d up(0.0, 1.0);
    const UnitVector x(up), c(up);
    CHECK(residual_distance(LossKind::Slicing, x, c, kPi / 4) ==
          doctest::Approx(1.0 - std::sqrt(2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("slicing residual equals half the absolute chord-square excess") {
    Rng rng(32);
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index d = 2 + trial % 3;
        const UnitVector x = random_unit(rng, d);
        const UnitVector c = random_unit(rng, d);
        const double r = rng.uniform(0.05, kPi - 0.05);
        const double chord2 = (x.coords() - c.coords()).squaredNorm();
        const double re = 2.0 * std::sin(0.5 * r);
        const double via_chords = 0.5 * std::abs(chord2 - re * re);
        CHECK(std::abs(residual_distance(LossKind::Slicing, x, c, r) - via_chords) < 1e-12);
    }
}

TEST_CASE("extrinsic closed form equals the distance to the explicit projection") {
    Rng rng(33);
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index d = 3 + trial % 2;
        const UnitVector x = random_unit(rng, d);
        const UnitVector c = random_unit(rng, d);
        if (std::abs(x.dot(c)) > 1.0 - 1e-6) continue;
        const double r = rng.uniform(0.05, kPi - 0.05);
        const UnitVector projected = project_to_subsphere(x, c, r);
        const double direct = extrinsic_distance(x, projected);
        CHECK(std::abs(residual_distance(LossKind::Extrinsic, x, c, r) - direct) < 1e-10);
    }
}

TEST_CASE("extrinsic vs intrinsic Taylor relation on small residuals") {
    // L_E = 2 - 2 cos(rho) = L_I - L_I^2/12 + O(L_I^3), so the squared losses
    // agree to first order with remainder bounded by L_I^2 / 12.
    Rng rng(34);
    for (int trial = 0; trial < 5000; ++trial) {
        const UnitVector c = random_unit(rng, 3);
        const double r = rng.uniform(0.3, kPi - 0.3);
        const double theta = r + rng.uniform(-0.1, 0.1);
        const UnitVector x = point_on_subsphere(c, theta, rng.uniform(0.0, 2.0 * kPi));
        const double li = std::pow(residual_distance(LossKind::Intrinsic, x, c, r), 2);
        const double le = std::pow(residual_distance(LossKind::Extrinsic, x, c, r), 2);
        CHECK(std::abs(le - li) <= li * li / 12.0 + 1e-14);
    }
}

TEST_CASE("flip invariance of the intrinsic, extrinsic and slicing residuals") {
    Rng rng(35);
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::Index d = 3 + trial % 2;
        const UnitVector x = random_unit(rng, d);
        const UnitVector c = random_unit(rng, d);
        if (std::abs(x.dot(c)) > 1.0 - 1e-9) continue;
        const double r = rng.uniform(0.05, kPi - 0.05);
        for (const LossKind kind :
             {LossKind::Intrinsic, LossKind::Extrinsic, LossKind::Slicing}) {
            CHECK(std::abs(residual_distance(kind, x, c, r) -
                           residual_distance(kind, x, -c, kPi - r)) < 1e-12);
        }
    }
}

TEST_CASE("the naive residual depends on the representative") {
    // |x - c| - 2 sin(r/2) is a function of the pair (c, r), not of the
    // subsphere the pair describes: at x = c, r = pi/2 the two
    // representatives give sqrt(2) and 2 - sqrt(2).
    const UnitVector e3 = basis_vector(3, 2);
    const double from_rep = residual_distance(LossKind::NaiveExtrinsic, e3, e3, kPi / 2);
    const double from_flip = residual_distance(LossKind::NaiveExtrinsic, e3, -e3, kPi / 2);
    CHECK(from_rep == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(from_flip == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("residual equivalence: one residual small forces all four small") {
    // With theta = arccos(x.c) and rho = |theta - r|, each residual is
    // bounded above by rho, and rho is bounded by an explicit inverse of
    // each residual as long as r stays inside a compact of (0, pi).
    Rng rng(36);
    for (int trial = 0; trial < 10000; ++trial) {
        const UnitVector c = random_unit(rng, 3);
        const UnitVector x = random_unit(rng, 3);
        const double r = rng.uniform(0.3, kPi - 0.3);
        const double rho = std::abs(clamped_acos(x.dot(c)) - r);

        const double li = residual_distance(LossKind::Intrinsic, x, c, r);
        const double le = residual_distance(LossKind::Extrinsic, x, c, r);
        const double ls = residual_distance(LossKind::Slicing, x, c, r);
        const double ln = residual_distance(LossKind::NaiveExtrinsic, x, c, r);

        CHECK(li <= rho + 1e-12);
        CHECK(le <= rho + 1e-12);
        CHECK(ls <= rho + 1e-12);
        CHECK(ln <= rho + 1e-12);

        // Inverse bounds recovering rho from each residual.
        CHECK(rho <= 2.0 * std::asin(std::min(1.0, le / 2.0)) + 1e-9);
        const double mu = std::min(std::sin(0.5 * r), std::cos(0.5 * r));
        CHECK(rho <= 2.0 * std::asin(std::min(1.0, ls / (2.0 * mu))) + 1e-9);
        const double naive_floor = std::cos((kPi + r) / 4.0);
        CHECK(rho <= 4.0 * std::asin(std::min(1.0, ln / (4.0 * naive_floor))) + 1e-9);
    }
}

TEST_CASE("objective basics") {
    Rng rng(37);

    SUBCASE("zero on noiseless data, for every loss") {
        // arccos at a rounded inner product limits the residuals to ~1e-8,
        // so the mean squared residual bottoms out near 1e-16.
        const SubsphereParams truth = random_params(rng, 2, 3, 0.4, kPi - 0.4);
        const PolysphereSample sample = noiseless_sample(truth, 50, 5);
        for (const LossKind kind : kAllKinds)
            CHECK(objective(kind, sample, truth).total < 1e-14);
    }

    SUBCASE("n = K = 1 reduces to the squared residual") {
        const UnitVector c = random_unit(rng, 3);
        const UnitVector x = random_unit(rng, 3);
        PolysphereSample sample(2, 1);
        sample.add_observation({x});
        Eigen::VectorXd radius(1);
        radius << 0.8;
        const SubsphereParams p(c, radius);
        for (const LossKind kind : kAllKinds) {
            const double expected = std::pow(residual_distance(kind, x, c, 0.8), 2);
            CHECK(objective(kind, sample, p).total == doctest::Approx(expected).epsilon(1e-14));
        }
    }

    SUBCASE("total equals the mean of the per-point grid") {
        const SubsphereParams p = random_params(rng, 2, 4, 0.3, kPi - 0.3);
        const PolysphereSample sample = smooth_random_sample(rng, 2, 4, 37);
        for (const LossKind kind : {LossKind::Intrinsic, LossKind::Slicing}) {
            const ObjectiveValue value = objective(kind, sample, p);
            CHECK(std::abs(value.total - value.per_point.mean()) < 1e-12);
        }
    }

    SUBCASE("objective is invariant under flipping the representative") {
        for (int trial = 0; trial < 100; ++trial) {
            const SubsphereParams p = random_params(rng, 2, 2, 0.3, kPi - 0.3);
            const PolysphereSample sample = smooth_random_sample(rng, 2, 2, 15);
            for (const LossKind kind :
                 {LossKind::Intrinsic, LossKind::Extrinsic, LossKind::Slicing}) {
                CHECK(std::abs(objective(kind, sample, p).total -
                               objective(kind, sample, p.flipped()).total) < 1e-12);
            }
        }
    }

    SUBCASE("dimension mismatch is rejected") {
        const PolysphereSample sample = smooth_random_sample(rng, 2, 2, 5);
        const SubsphereParams wrong_k = random_params(rng, 2, 3);
        CHECK_THROWS_AS(objective(LossKind::Intrinsic, sample, wrong_k), std::invalid_argument);
    }
}

TEST_CASE("near-axis diagnostics") {
    const UnitVector e3 = basis_vector(3, 2);
    PolysphereSample sample(2, 1);
    sample.add_observation({point_on_subsphere(e3, 1e-4, 0.0)});   // near the pole
    sample.add_observation({point_on_subsphere(e3, kPi - 1e-4, 0.0)});  // near the antipode
    sample.add_observation({point_on_subsphere(e3, 1.0, 0.0)});
    CHECK(count_near_axis(sample, e3, 1e-3) == 2);
    CHECK(count_near_axis(sample, e3, 1e-5) == 0);
}

TEST_CASE("gradients match finite differences for the analytic kinds") {
    Rng rng(38);
    for (int trial = 0; trial < 100; ++trial) {
        const PolysphereSample sample = smooth_random_sample(rng, 2, 2, 6);
        const SubsphereParams anchor = smooth_anchor(rng, sample);
        const ProductChart chart = chart_at(anchor);
        for (const LossKind kind : {LossKind::Slicing, LossKind::Intrinsic}) {
            for (Eigen::Index i = 0; i < sample.n(); ++i) {
                const Eigen::VectorXd analytic = observation_gradient(kind, sample, i, chart);
                const Eigen::VectorXd fd = fd_gradient_oracle(kind, sample, i, chart);
                if (fd.norm() < 1e-3) continue;
                CHECK((analytic - fd).norm() / fd.norm() < 1e-6);
            }
        }
    }
}

TEST_CASE("finite-difference kinds match the hand-derived oracle") {
    Rng rng(39);
    for (int trial = 0; trial < 60; ++trial) {
        const PolysphereSample sample = smooth_random_sample(rng, 2, 2, 4);
        const SubsphereParams anchor = smooth_anchor(rng, sample);
        const ProductChart chart = chart_at(anchor);
        for (const LossKind kind : {LossKind::Extrinsic, LossKind::NaiveExtrinsic}) {
            for (Eigen::Index i = 0; i < sample.n(); ++i) {
                const Eigen::VectorXd implemented = observation_gradient(kind, sample, i, chart);
                const Eigen::VectorXd oracle = analytic_gradient_oracle(kind, sample, i, chart);
                if (oracle.norm() < 1e-3) continue;
                CHECK((implemented - oracle).norm() / oracle.norm() < 1e-5);

                const Eigen::MatrixXd hess = observation_hessian(kind, sample, i, chart);
                const Eigen::MatrixXd hess_oracle = analytic_hessian_oracle(kind, sample, i, chart);
                CHECK((hess - hess_oracle).norm() / hess_oracle.norm() < 1e-4);
            }
        }
    }
}

TEST_CASE("hessians are symmetric and match finite differences of the objective") {
    Rng rng(40);
    for (int trial = 0; trial < 40; ++trial) {
        const PolysphereSample sample = smooth_random_sample(rng, 2, 2, 6);
        const SubsphereParams anchor = smooth_anchor(rng, sample);
        const ProductChart chart = chart_at(anchor);
        for (const LossKind kind : {LossKind::Slicing, LossKind::Intrinsic}) {
            const Eigen::MatrixXd hess = objective_hessian(kind, sample, chart);
            CHECK((hess - hess.transpose()).norm() < 1e-9);

            // Second differences of the chart objective, entry by entry.
            const double h = 1e-4;
            Eigen::MatrixXd fd(chart.nu(), chart.nu());
            Eigen::VectorXd u = Eigen::VectorXd::Zero(chart.nu());
            auto objective_at = [&](const Eigen::VectorXd& uu) {
                double acc = 0.0;
                for (Eigen::Index i = 0; i < sample.n(); ++i)
                    acc += loss_through_chart(kind, sample, i, chart, uu);
                return acc / static_cast<double>(sample.n());
            };
            const double f0 = objective_at(u);
            for (Eigen::Index a = 0; a < chart.nu(); ++a) {
                u(a) = h;
                const double fp = objective_at(u);
                u(a) = -h;
                const double fm = objective_at(u);
                u(a) = 0.0;
                fd(a, a) = (fp - 2 * f0 + fm) / (h * h);
                for (Eigen::Index b = a + 1; b < chart.nu(); ++b) {
                    u(a) = h; u(b) = h;
                    const double fpp = objective_at(u);
                    u(b) = -h;
                    const double fpm = objective_at(u);
                    u(a) = -h; u(b) = h;
                    const double fmp = objective_at(u);
                    u(b) = -h;
                    const double fmm = objective_at(u);
                    u(a) = 0.0; u(b) = 0.0;
                    fd(a, b) = fd(b, a) = (fpp - fpm - fmp + fmm) / (4 * h * h);
                }
            }
            CHECK((hess - fd).norm() / std::max(1.0, fd.norm()) < 1e-4);
        }
    }
}

TEST_CASE("gradient vanishes at an exact interior minimizer") {
    Rng rng(41);
    const SubsphereParams truth = random_params(rng, 2, 3, 0.5, kPi - 0.5);
    const PolysphereSample sample = noiseless_sample(truth, 80, 7);
    for (const LossKind kind : kAllKinds)
        CHECK(objective_gradient(kind, sample, truth).norm() < 1e-8);
}

TEST_CASE("slicing radius gradient has the closed form at K = 1") {
    Rng rng(42);
    const PolysphereSample sample = smooth_random_sample(rng, 2, 1, 25);
    const SubsphereParams anchor = smooth_anchor(rng, sample);
    const double r = anchor.radii()(0);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sample.n(); ++i)
        acc += (sample.point(i, 0).dot(anchor.center()) - std::cos(r)) * std::sin(r);
    const double expected = 2.0 * acc / static_cast<double>(sample.n());
    const Eigen::VectorXd grad = objective_gradient(LossKind::Slicing, sample, anchor);
    CHECK(grad(anchor.m()) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("hessian is positive semidefinite at a fitted optimum") {
    Rng rng(43);
    GeneratorSpec spec;
    spec.m = 2;
    spec.K = 2;
    spec.n = 150;
    Eigen::VectorXd radii(2);
    radii << 0.9, 1.3;
    spec.truth = SubsphereParams(testutil::basis_vector(3, 2), radii);
    spec.sigma = 0.05;
    spec.seed = 99;
    const GeneratedSample drawn = generate(spec);

    for (const LossKind kind : {LossKind::Intrinsic, LossKind::Slicing}) {
        FitConfig config;
        config.loss = kind;
        const FitResult result = fit(drawn.sample, config);
        const Eigen::MatrixXd hess =
            objective_hessian(kind, drawn.sample, result.params.representative());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hess);
        CHECK(solver.eigenvalues().minCoeff() > -1e-8);
    }
}

TEST_CASE("derivatives refuse configurations with data at a pole") {
    const UnitVector e3 = basis_vector(3, 2);
    PolysphereSample sample(2, 1);
    sample.add_observation({e3});
    Eigen::VectorXd radius(1);
    radius << 1.0;
    const ProductChart chart = chart_at(SubsphereParams(e3, radius));
    for (const LossKind kind :
         {LossKind::Intrinsic, LossKind::Extrinsic, LossKind::NaiveExtrinsic})
        CHECK_THROWS_AS(observation_gradient(kind, sample, 0, chart), std::domain_error);
    CHECK_NOTHROW(observation_gradient(LossKind::Slicing, sample, 0, chart));
}

TEST_CASE("loss kind names round-trip") {
    for (const LossKind kind : kAllKinds) CHECK(parse_loss_kind(to_string(kind)) == kind);
    CHECK_THROWS_AS(parse_loss_kind("geodesic"), std::invalid_argument);
}
