#include <doctest.h>

#include <algorithm>

#include "subsphere/fitter.hpp"
#include "subsphere/synthetic_data.hpp"
#include "test_util.hpp"

using namespace subsphere;
using testutil::basis_vector;
using testutil::random_unit;

namespace {

GeneratorSpec base_spec(Eigen::Index n, double sigma, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.m = 2;
    spec.K = 2;
    spec.n = n;
    Eigen::VectorXd radii(2);
    radii << 0.7, 1.2;
    spec.truth = SubsphereParams(UnitVector(Eigen::Vector3d(0.1, 0.2, 0.97)), radii);
    spec.sigma = sigma;
    spec.seed = seed;
    return spec;
}

bool identical_samples(const PolysphereSample& a, const PolysphereSample& b) {
    if (a.n() != b.n() || a.K() != b.K() || a.m() != b.m()) return false;
    for (Eigen::Index i = 0; i < a.n(); ++i)
        for (Eigen::Index j = 0; j < a.K(); ++j)
            for (Eigen::Index k = 0; k <= a.m(); ++k)
                if (a.point(i, j).coords()(k) != b.point(i, j).coords()(k)) return false;
    return true;
}

}  // namespace

TEST_CASE("vanishing noise pins every point to its subsphere") {
    GeneratorSpec spec = base_spec(200, 1e-9, 4);
    const GeneratedSample drawn = generate(spec);
    for (Eigen::Index i = 0; i < drawn.sample.n(); ++i)
        for (Eigen::Index j = 0; j < drawn.sample.K(); ++j) {
            const double angle = clamped_acos(drawn.sample.point(i, j).dot(drawn.truth.center()));
            CHECK(std::abs(angle - drawn.truth.radii()(j)) < 1e-6);
        }
}

TEST_CASE("generation is a pure function of the seed") {
    const GeneratorSpec spec = base_spec(60, 0.1, 42);
    const GeneratedSample a = generate(spec);
    const GeneratedSample b = generate(spec);
    CHECK(identical_samples(a.sample, b.sample));

    GeneratorSpec other = spec;
    other.seed = 43;
    CHECK_FALSE(identical_samples(a.sample, generate(other).sample));
}

TEST_CASE("all generated points are unit vectors") {
    for (const NoiseFamily family : {NoiseFamily::TangentGaussian, NoiseFamily::VonMisesFisher}) {
        GeneratorSpec spec = base_spec(300, 0.2, 7);
        spec.noise = family;
        spec.kappa = 25.0;
        const GeneratedSample drawn = generate(spec);
        for (Eigen::Index i = 0; i < drawn.sample.n(); ++i)
            for (Eigen::Index j = 0; j < drawn.sample.K(); ++j)
                CHECK(std::abs(drawn.sample.point(i, j).coords().norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("law of large numbers for the radial angle") {
    // At r = pi/2 the tangent-noise curvature bias vanishes, so the mean
    // angle matches the radius to Monte Carlo accuracy.
    GeneratorSpec spec = base_spec(100000, 0.05, 17);
    Eigen::VectorXd radii(2);
    radii << kPi / 2, kPi / 2;
    spec.truth = SubsphereParams(spec.truth->center(), radii);
    const GeneratedSample drawn = generate(spec);
    const double se = 0.05 / std::sqrt(static_cast<double>(drawn.sample.n()));
    for (Eigen::Index j = 0; j < 2; ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < drawn.sample.n(); ++i)
            acc += clamped_acos(drawn.sample.point(i, j).dot(drawn.truth.center()));
        const double mean = acc / static_cast<double>(drawn.sample.n());
        CHECK(std::abs(mean - kPi / 2) < 3.0 * se);
    }

    // Away from pi/2 the mean is inflated by about sigma^2 cot(r) / 2.
    GeneratorSpec tilted = base_spec(100000, 0.05, 18);
    Eigen::VectorXd quarter(2);
    quarter << kPi / 4, kPi / 4;
    tilted.truth = SubsphereParams(tilted.truth->center(), quarter);
    const GeneratedSample drawn2 = generate(tilted);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < drawn2.sample.n(); ++i)
        acc += clamped_acos(drawn2.sample.point(i, 0).dot(drawn2.truth.center()));
    const double mean = acc / static_cast<double>(drawn2.sample.n());
    const double bias = 0.5 * 0.05 * 0.05;  // cot(pi/4) = 1
    CHECK(std::abs(mean - (kPi / 4 + bias)) < 4.0 * se);
}

TEST_CASE("exclusion radius truncates hard") {
    GeneratorSpec spec = base_spec(500, 0.6, 11);
    spec.exclusion_radius = 0.3;
    const GeneratedSample drawn = generate(spec);
    for (Eigen::Index i = 0; i < drawn.sample.n(); ++i)
        for (Eigen::Index j = 0; j < drawn.sample.K(); ++j) {
            const double to_axis = clamped_acos(drawn.sample.point(i, j).dot(drawn.truth.center()));
            CHECK(to_axis >= 0.3);
            CHECK(to_axis <= kPi - 0.3);
        }
}

TEST_CASE("infeasible truncation is reported") {
    GeneratorSpec spec = base_spec(10, 1e-6, 12);
    Eigen::VectorXd tiny(2);
    tiny << 0.01, 0.02;  // both baselines inside the exclusion zone
    spec.truth = SubsphereParams(spec.truth->center(), tiny);
    spec.exclusion_radius = 0.2;
    CHECK_THROWS_AS(generate(spec), std::runtime_error);
}

TEST_CASE("von Mises-Fisher sampler matches the closed-form resultant length") {
    // On S^2, E[x . mu] = coth(kappa) - 1/kappa.
    Rng rng(77);
    const UnitVector mean = random_unit(rng, 3);
    const double kappa = 10.0;
    const int draws = 20000;
    double resultant = 0.0;
    for (int i = 0; i < draws; ++i) resultant += sample_vmf(rng, mean, kappa).dot(mean);
    resultant /= draws;
    const double expected = 1.0 / std::tanh(kappa) - 1.0 / kappa;
    CHECK(std::abs(resultant - expected) < 0.005);
}

TEST_CASE("von Mises-Fisher noise concentrates with kappa") {
    GeneratorSpec loose = base_spec(2000, 0.1, 21);
    loose.noise = NoiseFamily::VonMisesFisher;
    loose.kappa = 20.0;
    GeneratorSpec tight = loose;
    tight.kappa = 2000.0;

    auto mean_abs_dev = [](const GeneratedSample& drawn) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < drawn.sample.n(); ++i)
            acc += std::abs(clamped_acos(drawn.sample.point(i, 0).dot(drawn.truth.center())) -
                            drawn.truth.radii()(0));
        return acc / static_cast<double>(drawn.sample.n());
    };
    CHECK(mean_abs_dev(generate(tight)) < 0.35 * mean_abs_dev(generate(loose)));
}

TEST_CASE("per-group noise scales are honored") {
    GeneratorSpec spec = base_spec(3000, 0.1, 31);
    spec.iid_across_j = false;
    Eigen::VectorXd sigmas(2);
    sigmas << 0.02, 0.25;
    spec.sigma_per_j = sigmas;
    const GeneratedSample drawn = generate(spec);

    auto group_dev = [&](Eigen::Index j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < drawn.sample.n(); ++i)
            acc += std::abs(clamped_acos(drawn.sample.point(i, j).dot(drawn.truth.center())) -
                            drawn.truth.radii()(j));
        return acc / static_cast<double>(drawn.sample.n());
    };
    CHECK(group_dev(0) < 0.3 * group_dev(1));
}

TEST_CASE("error distribution is invariant under rotating the truth") {
    const int replicates = 200;
    const UnitVector axis_a(Eigen::Vector3d(0.0, 0.0, 1.0));
    const Eigen::MatrixXd rot =
        rotation_fixing_axis(UnitVector(Eigen::Vector3d(1.0, 1.0, 1.0)), 1.1, 5);
    const UnitVector axis_b(rot * axis_a.coords());

    auto median_error = [&](const UnitVector& axis) {
        std::vector<double> errors;
        for (int rep = 0; rep < replicates; ++rep) {
            GeneratorSpec spec = base_spec(80, 0.1, 400 + static_cast<std::uint64_t>(rep));
            spec.truth = SubsphereParams(axis, spec.truth->radii());
            const GeneratedSample drawn = generate(spec);
            const FitResult fitted = fit_slicing(drawn.sample);
            errors.push_back(param_distance(fitted.params.representative(), drawn.truth));
        }
        std::sort(errors.begin(), errors.end());
        return errors[errors.size() / 2];
    };
    const double med_a = median_error(axis_a);
    const double med_b = median_error(axis_b);
    CHECK(med_a / med_b > 0.7);
    CHECK(med_a / med_b < 1.4);
}

TEST_CASE("rotational model applies one rotation per observation") {
    GeneratorSpec spec = base_spec(100, 1e-9, 51);
    spec.mode = GeneratorMode::RotationalModel;
    Eigen::VectorXd longitudes(2);
    longitudes << 0.0, 1.3;
    spec.base_longitudes = longitudes;
    const GeneratedSample drawn = generate(spec);
    // The two group members of an observation keep their mutual angle: the
    // shared rotation is an isometry, so x_i0 . x_i1 is constant across i.
    const double reference = drawn.sample.point(0, 0).dot(drawn.sample.point(0, 1));
    for (Eigen::Index i = 1; i < drawn.sample.n(); ++i)
        CHECK(drawn.sample.point(i, 0).dot(drawn.sample.point(i, 1)) ==
              doctest::Approx(reference).epsilon(1e-6));
}

TEST_CASE("spec validation rejects bad configurations") {
    GeneratorSpec spec = base_spec(10, 0.1, 1);
    spec.m = 1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = base_spec(10, 0.0, 1);
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = base_spec(10, 0.1, 1);
    spec.exclusion_radius = kPi;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = base_spec(10, 0.1, 1);
    spec.truth.reset();
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = base_spec(10, 0.1, 1);
    spec.iid_across_j = false;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
