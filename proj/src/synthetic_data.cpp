#include "subsphere/synthetic_data.hpp"

#include "subsphere/rng.hpp"

namespace subsphere {

namespace {

constexpr int kMaxRejectionAttempts = 200000;

double noise_scale(const GeneratorSpec& spec, Eigen::Index j) {
    if (spec.noise == NoiseFamily::TangentGaussian)
        return spec.iid_across_j ? spec.sigma : spec.sigma_per_j(j);
    return spec.iid_across_j ? spec.kappa : spec.kappa_per_j(j);
}

UnitVector random_point_on_subsphere(Rng& rng, const UnitVector& c, double r) {
    const Eigen::Index d = c.ambient_dim();
    Eigen::VectorXd g(d);
    for (;;) {
        for (Eigen::Index k = 0; k < d; ++k) g(k) = rng.normal();
        g -= g.dot(c.coords()) * c.coords();
        if (g.norm() > 1e-12) break;
    }
    g.normalize();
    return UnitVector(std::cos(r) * c.coords() + std::sin(r) * g);
}

UnitVector apply_tangent_gaussian(Rng& rng, const UnitVector& clean, double sigma) {
    Eigen::VectorXd z(clean.m());
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = sigma * rng.normal();
    const double norm = z.norm();
    if (norm >= kPi) z *= (kPi - 1e-9) / norm;  // clip pathological tails
    return exp_map(clean, z);
}

bool violates_exclusion(const UnitVector& x, const UnitVector& axis, double epsilon) {
    return std::abs(x.dot(axis)) > std::cos(epsilon);
}

}  // namespace

UnitVector sample_vmf(Rng& rng, const UnitVector& mean, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("sample_vmf: kappa must be positive");
    const Eigen::Index d = mean.ambient_dim();
    const double dm1 = static_cast<double>(d - 1);
    const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1)) / dm1;
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
    double w = 0.0;
    for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
        const double z = rng.beta(0.5 * dm1, 0.5 * dm1);
        const double u = rng.uniform01();
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(std::max(u, 1e-300)))
            break;
        if (attempt + 1 == kMaxRejectionAttempts)
            throw std::runtime_error("sample_vmf: rejection sampler failed to accept");
    }
    Eigen::VectorXd v(d);
    for (;;) {
        for (Eigen::Index k = 0; k < d; ++k) v(k) = rng.normal();
        v -= v.dot(mean.coords()) * mean.coords();
        if (v.norm() > 1e-12) break;
    }
    v.normalize();
    return UnitVector(w * mean.coords() + std::sqrt(std::max(0.0, 1.0 - w * w)) * v);
}

void GeneratorSpec::validate() const {
    if (m < 2) throw std::invalid_argument("GeneratorSpec: m must be at least 2");
    if (K < 1 || n < 1) throw std::invalid_argument("GeneratorSpec: K and n must be positive");
    if (!truth) throw std::invalid_argument("GeneratorSpec: truth parameters are required");
    if (truth->m() != m || truth->K() != K)
        throw std::invalid_argument("GeneratorSpec: truth does not match m and K");
    if (noise == NoiseFamily::TangentGaussian) {
        if (iid_across_j) {
            if (!(sigma > 0.0)) throw std::invalid_argument("GeneratorSpec: sigma must be > 0");
        } else if (sigma_per_j.size() != K || (sigma_per_j.array() <= 0.0).any()) {
            throw std::invalid_argument("GeneratorSpec: sigma_per_j must have K positive entries");
        }
    } else {
        if (iid_across_j) {
            if (!(kappa > 0.0)) throw std::invalid_argument("GeneratorSpec: kappa must be > 0");
        } else if (kappa_per_j.size() != K || (kappa_per_j.array() <= 0.0).any()) {
            throw std::invalid_argument("GeneratorSpec: kappa_per_j must have K positive entries");
        }
    }
    if (exclusion_radius && !(*exclusion_radius >= 0.0 && *exclusion_radius < kPi / 4.0))
        throw std::invalid_argument("GeneratorSpec: exclusion_radius must lie in [0, pi/4)");
    if (base_longitudes.size() != 0 && base_longitudes.size() != K)
        throw std::invalid_argument("GeneratorSpec: base_longitudes must have K entries");
}

GeneratedSample generate(const GeneratorSpec& spec) {
    spec.validate();
    const SubsphereParams& truth = *spec.truth;
    const UnitVector& axis = truth.center();
    const Eigen::MatrixXd basis = tangent_basis_at(axis);

    // Base points at fixed longitudes on each true subsphere.
    std::vector<UnitVector> base;
    base.reserve(static_cast<std::size_t>(spec.K));
    for (Eigen::Index j = 0; j < spec.K; ++j) {
        const double psi = spec.base_longitudes.size() == spec.K
                               ? spec.base_longitudes(j)
                               : 2.0 * kPi * static_cast<double>(j) / static_cast<double>(spec.K);
        const Eigen::VectorXd direction =
            std::cos(psi) * basis.row(0).transpose() + std::sin(psi) * basis.row(1).transpose();
        base.push_back(UnitVector(std::cos(truth.radii()(j)) * axis.coords() +
                                  std::sin(truth.radii()(j)) * direction));
    }

    PolysphereSample sample(spec.m, spec.K);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        Eigen::MatrixXd rotation;
        if (spec.mode == GeneratorMode::RotationalModel) {
            Rng obs_rng(Rng::derive(spec.seed, 0, static_cast<std::uint64_t>(i) + 1));
            const double theta = obs_rng.uniform(0.0, 2.0 * kPi);
            const std::uint64_t plane_seed =
                Rng::derive(spec.seed, static_cast<std::uint64_t>(i) + 1, 0);
            rotation = rotation_fixing_axis(axis, theta, plane_seed);
        }

        std::vector<UnitVector> tuple;
        tuple.reserve(static_cast<std::size_t>(spec.K));
        for (Eigen::Index j = 0; j < spec.K; ++j) {
            Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(i) + 1,
                                static_cast<std::uint64_t>(j) + 1));
            const double scale = noise_scale(spec, j);
            int attempts = 0;
            for (;;) {
                UnitVector clean =
                    spec.mode == GeneratorMode::RotationalModel
                        ? UnitVector(rotation * base[static_cast<std::size_t>(j)].coords())
                        : random_point_on_subsphere(rng, axis, truth.radii()(j));
                UnitVector drawn = spec.noise == NoiseFamily::TangentGaussian
                                       ? apply_tangent_gaussian(rng, clean, scale)
                                       : sample_vmf(rng, clean, scale);
                if (!spec.exclusion_radius ||
                    !violates_exclusion(drawn, axis, *spec.exclusion_radius)) {
                    tuple.push_back(std::move(drawn));
                    break;
                }
                if (++attempts >= kMaxRejectionAttempts)
                    throw std::runtime_error(
                        "generate: truncation infeasible for this truth (acceptance too low)");
            }
        }
        sample.add_observation(std::move(tuple));
    }
    return GeneratedSample(std::move(sample), truth);
}

}  // namespace subsphere
