#pragma once

#include <optional>

#include "subsphere/parameter_space.hpp"
#include "subsphere/polysphere_sample.hpp"

namespace subsphere {

enum class GeneratorMode {
    /// Fixed base points on the true subspheres, rotated about the true
    /// axis by a per-observation uniform angle, then perturbed.
    RotationalModel,
    /// Independent uniform positions on each true subsphere, then perturbed.
    NoisySubsphere,
};

enum class NoiseFamily {
    TangentGaussian,  // isotropic Gaussian in the tangent space, mapped down
    VonMisesFisher,   // classical directional noise around the clean point
};

struct GeneratorSpec {
    Eigen::Index m = 2;
    Eigen::Index K = 1;
    Eigen::Index n = 100;
    std::optional<SubsphereParams> truth;  // required
    GeneratorMode mode = GeneratorMode::RotationalModel;
    NoiseFamily noise = NoiseFamily::TangentGaussian;
    double sigma = 0.1;   // radians, TangentGaussian
    double kappa = 100.0; // concentration, VonMisesFisher
    bool iid_across_j = true;
    Eigen::VectorXd sigma_per_j;  // used when !iid_across_j with TangentGaussian
    Eigen::VectorXd kappa_per_j;  // used when !iid_across_j with VonMisesFisher
    /// Optional truncation: resample any draw landing within this geodesic
    /// radius of either pole of the true axis.
    std::optional<double> exclusion_radius;
    std::uint64_t seed = 0;
    /// Longitudes of the base points on their subspheres (RotationalModel);
    /// equispaced when empty.
    Eigen::VectorXd base_longitudes;

    void validate() const;
};

struct GeneratedSample {
    PolysphereSample sample;
    SubsphereParams truth;

    GeneratedSample(PolysphereSample s, SubsphereParams t)
        : sample(std::move(s)), truth(std::move(t)) {}
};

/// Draw a sample from the spec. Deterministic: every (observation, group)
/// pair consumes its own derived stream, so neither generation order nor
/// threading can change the output.
GeneratedSample generate(const GeneratorSpec& spec);

/// Sample from the von Mises-Fisher distribution on S^m (Ulrich/Wood
/// rejection sampler). Exposed for tests.
class Rng;
UnitVector sample_vmf(Rng& rng, const UnitVector& mean, double kappa);

}  // namespace subsphere
