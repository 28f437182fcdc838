#pragma once

#include <vector>

#include "subsphere/sphere_geometry.hpp"

namespace subsphere {

/// n observations on the polysphere (S^m)^K: observation i is the K-tuple
/// (x_{i,0}, ..., x_{i,K-1}). Stored row-major by observation.
class PolysphereSample {
public:
    PolysphereSample(Eigen::Index m, Eigen::Index K) : m_(m), K_(K), n_(0) {
        if (m < 1 || K < 1)
            throw std::invalid_argument("PolysphereSample: m and K must be positive");
    }

    Eigen::Index m() const { return m_; }
    Eigen::Index K() const { return K_; }
    Eigen::Index n() const { return n_; }

    void add_observation(std::vector<UnitVector> tuple) {
        if (static_cast<Eigen::Index>(tuple.size()) != K_)
            throw std::invalid_argument("PolysphereSample: observation must have K points");
        for (const auto& x : tuple)
            if (x.m() != m_)
                throw std::invalid_argument("PolysphereSample: point dimension mismatch");
        points_.insert(points_.end(), std::make_move_iterator(tuple.begin()),
                       std::make_move_iterator(tuple.end()));
        ++n_;
    }

    const UnitVector& point(Eigen::Index i, Eigen::Index j) const {
        return points_[static_cast<std::size_t>(i * K_ + j)];
    }

private:
    Eigen::Index m_, K_, n_;
    std::vector<UnitVector> points_;
};

}  // namespace subsphere
