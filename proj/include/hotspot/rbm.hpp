#pragma once

#include "hotspot/geometry.hpp"
#include "hotspot/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hotspot::rbm {

struct RBMConfig {
    Real dt = 1e-4;       // base step; shrunk automatically inside narrow channels
    Real horizon = 0.5;
    int n_paths = 10000;
    std::uint64_t seed = 20240801;
    int reflection_method = 0;  // 0 = iterated specular projection
};

struct HitEstimate {
    Real probability = 0.0;
    Real ci_halfwidth = 0.0;  // 95%, normal approximation with Wilson fallback
    int n_paths = 0;
    std::string target;
    Real horizon = 0.0;
};

/// One per-start record for the rbm.csv artifact.
struct RbmRow {
    std::string target;
    int start_id = 0;
    Real estimate = 0.0;
    Real ci_halfwidth = 0.0;
    int n_paths = 0;
    Real dt = 0.0;
    std::uint64_t seed = 0;
};

struct Segment {
    Point2 a, b;
};

/// Euler increment followed by iterated specular reflection off the boundary
/// (slit banks included); after 8 reflections the position clamps to the last
/// boundary contact.  `pieces`, when given, receives the straight sub-steps
/// for crossing tests.
class Simulator {
  public:
    explicit Simulator(const geometry::BuiltDomain& dom);

    Point2 step(const Point2& p, Real dt, const Point2& noise,
                std::vector<Segment>* pieces = nullptr) const;

    /// Effective step size near the channels: min(dt, (half-height/2)^2).
    Real local_dt(const Point2& p, Real dt) const;

    std::uint64_t clamp_count() const { return clamps_; }

  private:
    const geometry::BuiltDomain& dom_;
    std::vector<Segment> walls_;
    Point2 lo_, hi_;
    Real cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> cells_;
    mutable std::uint64_t clamps_ = 0;

    bool first_crossing(const Point2& a, const Point2& b, Real& t_out, int& wall_out) const;
};

Point2 simulate_step(const geometry::BuiltDomain& dom, const Point2& p, Real dt,
                     const Point2& noise);

/// Fraction of paths that cross a target segment before the horizon.
HitEstimate hitting_probability(const geometry::BuiltDomain& dom, const Point2& start,
                                const std::vector<Segment>& target, Real horizon,
                                const RBMConfig& cfg, const std::string& name = "target");

struct GridEstimate {
    HitEstimate minimum;
    std::vector<RbmRow> rows;
};

/// Minimum over a deterministic grid of bridge starts of the probability of
/// reaching the inner region within 1/2 (and, symmetrically, the outer one).
GridEstimate estimate_p1(const geometry::DomainSpec& spec, const RBMConfig& cfg);

/// Probability of hitting `gamma` before 1/2 while avoiding the K4 images up
/// to time 1, minimized over a grid of inner-region starts.
GridEstimate estimate_p2(const geometry::DomainSpec& spec, const std::vector<Point2>& gamma,
                         const RBMConfig& cfg);

/// -log(1 - p1*p2); +infinity when saturated.
Real mu2_lower_bound(Real p1, Real p2);

}  // namespace hotspot::rbm
