#include "hotspot/rbm.hpp"

#include <algorithm>
#include <cmath>

namespace hotspot::rbm {

using geometry::BuiltDomain;
using geometry::DomainSpec;

namespace {

// xoshiro256++, one stream per path
struct Rng {
    std::uint64_t s[4];

    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL;
        for (auto& si : s) {
            std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            si = z ^ (z >> 31);
        }
    }
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
    Real uniform() {  // in (0,1]
        return (static_cast<Real>(next() >> 11) + 1.0) * 0x1.0p-53;
    }
    Point2 normal2() {  // Box-Muller pair
        const Real u1 = uniform();
        const Real u2 = uniform();
        const Real r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }
};

Real wilson_halfwidth(int hits, int n) {
    const Real z = 1.959963984540054;
    const Real p = static_cast<Real>(hits) / n;
    if (hits >= 5 && n - hits >= 5) return z * std::sqrt(p * (1.0 - p) / n);
    const Real z2 = z * z;
    const Real denom = 1.0 + z2 / n;
    const Real half = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return half;
}

bool segment_intersection(const Point2& p, const Point2& q, const Point2& a, const Point2& b,
                          Real& t_out) {
    const Point2 r = q - p;
    const Point2 s = b - a;
    const Real denom = r.x() * s.y() - r.y() * s.x();
    if (denom == 0.0) return false;
    const Point2 ap = a - p;
    const Real t = (ap.x() * s.y() - ap.y() * s.x()) / denom;
    const Real u = (ap.x() * r.y() - ap.y() * r.x()) / denom;
    if (t < -1e-15 || t > 1.0 + 1e-15 || u < -1e-12 || u > 1.0 + 1e-12) return false;
    t_out = std::clamp(t, 0.0, 1.0);
    return true;
}

bool crosses_any(const std::vector<Segment>& segs, const Point2& p, const Point2& q) {
    Real t;
    for (const auto& s : segs)
        if (segment_intersection(p, q, s.a, s.b, t)) return true;
    return false;
}

}  // namespace

Simulator::Simulator(const BuiltDomain& dom) : dom_(dom) {
    for (const auto& s : dom.segments()) walls_.push_back(Segment{s[0], s[1]});
    lo_ = hi_ = walls_.front().a;
    for (const auto& w : walls_) {
        lo_ = lo_.cwiseMin(w.a).cwiseMin(w.b);
        hi_ = hi_.cwiseMax(w.a).cwiseMax(w.b);
    }
    const Real diag = (hi_ - lo_).norm();
    cell_ = std::max(diag / 256.0, 1e-6);
    nx_ = static_cast<int>((hi_.x() - lo_.x()) / cell_) + 1;
    ny_ = static_cast<int>((hi_.y() - lo_.y()) / cell_) + 1;
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (int w = 0; w < static_cast<int>(walls_.size()); ++w) {
        const Point2 wlo = walls_[w].a.cwiseMin(walls_[w].b);
        const Point2 whi = walls_[w].a.cwiseMax(walls_[w].b);
        const int x0 = std::clamp(static_cast<int>((wlo.x() - lo_.x()) / cell_), 0, nx_ - 1);
        const int x1 = std::clamp(static_cast<int>((whi.x() - lo_.x()) / cell_), 0, nx_ - 1);
        const int y0 = std::clamp(static_cast<int>((wlo.y() - lo_.y()) / cell_), 0, ny_ - 1);
        const int y1 = std::clamp(static_cast<int>((whi.y() - lo_.y()) / cell_), 0, ny_ - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                cells_[static_cast<std::size_t>(y) * nx_ + x].push_back(w);
    }
}

bool Simulator::first_crossing(const Point2& a, const Point2& b, Real& t_out, int& wall_out) const {
    const Point2 mlo = a.cwiseMin(b);
    const Point2 mhi = a.cwiseMax(b);
    const int x0 = std::clamp(static_cast<int>((mlo.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int x1 = std::clamp(static_cast<int>((mhi.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int y0 = std::clamp(static_cast<int>((mlo.y() - lo_.y()) / cell_), 0, ny_ - 1);
    const int y1 = std::clamp(static_cast<int>((mhi.y() - lo_.y()) / cell_), 0, ny_ - 1);
    Real best_t = 2.0;
    int best_w = -1;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            for (const int w : cells_[static_cast<std::size_t>(y) * nx_ + x]) {
                Real t;
                if (!segment_intersection(a, b, walls_[w].a, walls_[w].b, t)) continue;
                if (t < best_t - 1e-15 || (std::abs(t - best_t) <= 1e-15 && w < best_w)) {
                    best_t = t;
                    best_w = w;
                }
            }
        }
    }
    if (best_w < 0) return false;
    t_out = best_t;
    wall_out = best_w;
    return true;
}

Point2 Simulator::step(const Point2& p, Real dt, const Point2& noise,
                       std::vector<Segment>* pieces) const {
    if (pieces) pieces->clear();
    Point2 cur = p;
    Point2 target = p + std::sqrt(dt) * noise;
    for (int iter = 0; iter < 8; ++iter) {
        Real t;
        int w;
        // shorten a hair so the contact point itself does not re-trigger
        if (!first_crossing(cur, target, t, w) || t >= 1.0) {
            if (pieces) pieces->push_back({cur, target});
            return target;
        }
        const Point2 hit = cur + t * (target - cur);
        if (pieces) pieces->push_back({cur, hit});
        // specular reflection of the remaining displacement across the wall
        const Point2 d = walls_[w].b - walls_[w].a;
        const Real len2 = d.squaredNorm();
        const Point2 rest = target - hit;
        const Real along = rest.dot(d) / len2;
        const Point2 par = along * d;
        const Point2 refl = 2.0 * par - rest;
        // nudge off the wall to avoid re-detecting the same contact
        const Point2 n = Point2(-d.y(), d.x()) / std::sqrt(len2);
        const Real side = refl.dot(n) >= 0 ? 1.0 : -1.0;
        cur = hit + side * 1e-13 * n;
        target = hit + refl;
    }
    ++clamps_;
    if (pieces) pieces->push_back({cur, cur});
    return cur;  // clamped at the last boundary contact
}

Real Simulator::local_dt(const Point2& p, Real dt) const {
    const Real x = geometry::canonical_representative(p).x();
    const Real h = dom_.channel_half_height(x);
    const Real cap = 0.25 * h * h;
    return std::min(dt, std::max(cap, 1e-12));
}

Point2 simulate_step(const BuiltDomain& dom, const Point2& p, Real dt, const Point2& noise) {
    return Simulator(dom).step(p, dt, noise);
}

HitEstimate hitting_probability(const BuiltDomain& dom, const Point2& start,
                                const std::vector<Segment>& target, Real horizon,
                                const RBMConfig& cfg, const std::string& name) {
    if (cfg.n_paths < 1000) throw ParameterError("hitting_probability: n_paths must be >= 1e3");
    if (!dom.contains(start, 1e-9)) throw ParameterError("hitting_probability: start outside domain");
    const Simulator sim(dom);
    int hits = 0;
    std::vector<Segment> pieces;
    for (int path = 0; path < cfg.n_paths; ++path) {
        Rng rng(cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(path) * 2654435761u);
        Point2 p = start;
        bool hit = false;
        // start already on the target counts immediately
        for (const auto& s : target) {
            const Point2 d = s.b - s.a;
            const Real t = std::clamp((p - s.a).dot(d) / d.squaredNorm(), 0.0, 1.0);
            if ((p - (s.a + t * d)).norm() < 1e-12) hit = true;
        }
        Real t = 0.0;
        while (!hit && t < horizon) {
            const Real dt = std::min(sim.local_dt(p, cfg.dt), horizon - t);
            const Point2 q = sim.step(p, dt, rng.normal2(), &pieces);
            for (const auto& piece : pieces) {
                if (crosses_any(target, piece.a, piece.b)) {
                    hit = true;
                    break;
                }
            }
            p = q;
            t += dt;
        }
        hits += hit ? 1 : 0;
    }
    HitEstimate est;
    est.probability = static_cast<Real>(hits) / cfg.n_paths;
    est.ci_halfwidth = wilson_halfwidth(hits, cfg.n_paths);
    est.n_paths = cfg.n_paths;
    est.target = name;
    est.horizon = horizon;
    return est;
}

namespace {

std::vector<Segment> k_orbit_segments(const DomainSpec& spec, int j) {
    const auto [top, bot] = geometry::k_segment(spec, j);
    std::vector<Segment> out;
    for (int k = 0; k < 3; ++k) {
        const geometry::SymmetryElement rot{k, false};
        out.push_back(Segment{geometry::apply_symmetry(rot, top), geometry::apply_symmetry(rot, bot)});
    }
    return out;
}

}  // namespace

GridEstimate estimate_p1(const DomainSpec& spec, const RBMConfig& cfg) {
    spec.validate();
    const BuiltDomain dom(spec);
    const auto tk3 = k_orbit_segments(spec, 3);
    const auto tk7 = k_orbit_segments(spec, 7);
    GridEstimate out;
    bool first = true;
    int start_id = 0;
    const auto run_grid = [&](const std::vector<Real>& xs, const std::vector<Segment>& target,
                              const std::string& name) {
        for (const Real x : xs) {
            const Point2 start{x, 0.0};
            const auto est = hitting_probability(dom, start, target, 0.5, cfg, name);
            out.rows.push_back(RbmRow{name, start_id++, est.probability, est.ci_halfwidth,
                                      est.n_paths, cfg.dt, cfg.seed});
            if (first || est.probability < out.minimum.probability) {
                out.minimum = est;
                first = false;
            }
        }
    };
    run_grid({5.15, 5.5, 5.85}, tk3, "inner_gate");  // bridge-inner starts -> tau_I
    run_grid({6.15, 6.5, 6.85}, tk7, "outer_gate");  // bridge-outer starts -> tau_E
    out.minimum.target = "p1";
    return out;
}

GridEstimate estimate_p2(const DomainSpec& spec, const std::vector<Point2>& gamma,
                         const RBMConfig& cfg) {
    spec.validate();
    if (gamma.size() < 2) throw ParameterError("estimate_p2: gamma needs at least 2 points");
    Real diam = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i)
        for (std::size_t j = i + 1; j < gamma.size(); ++j)
            diam = std::max(diam, (gamma[i] - gamma[j]).norm());
    if (diam < 1e-10) throw ParameterError("estimate_p2: gamma diameter below 1e-10");
    const BuiltDomain dom(spec);
    bool touches_inner = false;
    for (const auto& p : gamma)
        touches_inner |= dom.region_of(p) == geometry::RegionLabel::Inner;
    if (!touches_inner) throw ParameterError("estimate_p2: gamma must intersect the inner region");

    std::vector<Segment> gamma_segs;
    for (std::size_t i = 0; i + 1 < gamma.size(); ++i)
        gamma_segs.push_back(Segment{gamma[i], gamma[i + 1]});
    const auto tk4 = k_orbit_segments(spec, 4);

    const Simulator sim(dom);
    const std::vector<Point2> starts{{0.0, 0.0},   {0.12, 0.02}, {-0.05, 0.07},
                                     {0.04, -0.08}, {0.2, 0.0}};
    GridEstimate out;
    bool first = true;
    int start_id = 0;
    for (const auto& start : starts) {
        if (!dom.contains(start, 1e-9)) throw ParameterError("estimate_p2: start grid point outside domain");
        int hits = 0;
        std::vector<Segment> pieces;
        for (int path = 0; path < cfg.n_paths; ++path) {
            Rng rng(cfg.seed * 0x9E3779B97F4A7C15ULL +
                    static_cast<std::uint64_t>(start_id * 1000003 + path) * 2654435761u);
            Point2 p = start;
            bool hit_gamma = false, hit_k4 = false;
            Real t = 0.0;
            while (t < 1.0) {
                if (!hit_gamma && t >= 0.5) break;  // outcome already decided false
                const Real dt = std::min(sim.local_dt(p, cfg.dt), 1.0 - t);
                const Point2 q = sim.step(p, dt, rng.normal2(), &pieces);
                for (const auto& piece : pieces) {
                    if (!hit_gamma && t + dt <= 0.5 && crosses_any(gamma_segs, piece.a, piece.b))
                        hit_gamma = true;
                    if (crosses_any({tk4.begin(), tk4.end()}, piece.a, piece.b)) hit_k4 = true;
                }
                p = q;
                t += dt;
                if (hit_k4) break;
            }
            hits += (hit_gamma && !hit_k4) ? 1 : 0;
        }
        HitEstimate est;
        est.probability = static_cast<Real>(hits) / cfg.n_paths;
        est.ci_halfwidth = wilson_halfwidth(hits, cfg.n_paths);
        est.n_paths = cfg.n_paths;
        est.target = "gamma_avoid_k4";
        est.horizon = 1.0;
        out.rows.push_back(RbmRow{est.target, start_id++, est.probability, est.ci_halfwidth,
                                  est.n_paths, cfg.dt, cfg.seed});
        if (first || est.probability < out.minimum.probability) {
            out.minimum = est;
            first = false;
        }
    }
    out.minimum.target = "p2";
    return out;
}

Real mu2_lower_bound(Real p1, Real p2) {
    if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
        throw ParameterError("mu2_lower_bound: probabilities must lie in [0,1]");
    const Real prod = p1 * p2;
    if (prod >= 1.0) return std::numeric_limits<Real>::infinity();  // saturated
    return -std::log1p(-prod);
}

}  // namespace hotspot::rbm
