#pragma once

#include "hotspot/types.hpp"

#include <cmath>

namespace hotspot::meshing::detail {

// Filtered orientation/incircle predicates: double-precision fast path with a
// forward error bound, long-double (64-bit mantissa) fallback near zero.

inline int sign_of(Real v, Real bound) {
    if (v > bound) return 1;
    if (v < -bound) return -1;
    return 0;
}

inline int orient2d(const Point2& a, const Point2& b, const Point2& c) {
    const Real detl = (b.x() - a.x()) * (c.y() - a.y());
    const Real detr = (b.y() - a.y()) * (c.x() - a.x());
    const Real det = detl - detr;
    const Real detsum = std::abs(detl) + std::abs(detr);
    if (std::abs(det) > 3.3307e-16 * detsum) return det > 0 ? 1 : -1;
    const long double lx1 = static_cast<long double>(b.x()) - a.x();
    const long double ly1 = static_cast<long double>(b.y()) - a.y();
    const long double lx2 = static_cast<long double>(c.x()) - a.x();
    const long double ly2 = static_cast<long double>(c.y()) - a.y();
    const long double d = lx1 * ly2 - ly1 * lx2;
    const long double s = std::abs(lx1 * ly2) + std::abs(ly1 * lx2);
    if (std::abs(d) > 1.1e-19L * s) return d > 0 ? 1 : -1;
    return 0;
}

/// > 0 iff d lies strictly inside the circumcircle of ccw triangle (a,b,c).
inline int incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const Real adx = a.x() - d.x(), ady = a.y() - d.y();
    const Real bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const Real cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const Real ad2 = adx * adx + ady * ady;
    const Real bd2 = bdx * bdx + bdy * bdy;
    const Real cd2 = cdx * cdx + cdy * cdy;
    const Real det = ad2 * (bdx * cdy - bdy * cdx) + bd2 * (cdx * ady - cdy * adx) +
                     cd2 * (adx * bdy - ady * bdx);
    const Real perm = ad2 * (std::abs(bdx * cdy) + std::abs(bdy * cdx)) +
                      bd2 * (std::abs(cdx * ady) + std::abs(cdy * adx)) +
                      cd2 * (std::abs(adx * bdy) + std::abs(ady * bdx));
    if (std::abs(det) > 1.1102e-15 * perm) return det > 0 ? 1 : -1;
    const long double ladx = static_cast<long double>(a.x()) - d.x();
    const long double lady = static_cast<long double>(a.y()) - d.y();
    const long double lbdx = static_cast<long double>(b.x()) - d.x();
    const long double lbdy = static_cast<long double>(b.y()) - d.y();
    const long double lcdx = static_cast<long double>(c.x()) - d.x();
    const long double lcdy = static_cast<long double>(c.y()) - d.y();
    const long double la2 = ladx * ladx + lady * lady;
    const long double lb2 = lbdx * lbdx + lbdy * lbdy;
    const long double lc2 = lcdx * lcdx + lcdy * lcdy;
    const long double ld = la2 * (lbdx * lcdy - lbdy * lcdx) + lb2 * (lcdx * lady - lcdy * ladx) +
                           lc2 * (ladx * lbdy - lady * lbdx);
    const long double lp = la2 * (std::abs(lbdx * lcdy) + std::abs(lbdy * lcdx)) +
                           lb2 * (std::abs(lcdx * lady) + std::abs(lcdy * ladx)) +
                           lc2 * (std::abs(ladx * lbdy) + std::abs(lady * lbdx));
    if (std::abs(ld) > 5.5e-19L * lp) return ld > 0 ? 1 : -1;
    return 0;
}

inline Point2 circumcenter(const Point2& a, const Point2& b, const Point2& c) {
    const Real bx = b.x() - a.x(), by = b.y() - a.y();
    const Real cx = c.x() - a.x(), cy = c.y() - a.y();
    const Real d = 2.0 * (bx * cy - by * cx);
    const Real b2 = bx * bx + by * by;
    const Real c2 = cx * cx + cy * cy;
    return {a.x() + (cy * b2 - by * c2) / d, a.y() + (bx * c2 - cx * b2) / d};
}

}  // namespace hotspot::meshing::detail
