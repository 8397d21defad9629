#include "msle/conformal.hpp"

#include "msle/errors.hpp"

#include <algorithm>
#include <cmath>

namespace msle {

namespace {

constexpr double PI = 3.141592653589793238462643383279502884;

double sq(double x) { return x * x; }

} // namespace

Parameters make_parameters(double kappa) {
    if (!(kappa > 0.0) || !(kappa < 8.0))
        throw std::invalid_argument("make_parameters: kappa must lie in (0,8)");
    Parameters p;
    p.kappa = kappa;
    p.h = (6.0 - kappa) / (2.0 * kappa);
    p.c = (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa);
    return p;
}

double poisson_kernel_halfplane(double x, double y) {
    double d = y - x;
    if (std::abs(d) < 1e-12)
        throw SingularityError("poisson_kernel_halfplane: coincident points");
    return 1.0 / (d * d);
}

double elliptic_K_comp(double kprime) {
    if (!(kprime > 0.0) || !(kprime <= 1.0))
        throw std::invalid_argument("elliptic_K_comp: complement must lie in (0,1]");
    double a = 1.0, b = kprime;
    for (int i = 0; i < 64 && std::abs(a - b) > 1e-17 * a; ++i) {
        double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return PI / (2.0 * a);
}

double elliptic_K(double k) {
    if (!(k >= 0.0) || !(k < 1.0))
        throw std::invalid_argument("elliptic_K: modulus must lie in [0,1)");
    return elliptic_K_comp(std::sqrt(1.0 - k * k));
}

void rect_modulus_pair(double ell, double& k, double& kprime) {
    if (!(ell >= 1.0 / 64.0) || !(ell <= 64.0))
        throw std::invalid_argument("rect_modulus: aspect ratio out of supported range");
    // nome q = exp(-pi K'/K) with K/K' = ell/2.  Theta quotients in product
    // form keep full precision even when one modulus is within epsilon of 1:
    //   k  = (th2/th3)^2 = 4 sqrt(q) prod ((1+q^{2n})/(1+q^{2n-1}))^4
    //   k' = (th4/th3)^2 =           prod ((1-q^{2n-1})/(1+q^{2n-1}))^4
    double q = std::exp(-2.0 * PI / ell);
    double pk = 1.0, pkp = 1.0;
    double q_odd = q, q_even = q * q;
    for (int n = 1; n <= 512; ++n) {
        double rk = (1.0 + q_even) / (1.0 + q_odd);
        double rkp = (1.0 - q_odd) / (1.0 + q_odd);
        pk *= sq(sq(rk));
        pkp *= sq(sq(rkp));
        if (q_odd < 1e-18) break;
        q_odd *= q * q;
        q_even *= q * q;
    }
    k = std::min(4.0 * std::exp(-PI / ell) * pk, 1.0);
    kprime = std::min(pkp, 1.0);
    if (!(k > 0.0) || !(kprime > 0.0))
        throw NumericsError("rect_modulus: theta products failed");
}

double rect_modulus(double ell) {
    double k, kp;
    rect_modulus_pair(ell, k, kp);
    return k;
}

void jacobi_sn_cn_dn(double u, double k, double kprime, double& sn, double& cn,
                     double& dn) {
    if (!(k >= 0.0) || !(k <= 1.0) || !(kprime > 0.0) || !(kprime <= 1.0))
        throw std::invalid_argument("jacobi_sn_cn_dn: modulus out of range");
    if (k < 1e-12) {
        sn = std::sin(u);
        cn = std::cos(u);
        dn = 1.0;
        return;
    }
    // descending Landen / arithmetic-geometric mean with the amplitude
    // recursion phi_{n-1} = (phi_n + asin(c_n sin(phi_n)/a_n)) / 2
    double a[64], c[64];
    double an = 1.0, bn = kprime;
    int n = 0;
    a[0] = an;
    c[0] = k;
    while (n < 62 && std::abs(a[n] - bn) > 1e-17 * a[n]) {
        double a1 = 0.5 * (an + bn);
        double c1 = 0.5 * (an - bn);
        bn = std::sqrt(an * bn);
        an = a1;
        ++n;
        a[n] = an;
        c[n] = c1;
    }
    double phi = std::ldexp(an * u, n);
    for (int i = n; i >= 1; --i) {
        double s = c[i] * std::sin(phi) / a[i];
        s = std::clamp(s, -1.0, 1.0);
        phi = 0.5 * (phi + std::asin(s));
    }
    sn = std::sin(phi);
    cn = std::cos(phi);
    // dn^2 = k'^2 + k^2 cn^2 avoids cancellation near sn = 1
    dn = std::sqrt(kprime * kprime + k * k * cn * cn);
}

void jacobi_sn_cn_dn(double u, double k, double& sn, double& cn, double& dn) {
    if (!(k >= 0.0) || !(k < 1.0))
        throw std::invalid_argument("jacobi_sn_cn_dn: modulus must lie in [0,1)");
    jacobi_sn_cn_dn(u, k, std::sqrt(1.0 - k * k), sn, cn, dn);
}

Jacobi jacobi_elliptic(cplx z, double k, double kp) {
    double s, c, d, s1, c1, d1;
    jacobi_sn_cn_dn(z.real(), k, kp, s, c, d);
    jacobi_sn_cn_dn(z.imag(), kp, k, s1, c1, d1);
    double den = c1 * c1 + k * k * s * s * s1 * s1;
    if (den < 1e-300)
        throw SingularityError("jacobi_elliptic: evaluation at a pole of sn");
    Jacobi j;
    j.sn = cplx(s * d1, c * d * s1 * c1) / den;
    j.cn = cplx(c * c1, -s * d * s1 * d1) / den;
    j.dn = cplx(d * c1 * d1, -k * k * s * c * s1) / den;
    return j;
}

Jacobi jacobi_elliptic(cplx z, double k) {
    return jacobi_elliptic(z, k, std::sqrt(1.0 - k * k));
}

RectMap::RectMap(double ell) : ell_(ell) {
    rect_modulus_pair(ell, k_, kprime_);
    bigk_ = elliptic_K_comp(kprime_);
    scale_ = 2.0 * bigk_ / ell_;
}

cplx RectMap::map(cplx z) const {
    if (z.real() < -1e-9 || z.real() > ell_ + 1e-9 || z.imag() < -1e-9 ||
        z.imag() > 1.0 + 1e-9)
        throw std::invalid_argument("RectMap::map: point outside the rectangle");
    cplx zeta(scale_ * z.real() - bigk_, scale_ * z.imag());
    return jacobi_elliptic(zeta, k_, kprime_).sn;
}

cplx RectMap::deriv(cplx z) const {
    if (z.real() < -1e-9 || z.real() > ell_ + 1e-9 || z.imag() < -1e-9 ||
        z.imag() > 1.0 + 1e-9)
        throw std::invalid_argument("RectMap::deriv: point outside the rectangle");
    cplx zeta(scale_ * z.real() - bigk_, scale_ * z.imag());
    Jacobi j = jacobi_elliptic(zeta, k_, kprime_);
    return scale_ * j.cn * j.dn;
}

namespace {

bool near(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

// checks x lies on the boundary of [0,ell]x[0,1] and is not a corner
void check_rect_boundary(double ell, cplx x) {
    bool on_bottom = near(x.imag(), 0.0) && x.real() > -1e-9 && x.real() < ell + 1e-9;
    bool on_top = near(x.imag(), 1.0) && x.real() > -1e-9 && x.real() < ell + 1e-9;
    bool on_left = near(x.real(), 0.0) && x.imag() > -1e-9 && x.imag() < 1.0 + 1e-9;
    bool on_right = near(x.real(), ell) && x.imag() > -1e-9 && x.imag() < 1.0 + 1e-9;
    if (!(on_bottom || on_top || on_left || on_right))
        throw std::invalid_argument("poisson_kernel: marked point not on the boundary");
    bool corner = (near(x.real(), 0.0) || near(x.real(), ell)) &&
                  (near(x.imag(), 0.0) || near(x.imag(), 1.0));
    if (corner)
        throw CornerError("poisson_kernel: boundary derivative undefined at a corner");
}

double halfplane_pair(cplx w1, cplx w2, double d1, double d2) {
    // conformal covariance through w -> -1/w keeps the evaluation stable when
    // the images sit near the pole of the rectangle map
    if (std::min(std::abs(w1), std::abs(w2)) > 100.0) {
        cplx u1 = -1.0 / w1, u2 = -1.0 / w2;
        double g = std::norm(u1 - u2);
        if (g < 1e-280) throw SingularityError("poisson_kernel: coincident images");
        return (d1 / std::norm(w1)) * (d2 / std::norm(w2)) / g;
    }
    double g = std::norm(w1 - w2);
    if (g < 1e-280) throw SingularityError("poisson_kernel: coincident images");
    return d1 * d2 / g;
}

} // namespace

double poisson_kernel(const DomainSpec& dom, cplx x, cplx y) {
    switch (dom.kind) {
    case DomainKind::half_plane: {
        if (std::abs(x.imag()) > 1e-9 || std::abs(y.imag()) > 1e-9)
            throw std::invalid_argument("poisson_kernel: half-plane points must be real");
        return poisson_kernel_halfplane(x.real(), y.real());
    }
    case DomainKind::disc: {
        if (!near(std::abs(x), 1.0) || !near(std::abs(y), 1.0))
            throw std::invalid_argument("poisson_kernel: disc points must lie on the circle");
        double g = std::norm(x - y);
        if (g < 1e-24) throw SingularityError("poisson_kernel: coincident points");
        // the Moebius factorization through the half-plane collapses to the
        // chordal distance, see the unit test for the explicit check
        return 1.0 / g;
    }
    case DomainKind::rectangle: {
        check_rect_boundary(dom.ell, x);
        check_rect_boundary(dom.ell, y);
        if (std::abs(x - y) < 1e-12)
            throw SingularityError("poisson_kernel: coincident points");
        RectMap m(dom.ell);
        return halfplane_pair(m.map(x), m.map(y), std::abs(m.deriv(x)),
                              std::abs(m.deriv(y)));
    }
    }
    throw std::invalid_argument("poisson_kernel: unknown domain kind");
}

double rect_kernel_bottom(double width, double height, double x1, double x2) {
    if (!(height > 0.0) || !(width > 0.0))
        throw std::invalid_argument("rect_kernel_bottom: degenerate rectangle");
    // [0,w]x[0,h] = h * ([0,w/h]x[0,1]); kernels scale as h^{-2}
    DomainSpec dom{DomainKind::rectangle, width / height, {}};
    double v = poisson_kernel(dom, cplx(x1 / height, 0.0), cplx(x2 / height, 0.0));
    return v / (height * height);
}

} // namespace msle
