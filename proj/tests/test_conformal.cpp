#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "msle/conformal.hpp"
#include "msle/errors.hpp"
#include "msle/random.hpp"

#include <cmath>

using namespace msle;
using doctest::Approx;

TEST_CASE("parameter table") {
    // frozen from the defining formulas h=(6-k)/2k, c=(3k-8)(6-k)/2k
    auto p = make_parameters(16.0 / 3.0);
    CHECK(p.h == Approx(0.0625).epsilon(1e-14));
    CHECK(p.c == Approx(0.5).epsilon(1e-14));

    CHECK(make_parameters(2.0).h == Approx(1.0));
    CHECK(make_parameters(2.0).c == Approx(-2.0));
    CHECK(make_parameters(8.0 / 3.0).h == Approx(0.625));
    CHECK(make_parameters(8.0 / 3.0).c == Approx(0.0).epsilon(1e-14));
    CHECK(make_parameters(3.0).h == Approx(0.5));
    CHECK(make_parameters(3.0).c == Approx(0.5));
    CHECK(make_parameters(4.0).h == Approx(0.25));
    CHECK(make_parameters(4.0).c == Approx(1.0));
    CHECK(make_parameters(6.0).h == Approx(0.0).epsilon(1e-14));

    CHECK_THROWS_AS(make_parameters(0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_parameters(8.0), std::invalid_argument);
    CHECK_THROWS_AS(make_parameters(-1.0), std::invalid_argument);
}

TEST_CASE("half-plane kernel values and covariance under Moebius maps") {
    CHECK(poisson_kernel_halfplane(0.0, 1.0) == Approx(1.0));
    CHECK(poisson_kernel_halfplane(0.0, 2.0) == Approx(0.25));
    CHECK(poisson_kernel_halfplane(2.0, 0.0) == Approx(0.25));
    CHECK_THROWS_AS(poisson_kernel_halfplane(1.0, 1.0), SingularityError);

    Rng rng(12345);
    for (int trial = 0; trial < 100; ++trial) {
        double x = 4.0 * rng.uniform() - 2.0;
        double y = x + 0.1 + 3.0 * rng.uniform();
        // random Moebius map of H: coefficients with positive determinant
        double a = 2.0 * rng.uniform() - 1.0, b = 2.0 * rng.uniform() - 1.0;
        double c = 2.0 * rng.uniform() - 1.0, d = 2.0 * rng.uniform() - 1.0;
        double det = a * d - b * c;
        if (std::abs(det) < 0.05) continue;
        if (det < 0) { a = -a; b = -b; det = -det; }
        if (std::abs(c * x + d) < 0.1 || std::abs(c * y + d) < 0.1) continue;
        double fx = (a * x + b) / (c * x + d);
        double fy = (a * y + b) / (c * y + d);
        double dfx = det / ((c * x + d) * (c * x + d));
        double dfy = det / ((c * y + d) * (c * y + d));
        double lhs = std::abs(dfx) * std::abs(dfy) * poisson_kernel_halfplane(fx, fy);
        double rhs = poisson_kernel_halfplane(x, y);
        CHECK(lhs == Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("elliptic integral") {
    CHECK(elliptic_K(0.0) == Approx(1.5707963267948966).epsilon(1e-14));
    // K(1/sqrt(2)) = Gamma(1/4)^2 / (4 sqrt(pi))
    CHECK(elliptic_K(std::sqrt(0.5)) == Approx(1.8540746773013719).epsilon(1e-13));
    CHECK_THROWS_AS(elliptic_K(1.0), std::invalid_argument);
}

TEST_CASE("rectangle modulus from aspect ratio") {
    // square of conformal modulus 1 on each side: ell=2 gives K=K', k=1/sqrt2
    CHECK(rect_modulus(2.0) == Approx(std::sqrt(0.5)).epsilon(1e-12));
    for (double ell : {0.25, 0.5, 1.0, 1.7, 3.0, 8.0, 25.0}) {
        double k, kp;
        rect_modulus_pair(ell, k, kp);
        // K(k) = K_comp(k'); the pair keeps precision even where k rounds to 1
        CHECK(elliptic_K_comp(kp) / elliptic_K_comp(k) ==
              Approx(ell / 2.0).epsilon(1e-12));
        if (k < 0.99 && kp < 0.99) CHECK(k * k + kp * kp == Approx(1.0).epsilon(1e-13));
    }
    // swapping the sides swaps the moduli
    double ka, kpa, kb, kpb;
    rect_modulus_pair(0.4, ka, kpa);
    rect_modulus_pair(10.0, kb, kpb);
    CHECK(ka == Approx(kpb).epsilon(1e-13));
    CHECK(kpa == Approx(kb).epsilon(1e-13));
    CHECK_THROWS_AS(rect_modulus(100.0), std::invalid_argument);
}

TEST_CASE("jacobi elliptic functions, real argument") {
    double k = 0.8;
    double K = elliptic_K(k);
    double sn, cn, dn;
    jacobi_sn_cn_dn(0.0, k, sn, cn, dn);
    CHECK(sn == Approx(0.0).epsilon(1e-14));
    CHECK(cn == Approx(1.0));
    CHECK(dn == Approx(1.0));
    jacobi_sn_cn_dn(K, k, sn, cn, dn);
    CHECK(sn == Approx(1.0).epsilon(1e-12));
    CHECK(cn == Approx(0.0).epsilon(1e-10));
    CHECK(dn == Approx(std::sqrt(1.0 - k * k)).epsilon(1e-12));

    for (double u = -1.9; u < 2.0; u += 0.23) {
        jacobi_sn_cn_dn(u, k, sn, cn, dn);
        CHECK(sn * sn + cn * cn == Approx(1.0).epsilon(1e-13));
        CHECK(dn * dn + k * k * sn * sn == Approx(1.0).epsilon(1e-13));
        // d/du sn = cn dn
        double s2, c2, d2, s3, c3, d3;
        double eps = 1e-6;
        jacobi_sn_cn_dn(u + eps, k, s2, c2, d2);
        jacobi_sn_cn_dn(u - eps, k, s3, c3, d3);
        CHECK((s2 - s3) / (2 * eps) == Approx(cn * dn).epsilon(1e-7));
    }
    // k = 0 degenerates to circular functions
    jacobi_sn_cn_dn(0.7, 0.0, sn, cn, dn);
    CHECK(sn == Approx(std::sin(0.7)));
    CHECK(dn == Approx(1.0));
}

TEST_CASE("jacobi elliptic functions, complex argument") {
    double k = 0.6, kp = std::sqrt(1.0 - k * k);
    // pure imaginary argument: sn(iy,k) = i sn(y,k')/cn(y,k')
    for (double y = 0.1; y < 1.0; y += 0.2) {
        Jacobi j = jacobi_elliptic(cplx(0.0, y), k);
        double s1, c1, d1;
        jacobi_sn_cn_dn(y, kp, s1, c1, d1);
        CHECK(j.sn.real() == Approx(0.0).epsilon(1e-13));
        CHECK(j.sn.imag() == Approx(s1 / c1).epsilon(1e-12));
    }
    // identities hold off the real axis
    for (double x = -1.2; x < 1.3; x += 0.6)
        for (double y = 0.1; y < 0.9; y += 0.3) {
            Jacobi j = jacobi_elliptic(cplx(x, y), k);
            cplx one1 = j.sn * j.sn + j.cn * j.cn;
            cplx one2 = j.dn * j.dn + k * k * j.sn * j.sn;
            CHECK(std::abs(one1 - 1.0) < 1e-12);
            CHECK(std::abs(one2 - 1.0) < 1e-12);
        }
}

TEST_CASE("rectangle map sends corners to -1, 1, 1/k, -1/k") {
    for (double ell : {1.0, 2.0, 3.5}) {
        RectMap m(ell);
        double k = m.modulus();
        CHECK(std::abs(m.map(cplx(0.0, 0.0)) - cplx(-1.0, 0.0)) < 1e-10);
        CHECK(std::abs(m.map(cplx(ell, 0.0)) - cplx(1.0, 0.0)) < 1e-10);
        CHECK(std::abs(m.map(cplx(ell, 1.0)) - cplx(1.0 / k, 0.0)) < 1e-9 / k);
        CHECK(std::abs(m.map(cplx(0.0, 1.0)) - cplx(-1.0 / k, 0.0)) < 1e-9 / k);
    }
}

TEST_CASE("rectangle map interior goes to the upper half-plane, boundary to R") {
    RectMap m(1.6);
    for (double x = 0.1; x < 1.6; x += 0.22)
        for (double y = 0.1; y < 1.0; y += 0.18) {
            cplx w = m.map(cplx(x, y));
            CHECK(w.imag() > 0.0);
        }
    // bottom edge is increasing into (-1,1)
    double prev = -1.0;
    for (double x = 0.1; x < 1.6; x += 0.1) {
        cplx w = m.map(cplx(x, 0.0));
        CHECK(std::abs(w.imag()) < 1e-12);
        CHECK(w.real() > prev);
        CHECK(w.real() < 1.0);
        prev = w.real();
    }
    // right edge continues increasing from 1 to 1/k
    prev = 1.0;
    for (double y = 0.1; y < 1.0; y += 0.15) {
        cplx w = m.map(cplx(1.6, y));
        CHECK(std::abs(w.imag()) < 1e-10 * std::abs(w));
        CHECK(w.real() > prev);
        prev = w.real();
    }
}

TEST_CASE("corner images have the cross-ratio fixed by the modulus") {
    for (double ell : {0.8, 2.0, 5.0}) {
        RectMap m(ell);
        double k = m.modulus();
        double x1 = -1.0 / k, x2 = -1.0, x3 = 1.0, x4 = 1.0 / k;
        double cr = (x4 - x1) * (x3 - x2) / ((x3 - x1) * (x4 - x2));
        CHECK(cr == Approx(4.0 * k / ((1.0 + k) * (1.0 + k))).epsilon(1e-12));
    }
}

TEST_CASE("rectangle kernel agrees across independent factorizations") {
    // route A: direct sn-map factorization; route B: compose with a Moebius
    // automorphism and with the Cayley map to the disc
    double ell = 1.0;
    DomainSpec dom{DomainKind::rectangle, ell, {}};
    cplx x(0.0, 0.5), y(1.0, 0.5);
    double direct = poisson_kernel(dom, x, y);

    RectMap m(ell);
    cplx w1 = m.map(x), w2 = m.map(y);
    double d1 = std::abs(m.deriv(x)), d2 = std::abs(m.deriv(y));
    // Moebius w -> (2w-1)/(w+4), determinant 9 > 0
    auto mob = [](cplx w) { return (2.0 * w - 1.0) / (w + 4.0); };
    auto mobd = [](cplx w) { return 9.0 / ((w + 4.0) * (w + 4.0)); };
    double routeB = d1 * std::abs(mobd(w1)) * d2 * std::abs(mobd(w2)) /
                    std::norm(mob(w1) - mob(w2));
    CHECK(routeB == Approx(direct).epsilon(1e-8));

    // Cayley transform to the disc and the chordal kernel there
    auto cay = [](cplx w) { return (w - cplx(0, 1)) / (w + cplx(0, 1)); };
    auto cayd = [](cplx w) { return cplx(0, 2) / ((w + cplx(0, 1)) * (w + cplx(0, 1))); };
    double routeC = d1 * std::abs(cayd(w1)) * d2 * std::abs(cayd(w2)) /
                    std::norm(cay(w1) - cay(w2));
    CHECK(routeC == Approx(direct).epsilon(1e-8));
}

TEST_CASE("disc kernel equals the chordal form") {
    DomainSpec dom{DomainKind::disc, 1.0, {}};
    cplx x = std::polar(1.0, 0.3), y = std::polar(1.0, 2.1);
    CHECK(poisson_kernel(dom, x, y) == Approx(1.0 / std::norm(x - y)).epsilon(1e-12));
    CHECK_THROWS_AS(poisson_kernel(dom, x, x), SingularityError);
    CHECK_THROWS_AS(poisson_kernel(dom, cplx(0.2, 0.0), y), std::invalid_argument);
}

TEST_CASE("kernel precondition failures") {
    DomainSpec rect{DomainKind::rectangle, 2.0, {}};
    CHECK_THROWS_AS(poisson_kernel(rect, cplx(0.0, 0.0), cplx(1.0, 0.0)), CornerError);
    CHECK_THROWS_AS(poisson_kernel(rect, cplx(0.5, 0.5), cplx(1.0, 0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(poisson_kernel(rect, cplx(0.5, 0.0), cplx(0.5, 0.0)),
                    SingularityError);
}

TEST_CASE("domain monotonicity of the kernel on nested rectangles") {
    // U = [0,w]x[0,h] inside the half-plane, marks on the shared bottom edge:
    // H_U <= H_H, and taller rectangles dominate shorter ones
    Rng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        double w = 1.0 + 3.0 * rng.uniform();
        double h = 0.2 + 0.8 * rng.uniform();
        double x1 = w * (0.1 + 0.3 * rng.uniform());
        double x2 = w * (0.6 + 0.3 * rng.uniform());
        double hu = rect_kernel_bottom(w, h, x1, x2);
        double hfull = rect_kernel_bottom(w, 1.0, x1, x2);
        double hh = poisson_kernel_halfplane(x1, x2);
        CHECK(hu <= hfull * (1.0 + 1e-9));
        CHECK(hfull <= hh * (1.0 + 1e-9));
    }
}

TEST_CASE("kernel product inequality on rectangle intersections") {
    // Omega = [0,L]x[0,1], U = [0,L]x[0,h], V = [0,L']x[0,1],
    // U cap V = [0,L']x[0,h]; H_Omega H_{UcapV} >= H_U H_V
    Rng rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        double L = 2.0 + 2.0 * rng.uniform();
        double Lp = 1.0 + (L - 1.2) * rng.uniform();
        double h = 0.3 + 0.6 * rng.uniform();
        double x1 = Lp * (0.1 + 0.3 * rng.uniform());
        double x2 = Lp * (0.55 + 0.35 * rng.uniform());
        double lhs = rect_kernel_bottom(L, 1.0, x1, x2) * rect_kernel_bottom(Lp, h, x1, x2);
        double rhs = rect_kernel_bottom(L, h, x1, x2) * rect_kernel_bottom(Lp, 1.0, x1, x2);
        CHECK(lhs >= rhs * (1.0 - 1e-9));
    }
}
