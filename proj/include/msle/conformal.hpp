#pragma once

#include <complex>
#include <vector>

namespace msle {

using cplx = std::complex<double>;

// kappa in (0,8) with the derived weight h and central charge c
struct Parameters {
    double kappa;
    double h;
    double c;
};

Parameters make_parameters(double kappa);

enum class DomainKind { half_plane, disc, rectangle };

// Simply connected reference domain with marked boundary points.
// Rectangles are [0, ell] x [0, 1].
struct DomainSpec {
    DomainKind kind = DomainKind::half_plane;
    double ell = 1.0;
    std::vector<cplx> marked;
};

// boundary Poisson kernel of the upper half-plane, |y - x|^{-2}
double poisson_kernel_halfplane(double x, double y);

// complete elliptic integral of the first kind, modulus k in [0,1)
double elliptic_K(double k);

// K(k) expressed through the complementary modulus k' = sqrt(1-k^2); use this
// form when k is so close to 1 that the complement cannot be recovered from it
double elliptic_K_comp(double kprime);

// modulus k solving K(k)/K(k') = ell/2 (aspect ratio of [0,ell]x[0,1])
double rect_modulus(double ell);

// both k and k' to full precision via theta product representations
void rect_modulus_pair(double ell, double& k, double& kprime);

// Jacobi elliptic functions, real argument
void jacobi_sn_cn_dn(double u, double k, double& sn, double& cn, double& dn);

// variant with the complementary modulus supplied by the caller
void jacobi_sn_cn_dn(double u, double k, double kprime, double& sn, double& cn,
                     double& dn);

struct Jacobi {
    cplx sn, cn, dn;
};
Jacobi jacobi_elliptic(cplx z, double k);
Jacobi jacobi_elliptic(cplx z, double k, double kprime);

// Conformal bijection [0,ell]x[0,1] -> closed upper half-plane. Corners map
// to -1, 1, 1/k, -1/k; the midpoint of the top edge maps to infinity.
class RectMap {
  public:
    explicit RectMap(double ell);
    cplx map(cplx z) const;
    cplx deriv(cplx z) const;
    double modulus() const { return k_; }
    double ell() const { return ell_; }

  private:
    double ell_, k_, kprime_, bigk_, scale_;
};

// boundary Poisson kernel of the given domain via conformal covariance
double poisson_kernel(const DomainSpec& dom, cplx x, cplx y);

// kernel of the rectangle [0, width] x [0, height] at two bottom-edge points,
// used for nested-domain comparisons
double rect_kernel_bottom(double width, double height, double x1, double x2);

} // namespace msle
