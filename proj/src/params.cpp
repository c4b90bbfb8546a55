#include "cbs/params.hpp"

#include <cmath>

namespace cbs {

double PhysParams::theta() const
{
    if (nbar == 0.0)
        return std::numeric_limits<double>::infinity();
    return std::log1p(1.0 / nbar);
}

void PhysParams::set_theta(double theta)
{
    if (!(theta > 0.0))
        throw InvalidParams("theta must be > 0");
    nbar = std::isinf(theta) ? 0.0 : 1.0 / std::expm1(theta);
}

PhysParams PhysParams::from_theta(
    double delta, double omega_ho, double omega_R, double theta, double mu)
{
    PhysParams p;
    p.delta = delta;
    p.omega_ho = omega_ho;
    p.omega_R = omega_R;
    p.mu = mu;
    p.set_theta(theta);
    return p;
}

void PhysParams::validate() const
{
    if (!std::isfinite(delta))
        throw InvalidParams("delta must be finite");
    if (!(omega_ho > 0.0) || !std::isfinite(omega_ho))
        throw InvalidParams("omega_ho must be > 0");
    if (!(omega_R >= 0.0) || !std::isfinite(omega_R))
        throw InvalidParams("omega_R must be >= 0");
    if (!(nbar >= 0.0) || !std::isfinite(nbar))
        throw InvalidParams("nbar must be >= 0");
    if (!(std::abs(mu) <= 1.0))
        throw InvalidParams("|mu| must be <= 1");
}

double zeta_sq_of(double delta, double omega_R, double omega_ho)
{
    return 4.0 * omega_R * omega_ho / (delta * delta + 0.25);
}

DerivedParams derive(PhysParams const& p)
{
    p.validate();
    DerivedParams d;
    d.gamma_sq = p.delta * p.delta + 0.25;
    double const abs_gamma = std::sqrt(d.gamma_sq);
    d.chi = p.omega_R / abs_gamma;
    d.zeta_sq = zeta_sq_of(p.delta, p.omega_R, p.omega_ho);
    d.xi_sq = p.coth_half_theta() * d.zeta_sq;
    // 2 zeta^2 / theta; vanishes in the ground state where theta is infinite
    d.xi_cl_sq = p.nbar == 0.0 ? 0.0 : 2.0 * d.zeta_sq / p.theta();
    d.eta_sq = p.eta_sq();
    d.rho = 4.0 * p.mu * (p.delta / abs_gamma) * d.chi;
    return d;
}

double cross_section_ratio(double delta)
{
    return 1.0 / (1.0 + 4.0 * delta * delta);
}

double recoil_displacement_ratio(PhysParams const& p)
{
    return 2.0 * std::sqrt(zeta_sq_of(p.delta, p.omega_R, p.omega_ho));
}

double theta_for_xi_sq(double delta,
                       double omega_R,
                       double omega_ho,
                       double xi_sq)
{
    double const zsq = zeta_sq_of(delta, omega_R, omega_ho);
    if (!(zsq > 0.0))
        throw InvalidParams("xi back-solving needs omega_R > 0");
    if (!(xi_sq > zsq))
        throw InvalidParams(
            "requested xi^2 must exceed the ground-state zeta^2 = "
            + std::to_string(zsq));
    // coth(theta/2) = xi^2/zeta^2  <=>  theta = 2 atanh(zeta^2/xi^2)
    return 2.0 * std::atanh(zsq / xi_sq);
}

double omega_ho_for_xi_cl_sq(double delta,
                             double omega_R,
                             double theta,
                             double xi_cl_sq)
{
    if (!(omega_R > 0.0) || !(theta > 0.0) || !(xi_cl_sq > 0.0))
        throw InvalidParams("omega_R, theta and xi_cl^2 must be positive");
    double const gamma_sq = delta * delta + 0.25;
    // xi_cl^2 = (2/theta) 4 omega_R omega_ho / |gamma|^2
    return xi_cl_sq * gamma_sq * theta / (8.0 * omega_R);
}

} // namespace cbs
