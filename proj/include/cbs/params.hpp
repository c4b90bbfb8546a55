#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace cbs {

// All quantities are dimensionless with the natural linewidth set to one:
// frequencies are in units of Gamma, times in units of 1/Gamma, wavevectors
// in units of k_in.

//! Raised when a parameter set violates one of the PhysParams invariants.
class InvalidParams : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/*!
 * Physical configuration of the two-atom backscattering setup.
 *
 * The thermal state of each trap is stored as the mean occupation nbar; the
 * scaled inverse temperature theta = beta*hbar*omega_ho is available through
 * theta() and set_theta(). nbar = 0 is the ground state (theta = infinity).
 */
struct PhysParams
{
    double delta = 0.0;     //!< probe detuning omega_in - omega_0
    double omega_ho = 1e-4; //!< trap frequency
    double omega_R = 0.0;   //!< recoil frequency hbar k_in^2 / 2m
    double nbar = 0.0;      //!< thermal occupation of each motional mode
    double mu = 0.0;        //!< cosine between trap axis and k_in

    //! Complex detuning delta + i/2.
    std::complex<double> gamma() const { return {delta, 0.5}; }

    //! beta*hbar*omega_ho; infinite at nbar = 0.
    double theta() const;

    //! 2 nbar + 1 = coth(theta/2), evaluated without going through theta.
    double coth_half_theta() const { return 2.0 * nbar + 1.0; }

    //! Squared Lamb-Dicke parameter omega_R / omega_ho.
    double eta_sq() const { return omega_R / omega_ho; }

    void set_theta(double theta);

    //! Shallow-trap advisory: the model assumes omega_ho << Gamma.
    bool outside_shallow_trap() const { return omega_ho >= 0.1; }

    //! Throws InvalidParams naming the first violated invariant.
    void validate() const;

    static PhysParams from_theta(double delta,
                                 double omega_ho,
                                 double omega_R,
                                 double theta,
                                 double mu);
};

//! Closed-form derived quantities.
struct DerivedParams
{
    double gamma_sq = 0; //!< |gamma|^2 = delta^2 + 1/4
    double chi = 0;      //!< free-recoil parameter omega_R/|gamma|
    double zeta_sq = 0;  //!< zero-temperature trap parameter
    double xi_sq = 0;    //!< thermal trap parameter coth(theta/2) zeta^2
    double xi_cl_sq = 0; //!< classical Doppler limit 2 zeta^2 / theta
    double eta_sq = 0;   //!< squared Lamb-Dicke parameter
    double rho = 0;      //!< recoil-induced cross-section imbalance
};

DerivedParams derive(PhysParams const& p);

//! sigma(delta)/sigma_0 of the resonant Lorentzian.
double cross_section_ratio(double delta);

//! Recoil displacement of the first scatterer in units of l_ho: 2 zeta.
double recoil_displacement_ratio(PhysParams const& p);

//! zeta^2 = 4 omega_R omega_ho / |gamma|^2 without validation.
double zeta_sq_of(double delta, double omega_R, double omega_ho);

//---------------------------------------------------------------------------//
// Back-solving helpers used by the CLI and the acceptance runs.
//---------------------------------------------------------------------------//

//! Theta such that coth(theta/2) zeta^2 equals xi_sq. Requires xi_sq > zeta^2.
double theta_for_xi_sq(double delta,
                       double omega_R,
                       double omega_ho,
                       double xi_sq);

//! Trap frequency giving the requested classical xi_cl^2 at fixed theta.
double omega_ho_for_xi_cl_sq(double delta,
                             double omega_R,
                             double theta,
                             double xi_cl_sq);

} // namespace cbs
