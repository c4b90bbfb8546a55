#pragma once

#include <string>
#include <vector>

#include "cbs/amplitudes.hpp"
#include "cbs/params.hpp"
#include "cbs/quadrature.hpp"

namespace cbs {

enum class Regime
{
    zeroT,
    finiteT
};

std::string to_string(Regime r);

//! Regime implied by the thermal state: nbar == 0 is zero temperature.
Regime regime_of(PhysParams const& p);

//! The three traces of the two-path density matrix.
struct TraceSet
{
    quad::QuadResult I_A;
    quad::QuadResult I_B;
    quad::QuadResult INT;

    bool converged() const
    {
        return I_A.converged && I_B.converged && INT.converged;
    }
};

/*!
 * One trace integral. With the tensor method I_A and I_B are assembled from
 * the two ordered sub-regions (see ordered_regions), INT is integrated
 * directly; the other methods integrate the plain integrand.
 */
quad::QuadResult integrate_trace(TraceKind kind,
                                 PhysParams const& p,
                                 quad::QuadratureSpec const& spec);

TraceSet compute_traces(PhysParams const& p, quad::QuadratureSpec const& spec);

struct Estimate
{
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

//! V = 2|INT| / (I_A + I_B), with first-order error propagation.
Estimate visibility(TraceSet const& traces);
//! P = |I_A - I_B| / (I_A + I_B).
Estimate predictability(TraceSet const& traces);

Estimate visibility(PhysParams const& p, quad::QuadratureSpec const& spec);
Estimate predictability(PhysParams const& p, quad::QuadratureSpec const& spec);

/*!
 * Leading-order distinguishability.
 *   zeroT:   D^2 = rho^2 + 2 zeta^2
 *   finiteT: D = (2/sqrt(pi)) (|delta|/|gamma|) xi_cl
 */
double distinguishability_analytic(PhysParams const& p, Regime regime);

//! 1 - 2 [1 - (2/pi) delta^2/|gamma|^2] xi_cl^2.
double duality_sum_analytic(PhysParams const& p);

/*!
 * Leading-order visibility.
 *   zeroT:   V^2 = 1 - rho^2 - 2 zeta^2
 *   finiteT: V^2 = 1 - 2 xi_cl^2
 * Clamped at zero where the expansion runs negative.
 */
double visibility_asymptotic(PhysParams const& p, Regime regime);

//! Validity annotations; they never block a computation.
struct RegimeFlags
{
    bool shallow_trap_violated = false; //!< omega_ho >= 0.1
    bool small_xi_violated = false;     //!< expansion parameter not small
    bool small_chi_violated = false;    //!< free recoil not negligible
    bool classical_violated = false;    //!< finite T with theta > 0.1
    bool not_converged = false;         //!< some quadrature missed its target

    bool any() const
    {
        return shallow_trap_violated || small_xi_violated || small_chi_violated
               || classical_violated || not_converged;
    }
    std::vector<std::string> names() const;
};

RegimeFlags regime_flags(PhysParams const& p, Regime regime);

struct DualityReport
{
    PhysParams params;
    DerivedParams derived;
    Regime regime = Regime::zeroT;

    double V = 0.0;
    double V_err = 0.0;
    double P = 0.0;
    double P_err = 0.0;
    double D_analytic = 0.0;
    double duality_sum = 0.0; //!< V^2 + D_analytic^2
    double duality_sum_err = 0.0;
    double V_asymptotic = 0.0;
    double duality_sum_asymptotic = 0.0;
    quad::QuadResult I_A;
    quad::QuadResult I_B;
    quad::QuadResult INT;

    RegimeFlags flags;
};

DualityReport full_report(PhysParams const& p, quad::QuadratureSpec const& spec);

} // namespace cbs
