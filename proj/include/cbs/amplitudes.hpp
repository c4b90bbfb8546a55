#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "cbs/correlator.hpp"
#include "cbs/params.hpp"
#include "cbs/quadrature.hpp"

namespace cbs {

//! The two photon paths: A visits atom 1 first, B visits atom 2 first.
enum class Path
{
    A,
    B
};

//! Trace quantities entering V and P.
enum class TraceKind
{
    I_A, //!< tr{T_A rho T_A^dag}
    I_B, //!< tr{T_B rho T_B^dag}
    INT  //!< tr{T_B rho T_A^dag} = <T_A^dag T_B>
};

std::string to_string(TraceKind k);

/*!
 * Displacement factors of the double-scattering operator for one path.
 *
 * For path A, left to right (later times first):
 *   (2, +khat, 0) (2, +nhat, -s) (1, -nhat, -s) (1, +khat, -s-t)
 * i.e. atom 1 absorbs k_in at -s-t, re-emits along nhat at -s where atom 2
 * absorbs, and atom 2 emits into k_out = -k_in at 0. Path B swaps the atoms
 * and reverses nhat. Static phases of the trap centres are identical for
 * both paths at exact backscattering and are left out.
 */
EventList events_T(Path path, double s, double t);

//! Events of the adjoint operator: reversed order, negated wavevectors.
EventList adjoint_reversed(EventList const& events);

//! adjoint_reversed(events_T(X, s', t')) ++ events_T(Y, s, t).
EventList trace_events(TraceKind kind, double s, double t, double sp, double tp);

/*!
 * Full trace integrand
 *   e^{i gamma (s+t)} e^{-i gamma^* (s'+t')} G(trace_events(...)).
 * Straightforward evaluation through log_correlator; the quadrature uses
 * TraceIntegrand, which computes the same function faster.
 */
std::complex<double> trace_integrand(TraceKind kind,
                                     double s,
                                     double t,
                                     double sp,
                                     double tp,
                                     PhysParams const& p);

//! Integer linear change of variables x = M y, x = (s, t, s', t').
using CoordMap = std::array<std::array<int, 4>, 4>;

CoordMap identity_map();

/*!
 * Ordered sub-regions for the intensity traces, in coordinates
 * y = (b_s, u_s, b_t, u_t):
 *   [0]  s >= s', t >= t':  s = b_s + u_s, s' = b_s, t = b_t + u_t, t' = b_t
 *   [1]  s >= s', t <  t':  s = b_s + u_s, s' = b_s, t = b_t, t' = b_t + u_t
 * The remaining two regions are their images under (s,t) <-> (s',t'), which
 * conjugates the I_A and I_B integrands, so I = 2 Re(Q[0] + Q[1]).
 * The motional Gaussian of I_A and I_B depends on s - s' and t - t' and
 * becomes a ridge along the diagonal at high temperature; in these
 * coordinates it lies along the u axes.
 */
std::array<CoordMap, 2> ordered_regions();

/*!
 * Trace integrand prepared for 4D quadrature over x = (s, t, s', t'), or over
 * y with x = M y when a coordinate map is given.
 *
 * The envelope e^{i gamma (s+t) - i gamma^* (s'+t')} is exposed through
 * rates(); smooth() is the correlator G. The correlator is compiled once into
 * pair terms c_p K(d_p . x) with integer time coefficients d_p, obtained by
 * probing events_T at the unit vectors. On a tensor grid each factor
 * exp(c_p K) depending on at most three axes is tabulated, so the innermost
 * loop is reduced to table products.
 */
class TraceIntegrand final : public quad::Integrand4d
{
  public:
    struct PairTerm
    {
        double coef;                //!< -q_a . q_b
        std::array<int, 4> time;    //!< t_a - t_b as integer combination
    };

    TraceIntegrand(TraceKind kind,
                   PhysParams const& p,
                   CoordMap const& map = identity_map());

    std::array<quad::cplx, 4> rates() const override { return rates_; }
    quad::cplx smooth(quad::Point4 const& x) const override;
    bool swap_conjugate() const override
    {
        return kind_ != TraceKind::INT && map_ == identity_map();
    }
    //! Widths of the motional Gaussian along each axis (shallow-trap form
    //! -omega_R omega_ho coth(theta/2) dt^2 / 2 of Re K).
    std::array<double, 4> length_scales() const override;
    quad::cplx tensor_contract(std::array<quad::Rule1d const*, 4> const& rules,
                               bool swap_symmetric,
                               int threads) const override;

    std::vector<PairTerm> const& terms() const { return terms_; }
    TraceKind kind() const { return kind_; }

  private:
    TraceKind kind_;
    PhysParams params_;
    CoordMap map_;
    std::array<quad::cplx, 4> rates_;
    std::vector<PairTerm> terms_;
};

} // namespace cbs
